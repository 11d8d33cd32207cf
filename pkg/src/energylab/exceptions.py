"""Exception hierarchy shared by all energylab modules."""


class EnergyLabError(Exception):
    """Base class for every error raised by energylab."""


class DomainError(EnergyLabError, ValueError):
    """An argument lies outside the domain where a quantity is defined.

    ``anchor`` names the formula whose validity condition was violated.
    """

    def __init__(self, message, anchor=None):
        super().__init__(message)
        self.message = message
        self.anchor = anchor

    def __str__(self):
        return f"{self.message} [{self.anchor}]" if self.anchor else self.message


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a simple pole.

    Carries the pole location and the residue there so callers can branch
    explicitly instead of receiving a huge float.
    """

    def __init__(self, message, pole, residue=None, anchor=None):
        super().__init__(message, anchor)
        self.pole = pole
        self.residue = residue


class UnsupportedCaseError(DomainError):
    """A parameter combination the closed form explicitly excludes."""


class SingularConfigurationError(EnergyLabError, ValueError):
    """Two points of a configuration coincide, so the energy is infinite."""


class StagnationError(EnergyLabError, RuntimeError):
    """The line search could not find a descent step.

    The best iterate reached so far is available as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ParseError(EnergyLabError, ValueError):
    """Malformed input file; ``lineno`` is 1-based."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
