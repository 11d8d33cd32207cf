"""Closed-form constants, bounds and conjectured coefficients for S^d energies.

Every quantity carries a validity domain. Evaluating outside it raises a
:class:`~energylab.exceptions.DomainError` (or :class:`PoleError` near a pole
of a meromorphic continuation); nothing returns garbage silently.

Notation used in names: ``omega(d)`` is the surface area of S^d, ``F(d)`` the
ratio (volume of the unit d-ball)/(surface area of S^d).
"""
import math
from dataclasses import dataclass

from . import specfun as sf
from .exceptions import DomainError, PoleError, UnsupportedCaseError

SQRT_PI = math.sqrt(math.pi)
HEX_COVOLUME = math.sqrt(3.0) / 2.0

# Largest sphere packing densities known exactly.
PACKING_DENSITY = {1: 1.0, 2: math.pi / math.sqrt(12.0), 3: math.pi / math.sqrt(18.0)}


@dataclass(frozen=True)
class TheoryConstant:
    """A named constant with its value, validity condition and formula label."""

    name: str
    value: float
    domain: str
    anchor: str

    def as_dict(self):
        return {"name": self.name, "value": self.value, "domain": self.domain, "anchor": self.anchor}


@dataclass(frozen=True)
class LatticeData:
    """Covolume and Epstein zeta derivative at 0 of a lattice in R^d."""

    d: int
    covolume: float
    zeta_prime0: float


def check_dim(d, minimum=1):
    """Validate a sphere dimension and return it as int."""
    if isinstance(d, bool) or int(d) != d:
        raise DomainError(f"dimension must be an integer, got {d!r}")
    d = int(d)
    if d < minimum:
        raise DomainError(f"dimension must be >= {minimum}, got {d}")
    return d


def omega(d):
    """Surface area of the unit sphere S^d in R^(d+1)."""
    d = check_dim(d, minimum=0)
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def ball_volume(d):
    """Volume of the unit ball in R^d."""
    d = check_dim(d)
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sphere_area_ratio(d):
    """omega(d-1)/omega(d) = Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))."""
    d = check_dim(d)
    return math.gamma((d + 1) / 2) / (SQRT_PI * math.gamma(d / 2))


def F(d):
    """Ball-to-sphere ratio vol(B^d)/area(S^d) = omega(d-1)/(d omega(d))."""
    d = check_dim(d)
    return sphere_area_ratio(d) / d


# ---------------------------------------------------------------- continuous energies

def v_log_sphere(d):
    """Logarithmic energy of the normalized surface measure on S^d."""
    d = check_dim(d)
    return math.log(0.5) + 0.5 * (sf.digamma(d) - sf.digamma(d / 2))


def _v_s_pole_index(s, d):
    """Index k of the pole s = d + 2k nearest to s, or None if none exists."""
    k = round((s - d) / 2)
    if k < 0:
        return None
    if d % 2 == 0 and k > d // 2 - 1:
        return None
    return k


def v_s_residue(d, k=0):
    """Residue in s of the continuous Riesz energy at the pole s = d + 2k.

    Zero when d is even and k >= d/2 (those singularities are removable).
    """
    d = check_dim(d)
    k = int(k)
    if k < 0:
        raise DomainError(f"pole index must be >= 0, got {k}")
    return (
        (-1) ** (k + 1)
        * 2.0 ** (-2 * k)
        * math.gamma((d + 1) / 2)
        / (SQRT_PI * math.factorial(k))
        * sf.rgamma(d / 2 - k)
    )


def v_s_sphere(s, d, pole_tol=1e-6):
    """Continuous Riesz s-energy of S^d and its meromorphic continuation in s.

    Equal to the double integral of |x-y|^-s against the normalized surface
    measure for -2 < s < d; simple poles at s = d + 2k.

    Raises
    ------
    PoleError
        Within ``pole_tol`` of a pole; ``residue`` holds the residue there.
    """
    d = check_dim(d)
    s = float(s)
    k = _v_s_pole_index(s, d)
    if k is not None and abs(s - (d + 2 * k)) <= pole_tol:
        raise PoleError(
            f"continuous {s:g}-energy of S^{d} has a pole at s={d + 2 * k}",
            pole=float(d + 2 * k),
            residue=v_s_residue(d, k),
            anchor="continuous-riesz-energy",
        )
    x = 0.5 * (d - s)
    pref = 2.0 ** (d - s - 1) * math.gamma((d + 1) / 2) / SQRT_PI
    if d % 2 == 0:
        # Gamma(x)/Gamma(x + d/2) = 1/(x)_{d/2}
        return pref / sf.pochhammer(x, d // 2)
    return pref * sf.gamma(x) * sf.rgamma(d - 0.5 * s)


def v_s_circle(s, pole_tol=1e-6):
    """Continuous Riesz s-energy of the unit circle, continued to s != 1, 3, 5, ..."""
    s = float(s)
    if s == 0.0:
        return 1.0
    return v_s_sphere(s, 1, pole_tol=pole_tol)


# ---------------------------------------------------------------- caps and exterior integrals

def cap_measure(d, rho):
    """Normalized surface measure of a spherical cap of chordal radius ``rho``."""
    d = check_dim(d)
    rho = float(rho)
    if not 0.0 < rho <= 2.0:
        raise DomainError(f"cap radius must satisfy 0 < rho <= 2, got {rho}", "cap-measure")
    return (
        sphere_area_ratio(d) / d * rho**d
        * sf.gauss_2f1(1.0 - d / 2, d / 2, 1.0 + d / 2, rho * rho / 4.0)
    )


def exterior_integral_d(d, rho, max_terms=1_000_000):
    """Integral of |x-y|^-d over the complement of a cap of radius ``rho``."""
    d = check_dim(d)
    rho = float(rho)
    if not 0.0 < rho < 2.0:
        raise DomainError(f"need 0 < rho < 2, got {rho}", "exterior-integral-boundary")
    ratio = sphere_area_ratio(d)
    w = rho * rho / 4.0
    a = 1.0 - d / 2
    terms = []
    coeff = 1.0  # (a)_m / m! * w^m
    for m in range(1, max_terms + 1):
        coeff *= (a + m - 1) / m * w
        if coeff == 0.0:
            break
        terms.append(coeff / m)
        if abs(coeff / m) < 1e-17 and m > 5:
            break
    series = math.fsum(terms)
    return (
        -ratio * math.log(rho)
        - 0.5 * ratio * (sf.digamma(d / 2) - sf.digamma(1.0) - 2.0 * math.log(2.0))
        - 0.5 * ratio * series
    )


def _check_hypersingular(s, d, anchor, exclude_integer=True):
    if not s > d:
        raise DomainError(f"requires s > d, got s={s}, d={d}", anchor)
    half = 0.5 * (s - d)
    if exclude_integer and half == math.floor(half):
        raise UnsupportedCaseError(
            f"(s-d)/2 = {half:g} is an integer; the closed form excludes this case", anchor
        )


def exterior_integral_s(s, d, rho):
    """Integral of |x-y|^-s over the complement of a cap of radius ``rho``, s > d."""
    d = check_dim(d)
    s, rho = float(s), float(rho)
    _check_hypersingular(s, d, "exterior-integral-hypersingular")
    if not 0.0 < rho < 2.0:
        raise DomainError(f"need 0 < rho < 2, got {rho}", "exterior-integral-hypersingular")
    return v_s_sphere(s, d, pole_tol=0.0) + (
        2.0 ** (d - s) / (s - d)
        * sphere_area_ratio(d)
        * (rho / 2.0) ** (d - s)
        * sf.gauss_2f1(1.0 - d / 2, 0.5 * (d - s), 1.0 - 0.5 * (s - d), rho * rho / 4.0)
    )


# ---------------------------------------------------------------- bounds

def hypersing_lower_A(s, d):
    """Lower-bound constant for C_{s,d} / omega(d)^(s/d), s > d."""
    d = check_dim(d)
    s = float(s)
    _check_hypersingular(s, d, "hypersingular-lower-bound")
    inner = (
        0.5 * math.gamma((d + 1) / 2) * math.gamma(1 + 0.5 * (s - d))
        / (SQRT_PI * math.gamma(1 + 0.5 * s))
    )
    return d / (s - d) * inner ** (s / d)


def hypersing_upper_U(s, d):
    """Upper-bound constant for C_{s,d} / omega(d)^(s/d), s > d."""
    d = check_dim(d)
    s = float(s)
    _check_hypersingular(s, d, "hypersingular-upper-bound", exclude_integer=False)
    return (F(d) / (1.0 - d / s)) ** (s / d)


def boundary_c(d):
    """Constant of the second-order lower bound in the boundary case s = d."""
    d = check_dim(d)
    f = F(d)
    return f * (1.0 - math.log(f) + d * (sf.digamma(d / 2) - sf.digamma(1.0) - math.log(2.0)))


def log_interval_bounds():
    """(liminf, limsup) bounds for the N-term of the log energy on S^2."""
    two_pi = 2.0 * math.pi
    r27 = math.sqrt(27.0)
    p = math.sqrt(two_pi + r27)
    q = math.sqrt(two_pi)
    a = 2.0 * q / r27 * (p + q)
    b = (p - q) / (p + q)
    lower = -0.5 * math.log(0.5 * math.pi * (-math.expm1(-a)) ** b)
    upper = -0.5 * math.log(math.pi * math.sqrt(3.0) / 2.0) + math.pi / (4.0 * math.sqrt(3.0))
    return lower, upper


def wagner_cprime(d):
    """Positive constant of the improved lower bound for the log energy on S^d."""
    d = check_dim(d, minimum=2)
    h = d // 2
    middle = (
        math.gamma(d) * math.gamma(1 + h - d / 2)
        / (2.0**d * math.gamma(d / 2) * math.gamma(1 + h))
        / d
    )
    harmonic = math.fsum(1.0 / r for r in range(1, h + 1))
    return v_log_sphere(d) + middle + 0.5 * harmonic


def best_packing_cinf(d):
    """Limit of N^(1/d) times the best-packing distance on S^d, d in {1, 2, 3}."""
    d = check_dim(d)
    if d not in PACKING_DENSITY:
        raise UnsupportedCaseError(
            f"densest packing density is only known for d in (1, 2, 3), got d={d}",
            "best-packing-constant",
        )
    return 2.0 * (PACKING_DENSITY[d] / ball_volume(d)) ** (1.0 / d)


# ---------------------------------------------------------------- conjectured coefficients

def csd_hex(s, pole_tol=1e-6):
    """Conjectured C_{s,2} = (sqrt(3)/2)^(s/2) zeta_hex(s) (lattice value for d = 2)."""
    s = float(s)
    if s == 0.0:
        return -1.0
    try:
        z = sf.epstein_hex(s, pole_tol=pole_tol)
    except PoleError as exc:
        raise PoleError(
            f"C_(s,2) has a pole at s=2 (got s={s})",
            pole=2.0,
            residue=HEX_COVOLUME * exc.residue,
            anchor="riesz-S2-conjecture",
        ) from None
    return HEX_COVOLUME ** (s / 2) * z


def csd_circle(s):
    """C_{s,1} = 2 zeta(s)."""
    return 2.0 * sf.riemann_zeta(s)


def hexagonal_lattice():
    """:class:`LatticeData` of the unit hexagonal lattice."""
    return LatticeData(d=2, covolume=HEX_COVOLUME, zeta_prime0=sf.epstein_hex_deriv0())


def c_log_d_formula(d, lattice=None):
    """N-term constant of the log energy, (1/d) log(omega(d)/|L|) + zeta_L'(0).

    ``lattice`` is a :class:`LatticeData`; the hexagonal lattice is supplied
    automatically for d = 2.
    """
    d = check_dim(d, minimum=2)
    if lattice is None:
        if d != 2:
            raise UnsupportedCaseError(
                f"no lattice data built in for d={d}; pass LatticeData", "log-energy-conjecture"
            )
        lattice = hexagonal_lattice()
    if lattice.d != d:
        raise DomainError(f"lattice dimension {lattice.d} does not match d={d}")
    return math.log(omega(d) / lattice.covolume) / d + lattice.zeta_prime0


def c_log_2():
    """Conjectured N-term constant of the optimal log energy on S^2 (closed form)."""
    return (
        2.0 * math.log(2.0)
        + 0.5 * math.log(2.0 / 3.0)
        + 3.0 * (0.5 * math.log(math.pi) - math.lgamma(1.0 / 3.0))
    )


def symmetric_limit(f, x0, steps=None):
    """lim_{x -> x0} f(x) for f analytic at x0 apart from odd singular parts.

    Averages f(x0 + h) and f(x0 - h), which removes odd powers of h, then
    Richardson-extrapolates the even error terms over the ``steps`` sequence.
    """
    if steps is None:
        steps = [1e-2 / 2**k for k in range(5)]
    steps = list(steps)
    table = [[0.5 * (f(x0 + h) + f(x0 - h))] for h in steps]
    for i in range(1, len(steps)):
        r2 = (steps[i - 1] / steps[i]) ** 2
        for j in range(1, i + 1):
            prev, prev_up = table[i][j - 1], table[i - 1][j - 1]
            table[i].append(prev + (prev - prev_up) / (r2**j - 1.0))
    return table[-1][-1]


def residue_limit(d, steps=None):
    """Residue of v_s_sphere at s = d obtained numerically from (s - d) V_s."""
    d = check_dim(d)
    return symmetric_limit(lambda s: (s - d) * v_s_sphere(s, d, pole_tol=0.0), float(d), steps)


def a_d_closed(d):
    """Finite part A_d of v_s_sphere at s = d (closed form)."""
    d = check_dim(d)
    return -0.5 * sphere_area_ratio(d) * (
        sf.EULER_GAMMA - 2.0 * math.log(2.0) + sf.digamma(d / 2)
    )


def a_d_limit(d, steps=None):
    """Finite part A_d of v_s_sphere at s = d by symmetric Richardson limits."""
    d = check_dim(d)
    a = v_s_residue(d, 0)
    return symmetric_limit(lambda s: v_s_sphere(s, d, pole_tol=0.0) - a / (s - d), float(d), steps)


def b_minus1_2():
    """Residue at s = 2 of C_{s,2}/(4 pi)^(s/2) for the hexagonal value of C_{s,2}."""
    return HEX_COVOLUME * sf.HEX_POLE_RESIDUE / (4.0 * math.pi)


def b_2_closed():
    """Finite part B_2 of C_{s,2}/(4 pi)^(s/2) at s = 2, via Stieltjes constants."""
    return 0.25 * (sf.EULER_GAMMA - math.log(8.0 * math.sqrt(3.0) * math.pi)) + (
        math.sqrt(3.0) / (4.0 * math.pi)
    ) * (sf.stieltjes_gamma1(2.0 / 3.0) - sf.stieltjes_gamma1(1.0 / 3.0))


def b_2_limit(steps=None):
    """Finite part B_2 by symmetric Richardson limits of the hexagonal C_{s,2}."""
    b = b_minus1_2()
    scale = 4.0 * math.pi
    return symmetric_limit(
        lambda s: csd_hex(s, pole_tol=0.0) / scale ** (s / 2) - b / (s - 2.0), 2.0, steps
    )


def c_dd_2(method="closed"):
    """Conjectured N^2-coefficient C_{2,2} of the optimal 2-energy on S^2.

    ``method="closed"`` assembles A_2 + B_2 from Stieltjes constants;
    ``method="limit"`` obtains both parts from numerical limits in s.
    """
    if method == "closed":
        return a_d_closed(2) + b_2_closed()
    if method == "limit":
        return a_d_limit(2) + b_2_limit()
    raise DomainError(f"unknown method {method!r}; use 'closed' or 'limit'")


# ---------------------------------------------------------------- registry

def _entry(fn, params, domain, anchor):
    return {"fn": fn, "params": params, "domain": domain, "anchor": anchor}


CONSTANTS = {
    "V_log": _entry(v_log_sphere, ("d",), "d >= 1", "continuous-log-energy"),
    "V_s": _entry(v_s_sphere, ("s", "d"), "-2 < s < d; continued to s != d + 2k", "continuous-riesz-energy"),
    "V_s_circle": _entry(v_s_circle, ("s",), "s not in {1, 3, 5, ...}", "continuous-riesz-energy-circle"),
    "V_s_residue": _entry(v_s_residue, ("d", "k"), "d >= 1, k >= 0", "continuous-riesz-energy-residue"),
    "omega": _entry(omega, ("d",), "d >= 0", "sphere-surface-area"),
    "F_d": _entry(F, ("d",), "d >= 1", "ball-to-sphere-ratio"),
    "C_log_2": _entry(c_log_2, (), "d = 2", "log-energy-conjecture-S2"),
    "C_log_d": _entry(c_log_d_formula, ("d",), "d = 2 (built-in lattice data)", "log-energy-conjecture"),
    "C_2_2": _entry(c_dd_2, (), "s = d = 2", "boundary-case-conjecture-S2"),
    "A_d": _entry(a_d_closed, ("d",), "d >= 1", "boundary-case-finite-part"),
    "a_minus1": _entry(lambda d: v_s_residue(d, 0), ("d",), "d >= 1", "boundary-case-residue"),
    "B_2": _entry(b_2_closed, (), "d = 2", "boundary-case-finite-part-lattice"),
    "b_minus1_2": _entry(b_minus1_2, (), "d = 2", "boundary-case-residue-lattice"),
    "log_interval_lower": _entry(lambda: log_interval_bounds()[0], (), "d = 2, log energy", "log-liminf-bound"),
    "log_interval_upper": _entry(lambda: log_interval_bounds()[1], (), "d = 2, log energy", "log-limsup-bound"),
    "C_prime": _entry(wagner_cprime, ("d",), "d >= 2", "log-energy-lower-bound"),
    "c_boundary": _entry(boundary_c, ("d",), "d >= 1", "boundary-case-lower-bound"),
    "A_sd": _entry(hypersing_lower_A, ("s", "d"), "s > d, (s-d)/2 not an integer", "hypersingular-lower-bound"),
    "U_sd": _entry(hypersing_upper_U, ("s", "d"), "s > d", "hypersingular-upper-bound"),
    "C_s_hex": _entry(csd_hex, ("s",), "s != 2", "riesz-S2-conjecture"),
    "C_s_circle": _entry(csd_circle, ("s",), "s != 1", "riesz-circle-coefficient"),
    "C_inf": _entry(best_packing_cinf, ("d",), "d in {1, 2, 3}", "best-packing-constant"),
    "Delta": _entry(lambda d: PACKING_DENSITY[check_dim(d)] if d in PACKING_DENSITY else best_packing_cinf(d), ("d",), "d in {1, 2, 3}", "packing-density"),
    "zeta_hex": _entry(sf.epstein_hex, ("s",), "s != 2", "hexagonal-epstein-zeta"),
    "zeta_hex_prime0": _entry(sf.epstein_hex_deriv0, (), "s = 0", "hexagonal-epstein-zeta"),
    "L3": _entry(sf.dirichlet_L3, ("s",), "real s", "dirichlet-L-mod-3"),
    "L3_prime0": _entry(sf.dirichlet_L3_deriv0, (), "s = 0", "dirichlet-L-mod-3"),
}


def get_constant(name, **params):
    """Evaluate a registered constant and wrap it in a :class:`TheoryConstant`.

    Parameters not used by the constant are ignored; missing ones raise
    :class:`DomainError`.
    """
    try:
        entry = CONSTANTS[name]
    except KeyError:
        raise DomainError(
            f"unknown constant {name!r}; known: {', '.join(sorted(CONSTANTS))}"
        ) from None
    args = []
    for p in entry["params"]:
        if params.get(p) is None:
            raise DomainError(f"constant {name!r} needs parameter {p!r}", entry["anchor"])
        args.append(params[p])
    try:
        value = float(entry["fn"](*args))
    except DomainError as exc:
        if exc.anchor is None:
            exc.anchor = entry["anchor"]
        raise
    if not math.isfinite(value):
        raise DomainError(f"{name} is not finite at {params}", entry["anchor"])
    return TheoryConstant(name=name, value=value, domain=entry["domain"], anchor=entry["anchor"])
