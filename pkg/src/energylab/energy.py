"""Discrete Riesz and logarithmic energies of point configurations on S^d.

A configuration is an ``(N, d+1)`` float64 array of unit vectors. Reference
energies sum unordered pairs in lexicographic order with ``math.fsum``, so the
value is reproducible and independent of thread count.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import specfun as sf
from . import theory
from ._validation import check_configuration, check_positive_int
from .exceptions import DomainError, SingularConfigurationError

# Rows of the pair-difference block used by the gradient; bounds peak memory.
_BLOCK_ENTRIES = 1 << 22

HEX_SHELLS = (
    (1.0, 6),
    (math.sqrt(3.0), 6),
    (2.0, 6),
    (math.sqrt(7.0), 12),
    (3.0, 6),
    (2.0 * math.sqrt(3.0), 6),
    (math.sqrt(13.0), 12),
)


@dataclass(frozen=True)
class EnergyKind:
    """Energy kernel: ``tag`` is ``"log"`` or ``"riesz"`` with exponent ``s``."""

    tag: str
    s: float = None

    def __post_init__(self):
        if self.tag == "log":
            if self.s is not None:
                raise DomainError("log energy takes no exponent s")
        elif self.tag == "riesz":
            if self.s is None:
                raise DomainError("riesz energy needs an exponent s")
            s = float(self.s)
            if not math.isfinite(s) or s <= -2.0:
                raise DomainError(f"riesz exponent must satisfy s > -2, got {self.s}")
            if s == 0.0:
                raise DomainError("s = 0 is the constant kernel; use the closed form N^2 - N")
            object.__setattr__(self, "s", s)
        else:
            raise DomainError(f"unknown energy kind {self.tag!r}; use 'log' or 'riesz'")

    @classmethod
    def log(cls):
        return cls("log")

    @classmethod
    def riesz(cls, s):
        return cls("riesz", s)

    @property
    def maximize(self):
        """True when optimal configurations maximize the energy (-2 < s < 0)."""
        return self.tag == "riesz" and self.s < 0

    def __str__(self):
        return "log" if self.tag == "log" else f"riesz(s={self.s:g})"


def pair_distances(points):
    """Distances |x_j - x_k| for j < k in lexicographic order."""
    x = np.asarray(points, dtype=np.float64)
    j, k = np.triu_indices(x.shape[0], 1)
    return np.linalg.norm(x[j] - x[k], axis=1)


def _checked_distances(points, singular):
    r = pair_distances(points)
    if singular and np.any(r == 0.0):
        raise SingularConfigurationError("configuration has coincident points")
    return r


def riesz_energy(points, s):
    """Riesz s-energy: sum over ordered pairs j != k of |x_j - x_k|^-s.

    ``s = 0`` returns the closed form N^2 - N.
    """
    x = check_configuration(points)
    s = float(s)
    n = x.shape[0]
    if s == 0.0:
        return float(n * n - n)
    r = _checked_distances(x, singular=s > 0)
    return 2.0 * math.fsum(r ** (-s))


def log_energy(points):
    """Logarithmic energy: sum over ordered pairs j != k of log(1/|x_j - x_k|)."""
    x = check_configuration(points)
    r = _checked_distances(x, singular=True)
    return -2.0 * math.fsum(np.log(r))


def energy(points, kind):
    """Energy of ``points`` under an :class:`EnergyKind`."""
    if kind.tag == "log":
        return log_energy(points)
    return riesz_energy(points, kind.s)


def _raw_gradient(x, kind):
    """Euclidean gradient of the symmetric pair sum, without validation."""
    n, dim = x.shape
    g = np.empty_like(x)
    block = max(1, _BLOCK_ENTRIES // (n * dim))
    for start in range(0, n, block):
        stop = min(n, start + block)
        diff = x[start:stop, None, :] - x[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        rows = np.arange(stop - start)
        r2[rows, rows + start] = 1.0
        if np.any(r2 == 0.0):
            raise SingularConfigurationError("configuration has coincident points")
        if kind.tag == "log":
            w = -2.0 / r2
        else:
            w = -2.0 * kind.s * r2 ** (-0.5 * kind.s - 1.0)
        w[rows, rows + start] = 0.0
        g[start:stop] = np.einsum("ij,ijk->ik", w, diff)
    return g


def tangent_project(x, g):
    """Remove the radial component of each row of ``g`` at the points ``x``."""
    return g - np.sum(g * x, axis=1, keepdims=True) * x


def energy_gradient(points, kind):
    """Riemannian gradient of the energy on (S^d)^N, shape (N, d+1)."""
    x = check_configuration(points)
    return tangent_project(x, _raw_gradient(x, kind))


# ---------------------------------------------------------------- circle

def _circle_chords(n):
    k = np.arange(1, n)
    # sin(pi k/N) = sin(pi (N-k)/N); the smaller argument is more accurate.
    return 2.0 * np.sin(np.pi * np.minimum(k, n - k) / n)


def roots_of_unity(n):
    """The N-th roots of unity as an (N, 2) configuration on S^1."""
    n = check_positive_int(n, "N", minimum=2)
    t = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(t), np.sin(t)])


def circle_exact(s, n):
    """Riesz s-energy of the N-th roots of unity, N * sum_k (2 sin(pi k/N))^-s."""
    n = check_positive_int(n, "N", minimum=2)
    s = float(s)
    if not s > -2.0:
        raise DomainError(f"need s > -2, got {s}")
    if s == 0.0:
        return float(n * n - n)
    return n * math.fsum(_circle_chords(n) ** (-s))


def circle_exact_log(n):
    """Log energy of the N-th roots of unity (equal to -N log N)."""
    n = check_positive_int(n, "N", minimum=2)
    return -n * math.fsum(np.log(_circle_chords(n)))


def circle_expansion(s, n, p):
    """Asymptotic expansion of :func:`circle_exact` truncated after ``p`` correction terms.

    The omitted remainder is O(N^(-1 + s - 2p)).
    """
    s = float(s)
    n = check_positive_int(n, "N", minimum=2)
    p = check_positive_int(p, "p", minimum=0)
    if s == 0.0 or (s > 0 and s == math.floor(s) and int(s) % 2 == 1):
        raise DomainError(
            f"expansion excludes s in (0, 1, 3, 5, ...), got s={s:g}", "circle-expansion"
        )
    alpha = sf.gen_bernoulli_alpha(s, p).values
    scale = 2.0 / (2.0 * math.pi) ** s
    terms = [theory.v_s_circle(s) * float(n) ** 2, scale * sf.riemann_zeta(s) * float(n) ** (1 + s)]
    for k in range(1, p + 1):
        terms.append(scale * alpha[k] * sf.riemann_zeta(s - 2 * k) * float(n) ** (1 + s - 2 * k))
    return math.fsum(terms)


def circle_remainder_exponent(s, p):
    """Power of N governing the error of ``circle_expansion(s, N, p)``."""
    return -1.0 + float(s) - 2.0 * int(p)


# ---------------------------------------------------------------- histogram

@dataclass(frozen=True)
class DistanceHistogram:
    """Counts of unordered pair distances plus scaled hexagonal reference distances."""

    edges: np.ndarray
    counts: np.ndarray
    reference: tuple

    def rows(self):
        return [(float(lo), float(hi), int(c)) for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts)]


def distance_histogram(points, bins, dmax=2.0):
    """Histogram of unordered pair distances on ``[0, dmax]``.

    Distances above ``dmax`` are not counted. ``reference`` lists the
    hexagonal-lattice shell distances scaled so the first equals the smallest
    pair distance of the configuration.
    """
    x = check_configuration(points)
    bins = check_positive_int(bins, "bins")
    dmax = float(dmax)
    if not dmax > 0:
        raise DomainError(f"dmax must be positive, got {dmax}")
    r = pair_distances(x)
    counts, edges = np.histogram(r, bins=bins, range=(0.0, dmax))
    rmin = float(r.min())
    return DistanceHistogram(
        edges=edges, counts=counts, reference=tuple(rmin * dist for dist, _ in HEX_SHELLS)
    )


# ---------------------------------------------------------------- file format

def write_configuration(path, points):
    """Write a configuration file: header ``d N`` then one point per line."""
    x = check_configuration(points)
    n, dim = x.shape
    with open(path, "w") as fh:
        fh.write(f"{dim - 1} {n}\n")
        for row in x:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_configuration(path):
    """Read a configuration written by :func:`write_configuration`."""
    from .exceptions import ParseError

    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines()]
    if not lines or not lines[0].strip():
        raise ParseError("empty configuration file", 1)
    try:
        d, n = (int(t) for t in lines[0].split())
    except ValueError:
        raise ParseError(f"header must be 'd N', got {lines[0]!r}", 1) from None
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != d + 1:
            raise ParseError(f"expected {d + 1} coordinates, got {len(parts)}", lineno)
        try:
            rows.append([float(t) for t in parts])
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {line!r}", lineno) from None
    if len(rows) != n:
        raise ParseError(f"header promises {n} points, found {len(rows)}", len(lines))
    return check_configuration(np.array(rows), d=d)
