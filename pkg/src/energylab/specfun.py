"""Real-argument special functions in double precision.

Everything the energy constants need is evaluated here from elementary
operations: digamma, Pochhammer symbols, the Gauss hypergeometric function,
Riemann and Hurwitz zeta (Euler--Maclaurin), Hurwitz s-derivatives and
Stieltjes constants, the Dirichlet L-series of the character mod 3, the
Epstein zeta function of the hexagonal lattice and the generalized Bernoulli
coefficients of the circle expansion.

Gamma and log-gamma come from :mod:`math`, whose implementation is a Lanczos
approximation with reflection.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exceptions import DomainError, PoleError

__all__ = [
    "EULER_GAMMA",
    "AlphaCoefficients",
    "LaurentAtOne",
    "bernoulli_number",
    "gamma",
    "rgamma",
    "lgamma",
    "digamma",
    "pochhammer",
    "gauss_2f1",
    "riemann_zeta",
    "hurwitz_zeta",
    "hurwitz_zeta_s_derivative",
    "hurwitz_laurent_at_one",
    "stieltjes_gamma0",
    "stieltjes_gamma1",
    "dirichlet_L3",
    "dirichlet_L3_deriv0",
    "epstein_hex",
    "epstein_hex_deriv0",
    "gen_bernoulli_alpha",
    "lemma_identity_rhs",
]

EULER_GAMMA = 0.57721566490153286060651209

# Euler--Maclaurin uses B_2 .. B_12.
_EM_ORDER = 6
_SERIES_MAX_TERMS = 200_000


def _is_nonpositive_integer(x):
    return x <= 0 and x == math.floor(x)


@lru_cache(maxsize=None)
def _bernoulli_fractions(n_max):
    # sum_{k=0}^{m} C(m+1, k) B_k = 0, B_1 = -1/2 convention
    B = [Fraction(1)]
    for m in range(1, n_max + 1):
        acc = sum(math.comb(m + 1, k) * B[k] for k in range(m))
        B.append(-acc / (m + 1))
    return tuple(B)


def bernoulli_number(n):
    """Bernoulli number B_n as a float (B_1 = -1/2)."""
    if n < 0:
        raise DomainError(f"Bernoulli index must be >= 0, got {n}")
    return float(_bernoulli_fractions(max(n, 2))[n])


# B_{2j} / (2j)! for the Euler--Maclaurin tail
_EM_COEFFS = tuple(
    float(_bernoulli_fractions(2 * _EM_ORDER)[2 * j] / math.factorial(2 * j))
    for j in range(1, _EM_ORDER + 1)
)


def gamma(x):
    """Gamma function; raises :class:`PoleError` at nonpositive integers."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at x={x:g}", pole=x)
    return math.gamma(x)


def rgamma(x):
    """Reciprocal gamma function, entire; zero at the poles of gamma."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def lgamma(x):
    """log|Gamma(x)|."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"log-gamma has a pole at x={x:g}", pole=x)
    return math.lgamma(x)


def digamma(x):
    """Digamma function psi(x) = Gamma'(x)/Gamma(x) for real x.

    Uses the reflection formula below 1/2, upward recurrence to x >= 10 and
    the asymptotic Bernoulli series there.

    Raises
    ------
    PoleError
        If ``x`` is zero or a negative integer.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"digamma argument must be finite, got {x}")
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma has a pole at x={x:g}", pole=x, residue=-1.0)
    if x < 0.5:
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    shift = []
    while x < 10.0:
        shift.append(1.0 / x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    B = _bernoulli_fractions(20)
    series = 0.0
    power = inv2
    for k in range(1, 10):
        series += float(B[2 * k]) / (2 * k) * power
        power *= inv2
    return math.log(x) - 0.5 / x - series - math.fsum(shift)


def pochhammer(z, k):
    """Rising factorial (z)_k = z (z+1) ... (z+k-1), with (z)_0 = 1."""
    k = int(k)
    if k < 0:
        raise DomainError(f"Pochhammer length must be >= 0, got {k}")
    out = 1.0
    for i in range(k):
        out *= z + i
    return out


def _pochhammer_and_derivative(s, n):
    """(s)_n and d/ds (s)_n, the latter by the product rule (safe at s=0)."""
    value = 1.0
    deriv = 0.0
    for i in range(n):
        deriv = deriv * (s + i) + value
        value *= s + i
    return value, deriv


# ---------------------------------------------------------------- 2F1

def _hyp_series(a, b, c, z):
    term = 1.0
    total = 1.0
    small = 0
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        if abs(term) <= 1e-17 * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        if term == 0.0:
            return total
    raise DomainError(
        f"2F1({a}, {b}; {c}; {z}) series did not converge", "gauss-hypergeometric"
    )


def _hyp_terminating(n, b, c, z):
    # a = -n; any c that is a nonpositive integer must lie beyond the last term
    term = 1.0
    terms = [1.0]
    for k in range(n):
        if c + k == 0:
            raise DomainError(
                f"2F1(-{n}, {b}; {c}; z) has a zero denominator", "gauss-hypergeometric"
            )
        term *= (-n + k) * (b + k) / ((c + k) * (k + 1)) * z
        terms.append(term)
    return math.fsum(terms)


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric function 2F1(a, b; c; z) for real arguments.

    Regimes: terminating polynomial when ``a`` or ``b`` is a nonpositive
    integer; the Gauss sum at ``z = 1``; direct series for ``|z| <= 1/2``;
    the Pfaff transformation for ``-1 <= z < -1/2``; the ``1 - z`` connection
    formula for ``1/2 < z < 1`` when ``c - a - b`` is not an integer.

    Raises
    ------
    DomainError
        For ``|z| > 1``, a divergent value at ``z = 1`` or a nonpositive
        integer ``c`` reached before the series terminates.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        n = int(-min(x for x in (a, b) if _is_nonpositive_integer(x)))
        other = b if a == -n else a
        if abs(z) > 1.0:
            raise DomainError(f"|z| = {abs(z)} > 1", "gauss-hypergeometric")
        return _hyp_terminating(n, other, c, z)
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 undefined for c = {c:g}", "gauss-hypergeometric")
    if abs(z) > 1.0:
        raise DomainError(f"|z| = {abs(z)} > 1", "gauss-hypergeometric")
    if z == 1.0:
        if c - a - b <= 0:
            raise DomainError(
                f"2F1 diverges at z=1 when c-a-b = {c - a - b:g} <= 0",
                "gauss-hypergeometric",
            )
        return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)
    if -0.5 <= z <= 0.5:
        return _hyp_series(a, b, c, z)
    if z < -0.5:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * gauss_2f1(a, c - b, c, w)
    m = c - a - b
    if m == math.floor(m):
        if z > 0.9:
            raise DomainError(
                f"2F1 with integer c-a-b={m:g} near z=1 is not supported",
                "gauss-hypergeometric",
            )
        return _hyp_series(a, b, c, z)
    w = 1.0 - z
    first = gamma(c) * gamma(m) * rgamma(c - a) * rgamma(c - b)
    second = gamma(c) * gamma(-m) * rgamma(a) * rgamma(b)
    out = 0.0
    if first != 0.0:
        out += first * _hyp_series(a, b, 1.0 - m, w)
    if second != 0.0:
        out += second * w**m * _hyp_series(c - a, c - b, 1.0 + m, w)
    return out


# ---------------------------------------------------------------- zeta

def _em_shift(s, a):
    # shift a by M >= 10 so that a + M > |s| + 10
    return max(10, math.ceil(abs(s) + 10.0 - a) + 1)


def _em_tail(s, x):
    """Bernoulli correction sum of Euler--Maclaurin, value and s-derivative."""
    value = []
    deriv = []
    logx = math.log(x)
    for j, coeff in enumerate(_EM_COEFFS, start=1):
        p, dp = _pochhammer_and_derivative(s, 2 * j - 1)
        power = x ** (-s - 2 * j + 1)
        value.append(coeff * p * power)
        deriv.append(coeff * power * (dp - logx * p))
    return math.fsum(value), math.fsum(deriv)


def _bernoulli_polynomial(n, x):
    B = _bernoulli_fractions(max(n, 2))
    return math.fsum(math.comb(n, k) * float(B[k]) * x ** (n - k) for k in range(n + 1))


def _check_hurwitz_args(s, a):
    if not (a > 0):
        raise DomainError(f"Hurwitz zeta needs a > 0, got a={a}", "hurwitz-zeta")
    if s == 1.0:
        raise PoleError(
            "Hurwitz zeta has a pole at s=1", pole=1.0, residue=1.0, anchor="hurwitz-zeta"
        )


def hurwitz_zeta(s, a):
    """Hurwitz zeta function zeta(s, a) = sum_k (k + a)^(-s), continued in s.

    Euler--Maclaurin summation after shifting ``a`` by ``M >= 10`` so that
    ``a + M > |s| + 10``, with Bernoulli corrections through B_12.
    """
    s, a = float(s), float(a)
    _check_hurwitz_args(s, a)
    if s <= 0 and s == math.floor(s):
        # zeta(-n, a) = -B_{n+1}(a) / (n + 1)
        n = int(-s)
        return -_bernoulli_polynomial(n + 1, a) / (n + 1)
    M = _em_shift(s, a)
    x = a + M
    head = math.fsum((a + k) ** (-s) for k in range(M))
    tail, _ = _em_tail(s, x)
    return head + math.fsum((x ** (1.0 - s) / (s - 1.0), 0.5 * x ** (-s), tail))


def hurwitz_zeta_s_derivative(s0, a):
    """Partial derivative d/ds zeta(s, a) at ``s = s0``.

    Every Euler--Maclaurin term is elementary in ``s`` and is differentiated
    analytically.
    """
    s, a = float(s0), float(a)
    _check_hurwitz_args(s, a)
    M = _em_shift(s, a)
    x = a + M
    logx = math.log(x)
    head = math.fsum(-math.log(a + k) * (a + k) ** (-s) for k in range(M))
    _, dtail = _em_tail(s, x)
    u = s - 1.0
    integral = -(x ** (1.0 - s)) * (logx / u + 1.0 / (u * u))
    return head + math.fsum((integral, -0.5 * logx * x ** (-s), dtail))


def _regular_part(s, a):
    """zeta(s, a) - 1/(s - 1) and its s-derivative; smooth through s = 1."""
    s, a = float(s), float(a)
    if not (a > 0):
        raise DomainError(f"Hurwitz zeta needs a > 0, got a={a}", "hurwitz-zeta")
    M = _em_shift(s, a)
    x = a + M
    L = math.log(x)
    u = s - 1.0
    head = math.fsum((a + k) ** (-s) for k in range(M))
    dhead = math.fsum(-math.log(a + k) * (a + k) ** (-s) for k in range(M))
    t = -u * L
    # (x^(1-s) - 1)/(s - 1) and its derivative, via series when u*L is small
    if abs(t) < 0.5:
        # g = sum_{n>=1} (-L)^n u^(n-1)/n!, dg = sum_{n>=2} (n-1)(-L)^n u^(n-2)/n!
        g = -L
        dg = 0.0
        c = -L
        for n in range(2, 40):
            c *= -L / n
            g += c * u ** (n - 1)
            dg += (n - 1) * c * u ** (n - 2)
    else:
        e = math.expm1(t)
        g = e / u
        dg = (-L * (e + 1.0) * u - e) / (u * u)
    tail, dtail = _em_tail(s, x)
    value = head + math.fsum((g, 0.5 * x ** (-s), tail))
    deriv = dhead + math.fsum((dg, -0.5 * L * x ** (-s), dtail))
    return value, deriv


@dataclass(frozen=True)
class LaurentAtOne:
    """First two Stieltjes constants of zeta(s, a) about s = 1.

    zeta(s, a) = 1/(s-1) + gamma0 - gamma1 (s-1) + O((s-1)^2)
    """

    a: float
    gamma0: float
    gamma1: float


def hurwitz_laurent_at_one(a):
    """Return :class:`LaurentAtOne` for ``0 < a``."""
    value, deriv = _regular_part(1.0, a)
    return LaurentAtOne(a=float(a), gamma0=value, gamma1=-deriv)


def stieltjes_gamma0(a):
    """gamma_0(a) = lim_{s->1} [zeta(s, a) - 1/(s-1)] = -psi(a)."""
    return _regular_part(1.0, a)[0]


def stieltjes_gamma1(a):
    """Generalized Stieltjes constant gamma_1(a).

    Convention: the coefficient of (1-s) in the Laurent expansion of
    zeta(s, a) about s = 1 is gamma_1(a). The pole is subtracted analytically
    from the Euler--Maclaurin representation, so the derivative is taken
    exactly at s = 1 with no cancellation.
    """
    return -_regular_part(1.0, a)[1]


def riemann_zeta(s):
    """Riemann zeta function for real ``s != 1``.

    Exact Bernoulli values at nonpositive integers, the functional equation
    for ``s < -1/2`` and Euler--Maclaurin otherwise.
    """
    s = float(s)
    if s == 1.0:
        raise PoleError("zeta has a pole at s=1", pole=1.0, residue=1.0, anchor="riemann-zeta")
    if s <= 0 and s == math.floor(s):
        n = int(-s)
        if n == 0:
            return -0.5
        if n % 2 == 0:
            return 0.0
        return -bernoulli_number(n + 1) / (n + 1)
    if s < -0.5:
        return (
            2.0**s
            * math.pi ** (s - 1.0)
            * math.sin(0.5 * math.pi * s)
            * math.gamma(1.0 - s)
            * hurwitz_zeta(1.0 - s, 1.0)
        )
    return hurwitz_zeta(s, 1.0)


# ---------------------------------------------------------------- L-series, Epstein

def dirichlet_L3(s):
    """L-series of the nonprincipal character mod 3, 1 - 2^-s + 4^-s - 5^-s + ...

    Continued to all real ``s`` through 3^-s [zeta(s, 1/3) - zeta(s, 2/3)];
    the poles of the two Hurwitz terms cancel at ``s = 1``.
    """
    s = float(s)
    r1, _ = _regular_part(s, 1.0 / 3.0)
    r2, _ = _regular_part(s, 2.0 / 3.0)
    return 3.0 ** (-s) * (r1 - r2)


def dirichlet_L3_deriv0():
    """L'(0) for the character mod 3, from Hurwitz s-derivatives at s = 0."""
    third = 1.0 / 3.0
    return (
        -math.log(3.0) * dirichlet_L3(0.0)
        + hurwitz_zeta_s_derivative(0.0, third)
        - hurwitz_zeta_s_derivative(0.0, 2.0 * third)
    )


HEX_POLE_RESIDUE = 4.0 * math.pi / math.sqrt(3.0)


def epstein_hex(s, pole_tol=1e-6):
    """Epstein zeta function of the unit hexagonal lattice.

    Meromorphic continuation 6 zeta(s/2) L(s/2) of the lattice sum over
    nonzero points |x|^-s, with a simple pole at s = 2.
    """
    s = float(s)
    if abs(s - 2.0) <= pole_tol:
        raise PoleError(
            f"hexagonal Epstein zeta has a pole at s=2 (got s={s})",
            pole=2.0,
            residue=HEX_POLE_RESIDUE,
            anchor="hexagonal-epstein-zeta",
        )
    return 6.0 * riemann_zeta(0.5 * s) * dirichlet_L3(0.5 * s)


def epstein_hex_deriv0():
    """Derivative of the hexagonal Epstein zeta function at s = 0."""
    zeta0 = riemann_zeta(0.0)
    dzeta0 = hurwitz_zeta_s_derivative(0.0, 1.0)
    return 3.0 * dzeta0 * dirichlet_L3(0.0) + 3.0 * zeta0 * dirichlet_L3_deriv0()


# ---------------------------------------------------------------- circle expansion coefficients

@dataclass(frozen=True)
class AlphaCoefficients:
    """Taylor coefficients of (sin(pi z)/(pi z))^(-s) in powers of z^2."""

    s: float
    values: tuple

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)


def gen_bernoulli_alpha(s, p):
    """alpha_0(s) .. alpha_p(s) of the circle energy expansion.

    The generalized Bernoulli values B_{2n}^{(s)}(s/2) are generated by their
    standard recurrence seeded with 1, then
    alpha_n = (-1)^n B_{2n}^{(s)}(s/2) (2 pi)^{2n} / (2n)!.
    """
    p = int(p)
    if p < 0:
        raise DomainError(f"order p must be >= 0, got {p}")
    s = float(s)
    B = _bernoulli_fractions(max(2 * p + 2, 2))
    gb = [1.0]
    for n in range(1, p + 1):
        acc = math.fsum(
            math.comb(2 * n - 1, 2 * m + 1) * float(B[2 * m + 2]) / (2 * m + 2) * gb[n - 1 - m]
            for m in range(n)
        )
        gb.append(-s * acc)
    two_pi = 2.0 * math.pi
    values = tuple(
        (-1) ** n * gb[n] * two_pi ** (2 * n) / math.factorial(2 * n) for n in range(p + 1)
    )
    return AlphaCoefficients(s=s, values=values)


def lemma_identity_rhs(m, z):
    """(1 - z)_m / (m! m), the closed form of a digamma-weighted binomial sum."""
    m = int(m)
    if m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    z = float(z)
    if z < 0 and z == math.floor(z):
        raise PoleError(f"z must not be a negative integer, got {z:g}", pole=z)
    return pochhammer(1.0 - z, m) / (math.factorial(m) * m)
