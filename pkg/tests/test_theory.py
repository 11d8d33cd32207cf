import math

import numpy as np
import pytest
from scipy import integrate

from energylab import specfun as sf
from energylab import theory as th
from energylab.exceptions import DomainError, PoleError, UnsupportedCaseError

C_LOG_2 = -0.05560530494339251850
C_2_2 = -0.08576841030090248365


def ratio(d):
    return math.gamma((d + 1) / 2) / (math.sqrt(math.pi) * math.gamma(d / 2))


def quad(f, a, b, **kw):
    val, _ = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=400, **kw)
    return val


# ---------------------------------------------------------------- continuous energies

def test_v_log_sphere():
    assert th.v_log_sphere(2) == pytest.approx(0.5 - math.log(2), abs=1e-15)
    assert abs(th.v_log_sphere(1)) <= 1e-15
    assert th.v_log_sphere(4) == pytest.approx(-math.log(2) + 5 / 12, abs=1e-15)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_v_log_sphere_against_quadrature(d):
    # Energy of sigma_d: integrate -log|x - y| against the height density of y.
    f = lambda t: -0.5 * math.log(2 - 2 * t) * ratio(d) * (1 - t * t) ** (d / 2 - 1)
    assert th.v_log_sphere(d) == pytest.approx(quad(f, -1, 1), abs=1e-10)


@pytest.mark.parametrize("d", [1, 2, 3, 6])
def test_v_log_is_derivative_of_v_s(d):
    h = 1e-4
    slope = (th.v_s_sphere(h, d) - th.v_s_sphere(-h, d)) / (2 * h)
    assert slope == pytest.approx(th.v_log_sphere(d), abs=1e-8)


def test_v_s_sphere_d2_identity():
    rng = np.random.default_rng(7)
    samples = np.concatenate([rng.uniform(-2, 2, 25), rng.uniform(2, 4, 25)])
    for s in samples:
        if abs(s - 2) < 1e-3:
            continue
        assert th.v_s_sphere(s, 2) == pytest.approx(2 ** (1 - s) / (2 - s), rel=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 7])
def test_v_s_sphere_at_zero(d):
    assert th.v_s_sphere(0.0, d) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("s,d", [(0.5, 3), (1.5, 4), (-1.2, 5), (2.5, 3)])
def test_v_s_sphere_against_quadrature(s, d):
    # Endpoint powers (1+t)^(d/2-1) (1-t)^(d/2-1-s/2) go into the quadrature weight.
    want = quad(lambda t: 2 ** (-s / 2) * ratio(d), -1, 1, weight="alg", wvar=(d / 2 - 1, d / 2 - 1 - s / 2))
    assert th.v_s_sphere(s, d) == pytest.approx(want, rel=1e-9)


def test_v_s_sphere_poles():
    with pytest.raises(PoleError) as info:
        th.v_s_sphere(2.0, 2)
    assert info.value.residue == pytest.approx(-0.5, rel=1e-15)
    with pytest.raises(PoleError):
        th.v_s_sphere(5.0 + 1e-8, 3)
    # Even d: only finitely many poles, s = 6 is regular for d = 4.
    assert math.isfinite(th.v_s_sphere(8.0, 4))


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_residue_equals_minus_d_f(d):
    assert th.v_s_residue(d, 0) == pytest.approx(-d * th.F(d), rel=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_residue_limit_decimal_steps(d):
    steps = [10.0**-k for k in range(4, 8)]
    got = th.residue_limit(d, steps)
    assert abs(got / th.v_s_residue(d, 0) - 1) <= 1e-6


@pytest.mark.parametrize("d,k", [(3, 1), (5, 2), (4, 1)])
def test_higher_residues(d, k):
    pole = d + 2 * k
    h = 1e-4
    sym = 0.5 * h * (th.v_s_sphere(pole + h, d, pole_tol=0) - th.v_s_sphere(pole - h, d, pole_tol=0))
    assert sym == pytest.approx(th.v_s_residue(d, k), rel=1e-7)
    assert th.v_s_residue(4, 2) == 0.0


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_a_d_limit_matches_closed_form(d):
    assert th.a_d_limit(d) == pytest.approx(th.a_d_closed(d), rel=1e-6)


def test_v_s_circle():
    assert th.v_s_circle(0.0) == 1.0
    assert th.v_s_circle(-1.0) == pytest.approx(4 / math.pi, rel=1e-15)
    want = quad(lambda t: abs(2 * math.sin(t / 2)) ** -0.5, 0, 2 * math.pi, points=[]) / (2 * math.pi)
    assert th.v_s_circle(0.5) == pytest.approx(want, abs=1e-10)
    with pytest.raises(PoleError):
        th.v_s_circle(3.0)


# ---------------------------------------------------------------- caps and exterior integrals

@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("rho", [0.3, 1.0, 1.7])
def test_cap_measure_against_quadrature(d, rho):
    want = quad(lambda t: ratio(d) * (1 - t * t) ** (d / 2 - 1), 1 - rho * rho / 2, 1)
    assert th.cap_measure(d, rho) == pytest.approx(want, abs=1e-10)


def test_cap_measure_examples():
    assert th.cap_measure(2, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert th.cap_measure(2, 1.3) == pytest.approx(1.3**2 / 4, rel=1e-14)
    with pytest.raises(DomainError):
        th.cap_measure(2, 2.5)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("rho", [0.5, 1.0, 1.6])
def test_exterior_integral_d_against_quadrature(d, rho):
    f = lambda t: (2 - 2 * t) ** (-d / 2) * ratio(d) * (1 - t * t) ** (d / 2 - 1)
    want = quad(f, -1, 1 - rho * rho / 2)
    assert th.exterior_integral_d(d, rho) == pytest.approx(want, abs=1e-8)


def test_exterior_integral_d_examples():
    assert th.exterior_integral_d(2, 1.0) == pytest.approx(0.5 * math.log(2), abs=1e-15)
    assert th.exterior_integral_d(2, 0.4) == pytest.approx(0.5 * math.log(2 / 0.4), abs=1e-14)
    with pytest.raises(DomainError):
        th.exterior_integral_d(2, 2.0)


@pytest.mark.parametrize("s,d", [(3.0, 2), (2.7, 2), (4.5, 3), (3.5, 3), (5.0, 4), (6.5, 5)])
@pytest.mark.parametrize("rho", [0.8, 1.3])
def test_exterior_integral_s_against_quadrature(s, d, rho):
    f = lambda t: (2 - 2 * t) ** (-s / 2) * ratio(d) * (1 - t * t) ** (d / 2 - 1)
    want = quad(f, -1, 1 - rho * rho / 2)
    assert th.exterior_integral_s(s, d, rho) == pytest.approx(want, abs=1e-8)


def test_exterior_integral_s_examples():
    assert th.exterior_integral_s(3.0, 2, 1.0) == pytest.approx(0.25, abs=1e-14)
    assert th.exterior_integral_s(3.0, 2, 1.99999) == pytest.approx(1 / (2 * 1.99999) - 0.25, abs=1e-12)
    with pytest.raises(UnsupportedCaseError):
        th.exterior_integral_s(4.0, 2, 1.0)
    with pytest.raises(DomainError):
        th.exterior_integral_s(1.5, 2, 1.0)


# ---------------------------------------------------------------- bounds

def test_hypersingular_constants_d2():
    s = 3.0
    assert th.hypersing_lower_A(s, 2) == pytest.approx(2 * 6**-1.5, rel=1e-14)
    assert th.hypersing_lower_A(s, 2) == pytest.approx(2 ** (-s / 2) * s ** (-s / 2) / (s / 2 - 1), rel=1e-14)
    assert th.hypersing_upper_U(s, 2) == pytest.approx(3 * math.sqrt(3) / 8, rel=1e-14)
    assert th.hypersing_upper_U(s, 2) == pytest.approx(2**-s * (s / (s - 2)) ** (s / 2), rel=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_hypersingular_ordering(d):
    for s in np.linspace(d + 0.05, d + 5.95, 40):
        if (s - d) / 2 == math.floor((s - d) / 2):
            continue
        assert th.hypersing_lower_A(s, d) < th.hypersing_upper_U(s, d)


def test_hypersingular_domain():
    with pytest.raises(DomainError):
        th.hypersing_lower_A(2.0, 2)
    with pytest.raises(UnsupportedCaseError):
        th.hypersing_lower_A(4.0, 2)
    with pytest.raises(DomainError):
        th.hypersing_upper_U(1.0, 2)


def test_boundary_c():
    assert th.boundary_c(2) == pytest.approx(0.25, abs=1e-15)
    assert th.boundary_c(3) == pytest.approx(2 * (7 + math.log(3 * math.pi / 1024)) / (3 * math.pi), rel=1e-14)
    assert th.boundary_c(1) == pytest.approx((1 + math.log(math.pi / 8)) / math.pi, rel=1e-13)
    assert all(th.boundary_c(d) > 0 for d in range(2, 12))


def test_log_interval_bounds():
    lo, hi = th.log_interval_bounds()
    assert lo == pytest.approx(-0.22553754, abs=1e-7)
    assert hi == pytest.approx(-0.0469945, abs=1e-7)
    assert lo < th.c_log_2() < hi


def test_wagner_cprime():
    assert th.wagner_cprime(2) == pytest.approx(9 / 8 - math.log(2), abs=1e-15)
    assert all(th.wagner_cprime(d) > 0 for d in range(2, 10))
    with pytest.raises(DomainError):
        th.wagner_cprime(1)


def test_best_packing():
    assert th.best_packing_cinf(1) == pytest.approx(1.0, rel=1e-15)
    assert th.best_packing_cinf(2) == pytest.approx(2 * 12**-0.25, rel=1e-14)
    assert th.best_packing_cinf(3) == pytest.approx(2 * (3 / (4 * math.sqrt(18))) ** (1 / 3), rel=1e-14)
    with pytest.raises(UnsupportedCaseError):
        th.best_packing_cinf(4)


# ---------------------------------------------------------------- conjectured constants

def test_csd_hex():
    assert th.csd_hex(0.0) == -1.0
    for s in (-1.5, -0.5, 0.5, 1.0, 1.9):
        assert th.csd_hex(s) < 0
    for s in (2.1, 3.0, 5.0):
        assert th.csd_hex(s) > 0
    assert th.csd_hex(4.0) == pytest.approx(0.75 * sf.epstein_hex(4.0), rel=1e-15)
    with pytest.raises(PoleError):
        th.csd_hex(2.0)


def test_squeeze_d2():
    for s in (2.5, 3.0, 3.5):
        mid = th.csd_hex(s) / (4 * math.pi) ** (s / 2)
        assert th.hypersing_lower_A(s, 2) <= mid <= th.hypersing_upper_U(s, 2)


def test_c_log_2_paths():
    assert th.c_log_2() == pytest.approx(C_LOG_2, abs=1e-13)
    assert th.c_log_d_formula(2) == pytest.approx(C_LOG_2, abs=1e-13)
    alt = sf.epstein_hex_deriv0() - 0.5 * math.log(math.sqrt(3) / (8 * math.pi))
    assert alt == pytest.approx(C_LOG_2, abs=1e-13)


def test_c_log_d_needs_lattice():
    with pytest.raises(UnsupportedCaseError):
        th.c_log_d_formula(3)
    fake = th.LatticeData(d=3, covolume=1.0, zeta_prime0=0.0)
    assert th.c_log_d_formula(3, fake) == pytest.approx(math.log(th.omega(3)) / 3)


def test_c_dd_2():
    assert th.c_dd_2() == pytest.approx(C_2_2, abs=1e-8)
    assert th.c_dd_2("limit") == pytest.approx(C_2_2, abs=1e-8)
    assert th.a_d_closed(2) == pytest.approx(math.log(2) / 2, abs=1e-15)
    assert th.v_s_residue(2, 0) == pytest.approx(-0.5)
    assert th.b_minus1_2() == pytest.approx(0.5, rel=1e-15)
    assert th.b_2_limit() == pytest.approx(th.b_2_closed(), abs=1e-8)


def test_circle_coefficient_consistency():
    for s in (-1.0, 0.5, 2.0):
        assert th.csd_circle(s) / (2 * math.pi) ** s == pytest.approx(
            2 * sf.riemann_zeta(s) / (2 * math.pi) ** s, rel=1e-15
        )


# ---------------------------------------------------------------- registry

def test_registry_roundtrip():
    c = th.get_constant("C_log_2")
    assert c.value == pytest.approx(C_LOG_2, abs=1e-13)
    assert c.anchor and c.domain
    assert th.get_constant("V_s", s=1.0, d=2).value == pytest.approx(1.0, rel=1e-15)
    assert th.get_constant("V_s_residue", d=2, k=0).value == pytest.approx(-0.5)


@pytest.mark.parametrize("name", sorted(th.CONSTANTS))
def test_registry_entries_evaluate(name):
    params = {"s": 3.0, "d": 2, "k": 0}
    if name in ("V_s", "C_s_hex", "zeta_hex"):
        params["s"] = 1.0
    if name in ("C_s_circle", "V_s_circle"):
        params["s"] = 0.5
    c = th.get_constant(name, **params)
    assert math.isfinite(c.value)


def test_registry_errors():
    with pytest.raises(DomainError):
        th.get_constant("nope")
    with pytest.raises(DomainError):
        th.get_constant("V_s", s=1.0)
    with pytest.raises(PoleError) as info:
        th.get_constant("V_s", s=2.0, d=2)
    assert "continuous-riesz-energy" in str(info.value)
