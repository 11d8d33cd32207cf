import math

import numpy as np
import pytest
from sklearn.base import clone

from energylab import energy as en
from energylab import optimize as op
from energylab.exceptions import DomainError, StagnationError, UnsupportedCaseError

LOG = en.EnergyKind.log()


# ---------------------------------------------------------------- starts

def test_init_random_deterministic():
    a = op.init_random(50, 3, 17)
    b = op.init_random(50, 3, 17)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, op.init_random(50, 3, 18))
    assert np.max(np.abs(np.linalg.norm(a, axis=1) - 1)) <= 1e-15


def test_init_random_mean():
    x = op.init_random(1000, 2, 0)
    assert np.linalg.norm(x.mean(axis=0)) <= 0.1


def test_init_spiral():
    x = op.init_spiral(2)
    assert x[:, 2] == pytest.approx([0.5, -0.5], abs=1e-15)
    assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1)) <= 1e-15
    with pytest.raises(UnsupportedCaseError):
        op.init_spiral(10, d=3)


def test_spiral_beats_median_random():
    spiral = en.log_energy(op.init_spiral(100))
    randoms = [en.log_energy(op.init_random(100, 2, k)) for k in range(21)]
    assert spiral < np.median(randoms)


# ---------------------------------------------------------------- settings

def test_settings_validation():
    for bad in (dict(grad_tol=0.0), dict(restarts=0), dict(c1=1.0), dict(backtrack=0.0),
                dict(max_iters=-1), dict(threads=0)):
        with pytest.raises(DomainError):
            op.OptimizerSettings(**bad)
    st = op.OptimizerSettings()
    assert st.restarts_for(100) == 16 and st.restarts_for(101) == 4
    assert op.OptimizerSettings(restarts=3).restarts_for(500) == 3


# ---------------------------------------------------------------- minimize

def test_minimize_antipodal():
    res = op.minimize(op.init_random(2, 2, 3), LOG)
    assert res.converged
    assert res.energy == pytest.approx(-2 * math.log(2), abs=1e-10)


@pytest.mark.parametrize("n,want", [(4, -6 * math.log(8 / 3)), (6, -18 * math.log(2))])
def test_multistart_known_optima(n, want):
    res = op.multistart(n, 2, LOG, op.OptimizerSettings(restarts=8))
    assert abs(res.energy - want) <= 1e-8


def test_minimize_trace_monotone():
    res = op.minimize(op.init_random(30, 2, 1), en.EnergyKind.riesz(1.0))
    energies = [e for _, e, _ in res.trace]
    assert all(b <= a for a, b in zip(energies, energies[1:]))
    assert res.converged and res.grad_norm <= 1e-9
    assert res.iterations == len(res.trace) - 1


def test_minimize_energy_consistent():
    kind = en.EnergyKind.riesz(2.0)
    res = op.minimize(op.init_random(25, 2, 2), kind)
    assert res.energy == pytest.approx(en.riesz_energy(res.config, 2.0), rel=1e-12)
    assert res.trace[-1][1] == pytest.approx(res.energy, rel=1e-12)


def test_minimize_max_iters():
    res = op.minimize(op.init_random(30, 2, 1), LOG, op.OptimizerSettings(max_iters=3))
    assert res.iterations == 3 and not res.converged


def test_maximize_negative_s():
    kind = en.EnergyKind.riesz(-1.0)
    res = op.minimize(op.init_random(20, 2, 5), kind)
    energies = [e for _, e, _ in res.trace]
    assert all(b >= a for a, b in zip(energies, energies[1:]))
    for k in range(20):
        assert res.energy >= en.riesz_energy(op.init_random(20, 2, 100 + k), -1.0)


def test_coincident_start_is_separated():
    x = op.init_random(10, 2, 0)
    x[1] = x[0]
    res = op.minimize(x, LOG, op.OptimizerSettings(max_iters=50))
    assert en.pair_distances(res.config).min() > 1e-3


def test_circle_optimum():
    for n in (5, 9, 12):
        res = op.multistart(n, 1, LOG, op.OptimizerSettings(restarts=4))
        assert abs(res.energy + n * math.log(n)) <= 1e-8


def test_higher_dimension():
    # Five points on S^3 settle at the regular simplex.
    res = op.multistart(5, 3, LOG, op.OptimizerSettings(restarts=4))
    r = en.pair_distances(res.config)
    assert np.ptp(r) <= 1e-6
    assert r[0] == pytest.approx(math.sqrt(2 + 2 / 4), rel=1e-6)


def test_stagnation_carries_best(monkeypatch):
    monkeypatch.setattr(op, "MAX_BACKTRACKS", 0)
    with pytest.raises(StagnationError) as info:
        op.minimize(op.init_random(10, 2, 0), LOG)
    assert isinstance(info.value.best, op.OptimizationResult)


def test_multistart_all_fail(monkeypatch):
    monkeypatch.setattr(op, "MAX_BACKTRACKS", 0)
    with pytest.raises(StagnationError):
        op.multistart(10, 2, LOG, op.OptimizerSettings(restarts=2))


# ---------------------------------------------------------------- multistart

def test_multistart_icosahedron():
    res = op.multistart(12, 2, en.EnergyKind.riesz(1.0), op.OptimizerSettings(restarts=8))
    assert res.energy == pytest.approx(98.33050611525759, abs=1e-8)
    r = np.linalg.norm(res.config[:, None] - res.config[None], axis=2)
    np.fill_diagonal(r, np.inf)
    near = np.sort(r, axis=1)[:, :5]
    assert np.ptp(near) <= 1e-6


def test_multistart_is_best_of_restarts():
    st = op.OptimizerSettings(restarts=4, seed=9, grad_tol=1e-7)
    best = op.multistart(20, 2, LOG, st)
    seeds = np.random.SeedSequence(9).spawn(4)
    for i in range(4):
        start = op._start(20, 2, i, seeds[i])
        single = op.minimize(start, LOG, st, restart_index=i)
        assert best.energy <= single.energy


def test_multistart_deterministic_and_threaded():
    st = op.OptimizerSettings(restarts=4, seed=3, grad_tol=1e-7)
    a = op.multistart(15, 2, LOG, st)
    b = op.multistart(15, 2, LOG, st)
    c = op.multistart(15, 2, LOG, op.OptimizerSettings(restarts=4, seed=3, grad_tol=1e-7, threads=4))
    assert a.energy == b.energy == c.energy
    assert a.restart_index == c.restart_index
    assert np.array_equal(a.config, c.config)


def test_multistart_consensus_n5():
    energies = [op.multistart(5, 2, LOG, op.OptimizerSettings(restarts=8, seed=s)).energy for s in range(3)]
    assert np.ptp(energies) <= 1e-8


def test_separation_warning(monkeypatch):
    monkeypatch.setattr(op.theory, "best_packing_cinf", lambda d: 100.0)
    with pytest.warns(RuntimeWarning, match="separation floor"):
        op.multistart(6, 2, LOG, op.OptimizerSettings(restarts=1))


def test_default_threads(monkeypatch):
    monkeypatch.delenv("ENERGY_LAB_THREADS", raising=False)
    assert op.default_threads() == 1
    monkeypatch.setenv("ENERGY_LAB_THREADS", "3")
    assert op.default_threads() == 3
    monkeypatch.setenv("ENERGY_LAB_THREADS", "many")
    with pytest.raises(DomainError):
        op.default_threads()


def test_smale_gap():
    res = op.multistart(4, 2, LOG, op.OptimizerSettings(restarts=2))
    lead = (0.5 - math.log(2)) * 16 - 0.5 * 4 * math.log(4)
    assert op.smale_gap(res) == pytest.approx((res.energy - lead) / 4, rel=1e-12)


# ---------------------------------------------------------------- estimator

def test_estimator_fit_and_score():
    est = op.SphereEnergyMinimizer(n_points=6, restarts=4)
    assert est.get_params()["n_points"] == 6
    est.fit()
    assert est.energy_ == pytest.approx(-18 * math.log(2), abs=1e-8)
    assert est.config_.shape == (6, 3)
    assert est.score() == pytest.approx(-est.energy_)
    other = clone(est).set_params(n_points=4)
    assert other.n_points == 4 and not hasattr(other, "result_")


def test_estimator_from_start_and_maximize():
    x = op.init_random(10, 2, 4)
    est = op.SphereEnergyMinimizer(n_points=10, kind="riesz", s=-1.0).fit(x)
    assert est.result_.converged
    assert est.score(x) < est.score()
    with pytest.raises(DomainError):
        op.SphereEnergyMinimizer(n_points=10, d=3).fit(x)
    with pytest.raises(DomainError):
        op.SphereEnergyMinimizer(kind="riesz").fit()
