"""Projected-gradient energy optimization on (S^d)^N with multistart.

Minimizes log and Riesz s-energies for s > 0 and maximizes for -2 < s < 0
(by descending on the negated energy). The Armijo test compares energy
differences evaluated pair by pair in a cancellation-free form, so descent
keeps making progress long after the absolute energy has stopped changing in
double precision.
"""
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from . import energy as en
from . import theory
from ._validation import check_configuration, check_positive_int, normalize_rows
from .exceptions import DomainError, StagnationError, UnsupportedCaseError

MAX_BACKTRACKS = 60
NEAR_COINCIDENT = 1e-9
COINCIDENT_NOISE = 1e-6
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class OptimizerSettings:
    """Stopping rule, restart budget and line-search parameters.

    ``restarts=None`` picks 16 restarts for N <= 100 and 4 otherwise.
    ``grad_tol`` bounds the largest per-point tangential gradient norm.
    """

    max_iters: int = 20000
    grad_tol: float = 1e-9
    restarts: int = None
    seed: int = 0
    c1: float = 1e-4
    backtrack: float = 0.5
    threads: int = 1

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise DomainError(f"grad_tol must be positive, got {self.grad_tol}")
        check_positive_int(self.max_iters, "max_iters", minimum=0)
        if self.restarts is not None:
            check_positive_int(self.restarts, "restarts")
        if not 0.0 < self.c1 < 1.0:
            raise DomainError(f"Armijo c1 must lie in (0, 1), got {self.c1}")
        if not 0.0 < self.backtrack < 1.0:
            raise DomainError(f"backtrack factor must lie in (0, 1), got {self.backtrack}")
        check_positive_int(self.threads, "threads")

    def restarts_for(self, n):
        if self.restarts is not None:
            return self.restarts
        return 16 if n <= 100 else 4


@dataclass
class OptimizationResult:
    """Outcome of one optimization run.

    ``energy`` is recomputed with the reference summation of
    :mod:`energylab.energy`. ``trace`` holds (iteration, energy, grad_norm).
    """

    config: np.ndarray
    energy: float
    iterations: int
    grad_norm: float
    restart_index: int = 0
    converged: bool = False
    trace: list = field(default_factory=list, repr=False)


def init_random(n, d, seed):
    """N i.i.d. uniform points on S^d (normalized Gaussian vectors)."""
    n = check_positive_int(n, "N", minimum=2)
    d = theory.check_dim(d)
    rng = np.random.default_rng(seed)
    return normalize_rows(rng.standard_normal((n, d + 1)))


def init_spiral(n, d=2):
    """Generalized spiral points on S^2: equal height steps, golden-angle azimuth."""
    n = check_positive_int(n, "N", minimum=2)
    if d != 2:
        raise UnsupportedCaseError(f"spiral start is defined for d=2 only, got d={d}")
    k = np.arange(n)
    z = 1.0 - (2.0 * k + 1.0) / n
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = GOLDEN_ANGLE * k
    return normalize_rows(np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z]))


def grad_sup_norm(g):
    return float(np.sqrt(np.max(np.einsum("ij,ij->i", g, g))))


_SPLITTER = 134217729.0  # 2^27 + 1


def _log_sq_norm(x):
    """log |x_j|^2 per row, accurate for rows within rounding of the unit sphere."""
    t = _SPLITTER * x
    hi = t - (t - x)
    lo = x - hi
    # hi*hi, 2*hi*lo and lo*lo are exact; a compensated sum then gives
    # |x|^2 - 1 to full precision.
    total = np.full(x.shape[0], -1.0)
    comp = np.zeros(x.shape[0])
    for term in np.concatenate([hi * hi, 2.0 * hi * lo, lo * lo], axis=1).T:
        new = total + term
        back = new - total
        comp += (total - (new - back)) + (term - back)
        total = new
    return np.log1p(total + comp)


class _PairIncrement:
    """Accurate energy change between two nearby configurations.

    Distances are measured between the normalized directions, so the rounding
    left by renormalization does not show up as spurious energy changes.
    """

    def __init__(self, n, kind):
        self.j, self.k = np.triu_indices(n, 1)
        self.kind = kind
        self.x = None

    def prepare(self, x):
        """Cache pair data of the current iterate ``x``."""
        self.x = x
        self.diff = x[self.j] - x[self.k]
        self.r2 = np.einsum("ij,ij->i", self.diff, self.diff)
        self.lognorm = _log_sq_norm(x)
        if self.kind.tag == "riesz":
            self.weight = 2.0 * self.r2 ** (-0.5 * self.kind.s)

    def __call__(self, x_new):
        j, k = self.j, self.k
        move = x_new - self.x
        delta = move[j] - move[k]
        u = (2.0 * np.einsum("ij,ij->i", self.diff, delta) + np.einsum("ij,ij->i", delta, delta)) / self.r2
        if np.any(u <= -1.0):
            return math.inf
        c = _log_sq_norm(x_new) - self.lognorm
        lu = np.log1p(u) - 0.5 * (c[j] + c[k])
        if self.kind.tag == "log":
            return -float(np.sum(lu))
        return float(np.sum(self.weight * np.expm1(-0.5 * self.kind.s * lu)))


def _separate_coincident(x, rng):
    r = en.pair_distances(x)
    if r.min() >= NEAR_COINCIDENT:
        return x
    noise = en.tangent_project(x, rng.standard_normal(x.shape))
    size = np.linalg.norm(noise, axis=1)
    # Redraw rows whose draw was (nearly) radial.
    while np.any(size < 0.1):
        bad = size < 0.1
        noise[bad] = en.tangent_project(x[bad], rng.standard_normal((int(bad.sum()), x.shape[1])))
        size = np.linalg.norm(noise, axis=1)
    return normalize_rows(x + COINCIDENT_NOISE * noise / size[:, None])


def minimize(start, kind, settings=None, restart_index=0):
    """Run projected gradient descent from ``start``.

    Returns
    -------
    OptimizationResult
        ``converged`` is True when the gradient sup-norm reached ``grad_tol``.

    Raises
    ------
    StagnationError
        If the line search fails after 60 backtracks; ``best`` holds the last
        accepted iterate.
    """
    st = settings or OptimizerSettings()
    x = check_configuration(start, copy=True)
    x = _separate_coincident(x, np.random.default_rng(st.seed))
    sign = -1.0 if kind.maximize else 1.0
    increment = _PairIncrement(x.shape[0], kind)

    f = en.energy(x, kind)
    g = sign * en.energy_gradient(x, kind)
    gnorm = grad_sup_norm(g)
    trace = [(0, f, gnorm)]
    step = 0.1 / max(gnorm, 1e-300)
    x_prev = g_prev = None
    it = 0

    def result(converged):
        return OptimizationResult(
            config=x.copy(),
            energy=en.energy(x, kind),
            iterations=it,
            grad_norm=gnorm,
            restart_index=restart_index,
            converged=converged,
            trace=trace,
        )

    while gnorm > st.grad_tol and it < st.max_iters:
        if x_prev is not None:
            sx = x - x_prev
            sy = g - g_prev
            curv = abs(float(np.vdot(sx, sy)))
            if curv > 0:
                step = float(np.vdot(sx, sx)) / curv
        # Never move a point more than 0.5 rad in one step.
        step = min(step, 0.5 / gnorm)
        g2 = float(np.vdot(g, g))
        increment.prepare(x)
        for _ in range(MAX_BACKTRACKS):
            x_new = normalize_rows(x - step * g)
            change = sign * increment(x_new)
            if change <= -st.c1 * step * g2:
                break
            step *= st.backtrack
        else:
            raise StagnationError(
                f"line search failed after {MAX_BACKTRACKS} backtracks at iteration {it}",
                best=result(False),
            )
        x_prev, g_prev = x, g
        x = x_new
        f = f + sign * change
        g = sign * en.energy_gradient(x, kind)
        gnorm = grad_sup_norm(g)
        it += 1
        trace.append((it, f, gnorm))
    return result(gnorm <= st.grad_tol)


def _start(n, d, index, seq):
    if d == 2 and index == 0:
        return init_spiral(n)
    return init_random(n, d, seq)


def _check_separation(res, d):
    n = res.config.shape[0]
    if d != 2 or n > 500:
        return
    floor = 0.5 * theory.best_packing_cinf(2) / math.sqrt(n)
    rmin = float(en.pair_distances(res.config).min())
    if rmin < floor:
        warnings.warn(
            f"minimal distance {rmin:.4g} below separation floor {floor:.4g} for N={n}",
            RuntimeWarning,
            stacklevel=3,
        )


def multistart(n, d, kind, settings=None):
    """Best of several :func:`minimize` runs from spiral (d=2) and random starts.

    Restart seeds are spawned from ``settings.seed``; the winner is the lowest
    energy (highest for s < 0), ties going to the smaller restart index.
    """
    st = settings or OptimizerSettings()
    n = check_positive_int(n, "N", minimum=2)
    d = theory.check_dim(d)
    count = st.restarts_for(n)
    seeds = np.random.SeedSequence(st.seed).spawn(count)

    def run(i):
        run_settings = replace(st, seed=int(seeds[i].generate_state(1)[0]))
        try:
            return minimize(_start(n, d, i, seeds[i]), kind, run_settings, restart_index=i)
        except StagnationError as exc:
            return exc

    if st.threads > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=st.threads) as pool:
            outcomes = list(pool.map(run, range(count)))
    else:
        outcomes = [run(i) for i in range(count)]

    results = [r for r in outcomes if isinstance(r, OptimizationResult)]
    if not results:
        raise outcomes[0]
    sign = -1.0 if kind.maximize else 1.0
    best = min(results, key=lambda r: (sign * r.energy, r.restart_index))
    _check_separation(best, d)
    return best


def default_threads():
    """Thread count from the ENERGY_LAB_THREADS environment variable (default 1)."""
    value = os.environ.get("ENERGY_LAB_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        raise DomainError(f"ENERGY_LAB_THREADS must be an integer, got {value!r}") from None


def smale_gap(result, d=2):
    """Log-energy excess over the lower-bound scale V_log N^2 - (1/d) N log N.

    A diagnostic for how far a configuration is from the asymptotic optimum;
    reported per point.
    """
    n = result.config.shape[0]
    lead = theory.v_log_sphere(d) * n * n - n * math.log(n) / d
    return (result.energy - lead) / n


class SphereEnergyMinimizer(BaseEstimator):
    """Estimator wrapper around :func:`multistart` / :func:`minimize`.

    Parameters
    ----------
    n_points : int
    d : int
    kind : {"log", "riesz"}
    s : float, optional
        Riesz exponent.
    restarts, seed, grad_tol, max_iters, threads
        See :class:`OptimizerSettings`.

    Attributes
    ----------
    result_ : OptimizationResult
    config_ : ndarray of shape (n_points, d + 1)
    energy_ : float
    """

    def __init__(self, n_points=10, d=2, kind="log", s=None, restarts=None, seed=0,
                 grad_tol=1e-9, max_iters=20000, threads=1):
        self.n_points = n_points
        self.d = d
        self.kind = kind
        self.s = s
        self.restarts = restarts
        self.seed = seed
        self.grad_tol = grad_tol
        self.max_iters = max_iters
        self.threads = threads

    def _energy_kind(self):
        return en.EnergyKind(self.kind, None if self.kind == "log" else self.s)

    def _settings(self):
        return OptimizerSettings(max_iters=self.max_iters, grad_tol=self.grad_tol,
                                 restarts=self.restarts, seed=self.seed, threads=self.threads)

    def fit(self, X=None, y=None):
        """Optimize from ``X`` if given, otherwise by multistart."""
        kind = self._energy_kind()
        if X is None:
            self.result_ = multistart(self.n_points, self.d, kind, self._settings())
        else:
            X = check_configuration(X, d=self.d)
            self.result_ = minimize(X, kind, self._settings())
        self.config_ = self.result_.config
        self.energy_ = self.result_.energy
        return self

    def score(self, X=None, y=None):
        """Negated energy of ``X`` (or of the fitted configuration); higher is better."""
        kind = self._energy_kind()
        x = self.config_ if X is None else check_configuration(X, d=self.d)
        sign = -1.0 if kind.maximize else 1.0
        return -sign * en.energy(x, kind)
