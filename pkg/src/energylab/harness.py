"""Verification pipeline: remainder sequences, bound checks, constant fits and reports.

Energies produced by the optimizer are approximations of the optimum from the
wrong side (upper bounds when minimizing), so every comparison with a
conjectured constant is reported as a discrepancy, never asserted as equality.
"""
import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import energy as en
from . import optimize as opt
from . import specfun as sf
from . import theory
from .exceptions import DomainError, ParseError

# Asymptotic bounds are only enforced from this N on.
ASYMPTOTIC_MIN_N = 100
IRLS_EPS = 1e-12
IRLS_MAX_ITERS = 100
FIT_MODELS = ("C", "C_const", "C_and_Dlog")
BEREZIN_MAX_SHELLS = len(en.HEX_SHELLS)


@dataclass(frozen=True)
class TableRow:
    n: int
    energy: float
    source: str = "computed"


@dataclass
class EnergyTable:
    """Rows of (N, energy, source) for one energy kind on S^d, N strictly increasing."""

    kind: en.EnergyKind
    d: int
    rows: list = field(default_factory=list)

    def __post_init__(self):
        self.d = theory.check_dim(self.d)
        rows = [r if isinstance(r, TableRow) else TableRow(*r) for r in self.rows]
        for prev, cur in zip(rows, rows[1:]):
            if cur.n <= prev.n:
                raise DomainError(f"N must be strictly increasing, got {prev.n} then {cur.n}")
        for r in rows:
            if r.n < 2:
                raise DomainError(f"N must be >= 2, got {r.n}")
            if not math.isfinite(r.energy):
                raise DomainError(f"energy for N={r.n} is not finite")
            if r.source not in ("computed", "ingested"):
                raise DomainError(f"row source must be 'computed' or 'ingested', got {r.source!r}")
        self.rows = rows

    @property
    def ns(self):
        return np.array([r.n for r in self.rows], dtype=np.float64)

    @property
    def energies(self):
        return np.array([r.energy for r in self.rows], dtype=np.float64)

    def __len__(self):
        return len(self.rows)

    def select(self, n_min=None, n_max=None):
        """Sub-table restricted to n_min <= N <= n_max."""
        keep = [r for r in self.rows
                if (n_min is None or r.n >= n_min) and (n_max is None or r.n <= n_max)]
        return EnergyTable(self.kind, self.d, keep)


# ---------------------------------------------------------------- tables

def circle_table(ns, kind):
    """Exact optimal energies on S^1 (N-th roots of unity)."""
    rows = []
    for n in ns:
        value = en.circle_exact_log(n) if kind.tag == "log" else en.circle_exact(kind.s, n)
        rows.append(TableRow(int(n), value))
    return EnergyTable(kind, 1, rows)


def optimizer_table(ns, d, kind, settings=None, threads=1):
    """Table of multistart energies; the N values are processed concurrently."""
    st = settings or opt.OptimizerSettings()

    def run(n):
        return opt.multistart(int(n), d, kind, st).energy

    ns = sorted(int(n) for n in ns)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(run, ns))
    else:
        values = [run(n) for n in ns]
    return EnergyTable(kind, d, [TableRow(n, e) for n, e in zip(ns, values)])


# ---------------------------------------------------------------- remainders

def leading_terms(kind, d, n):
    """Known leading part of the optimal energy, subtracted before normalizing."""
    n = float(n)
    if kind.tag == "log":
        return theory.v_log_sphere(d) * n * n - n * math.log(n) / d
    s = kind.s
    if s == d:
        return theory.F(d) * n * n * math.log(n)
    return theory.v_s_sphere(s, d) * n * n


def next_order_scale(kind, d, n):
    """Power of N multiplying the next-order constant."""
    n = float(n)
    if kind.tag == "log":
        return n
    if kind.s == d:
        return n * n
    return n ** (1.0 + kind.s / d)


def remainder_log(table):
    """[E - (V_log N^2 - (1/d) N log N)] / N per row."""
    if table.kind.tag != "log":
        raise DomainError(f"remainder_log needs a log table, got {table.kind}")
    return [(r.n, _remainder(table.kind, table.d, r.n, r.energy)) for r in table.rows]


def remainder_riesz(table, s=None):
    """Next-order remainder of a Riesz table.

    s < d and s > d: [E - V_s N^2] / N^(1+s/d); s = d: [E - F_d N^2 log N] / N^2.
    """
    if table.kind.tag != "riesz":
        raise DomainError(f"remainder_riesz needs a riesz table, got {table.kind}")
    if s is not None and float(s) != table.kind.s:
        raise DomainError(f"table has s={table.kind.s:g}, requested s={float(s):g}")
    return [(r.n, _remainder(table.kind, table.d, r.n, r.energy)) for r in table.rows]


def _remainder(kind, d, n, energy):
    return (energy - leading_terms(kind, d, n)) / next_order_scale(kind, d, n)


def remainders(table):
    return remainder_log(table) if table.kind.tag == "log" else remainder_riesz(table)


def conjectured_limit(kind, d):
    """Conjectured limit of the remainder sequence, or None if no conjecture applies.

    Returns a :class:`~energylab.theory.TheoryConstant`.
    """
    if kind.tag == "log":
        if d == 1:
            return theory.TheoryConstant("C_log_1", 0.0, "d = 1", "circle-log-energy-exact")
        if d == 2:
            return theory.get_constant("C_log_2")
        return None
    s = kind.s
    if d == 1:
        if s == 1.0:
            return None
        c = theory.get_constant("C_s_circle", s=s)
        return theory.TheoryConstant(
            "C_s_circle/(2pi)^s", c.value / (2.0 * math.pi) ** s, c.domain, c.anchor
        )
    if d == 2:
        if s == 2.0:
            return theory.get_constant("C_2_2")
        if -2.0 < s < 4.0:
            c = theory.get_constant("C_s_hex", s=s)
            return theory.TheoryConstant(
                "C_s_hex/(4pi)^(s/2)", c.value / (4.0 * math.pi) ** (s / 2), "-2 < s < 4, s != 2", c.anchor
            )
    return None


# ---------------------------------------------------------------- fitting

@dataclass
class FitResult:
    """Fitted next-order coefficients with the residuals of the fit."""

    model: str
    norm: str
    coefficients: dict
    residual_l1: float
    residual_l2: float
    n_rows: int

    def as_dict(self):
        return asdict(self)


def _design(kind, d, ns, model):
    if model not in FIT_MODELS:
        raise DomainError(f"unknown fit model {model!r}; use one of {FIT_MODELS}")
    lead = np.array([next_order_scale(kind, d, n) for n in ns])
    cols, names = [lead], ["C"]
    if model == "C_const":
        cols.append(np.ones_like(lead))
        names.append("const")
    elif model == "C_and_Dlog":
        cols += [np.log(ns), np.ones_like(lead)]
        names += ["D", "const"]
    return np.column_stack(cols), names


def _solve(design, y, norm):
    # Column scaling keeps the small normal systems well conditioned.
    scale = np.linalg.norm(design, axis=0)
    a = design / scale
    if np.linalg.matrix_rank(a) < a.shape[1]:
        raise DomainError("rank-deficient fit design; use more distinct N values or a smaller model")
    coef = np.linalg.lstsq(a, y, rcond=None)[0]
    if norm == "l1":
        for _ in range(IRLS_MAX_ITERS):
            w = 1.0 / np.sqrt(np.maximum(np.abs(y - a @ coef), IRLS_EPS))
            new = np.linalg.lstsq(a * w[:, None], y * w, rcond=None)[0]
            done = np.allclose(new, coef, rtol=1e-15, atol=0.0)
            coef = new
            if done:
                break
    elif norm != "l2":
        raise DomainError(f"norm must be 'l1' or 'l2', got {norm!r}")
    return coef / scale


def fit_constants(table, model="C", norm="l1"):
    """Fit next-order coefficients with the known leading terms held fixed.

    Models: ``"C"`` fits C in E = lead + C N^p; ``"C_const"`` adds a constant;
    ``"C_and_Dlog"`` adds D log N and a constant. N^p is N for log energy,
    N^(1+s/d) for Riesz s != d and N^2 for s = d.
    """
    ns, e = table.ns, table.energies
    design, names = _design(table.kind, table.d, ns, model)
    if len(ns) < design.shape[1] + 3:
        raise DomainError(
            f"model {model!r} needs at least {design.shape[1] + 3} rows, table has {len(ns)}"
        )
    y = e - np.array([leading_terms(table.kind, table.d, n) for n in ns])
    coef = _solve(design, y, norm)
    resid = y - design @ coef
    return FitResult(
        model=model,
        norm=norm,
        coefficients={k: float(v) for k, v in zip(names, coef)},
        residual_l1=float(np.sum(np.abs(resid))),
        residual_l2=float(np.sqrt(np.sum(resid * resid))),
        n_rows=len(ns),
    )


class AsymptoticExpansionRegressor(RegressorMixin, BaseEstimator):
    """Estimator form of :func:`fit_constants`.

    ``X`` holds point counts N (shape (n,) or (n, 1)), ``y`` the energies.

    Attributes
    ----------
    coef_ : dict
        Fitted coefficient per name.
    fit_ : FitResult
    """

    def __init__(self, d=2, kind="log", s=None, model="C", norm="l1"):
        self.d = d
        self.kind = kind
        self.s = s
        self.model = model
        self.norm = norm

    def _energy_kind(self):
        return en.EnergyKind(self.kind, None if self.kind == "log" else self.s)

    def fit(self, X, y):
        X, y = check_X_y(np.reshape(X, (-1, 1)), y, dtype=np.float64)
        order = np.argsort(X[:, 0])
        table = EnergyTable(
            self._energy_kind(), self.d,
            [TableRow(int(n), float(e)) for n, e in zip(X[order, 0], y[order])],
        )
        self.fit_ = fit_constants(table, self.model, self.norm)
        self.coef_ = self.fit_.coefficients
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        ns = check_array(np.reshape(X, (-1, 1)), dtype=np.float64)[:, 0]
        kind = self._energy_kind()
        design, names = _design(kind, self.d, ns, self.model)
        base = np.array([leading_terms(kind, self.d, n) for n in ns])
        return base + design @ np.array([self.coef_[k] for k in names])


# ---------------------------------------------------------------- bounds

@dataclass
class BoundCheck:
    """One bound evaluated at one row.

    ``value`` is compared with [lower, upper] (either may be None). Only an
    upper-side violation is ``hard``.
    """

    bound: str
    n: int
    value: float
    lower: float = None
    upper: float = None
    asymptotic: bool = False

    @property
    def lower_violated(self):
        return self.lower is not None and self.value < self.lower

    @property
    def upper_violated(self):
        return self.upper is not None and self.value > self.upper

    @property
    def hard(self):
        if not self.upper_violated:
            return False
        return not self.asymptotic or self.n >= ASYMPTOTIC_MIN_N

    @property
    def slack(self):
        """Distance to the nearer bound; negative when violated."""
        gaps = []
        if self.lower is not None:
            gaps.append(self.value - self.lower)
        if self.upper is not None:
            gaps.append(self.upper - self.value)
        return min(gaps) if gaps else math.inf

    def as_dict(self):
        out = asdict(self)
        out.update(lower_violated=self.lower_violated, upper_violated=self.upper_violated,
                   hard=self.hard, slack=self.slack)
        return out


@dataclass
class BoundReport:
    checks: list

    @property
    def hard_violations(self):
        return [c for c in self.checks if c.hard]

    @property
    def ok(self):
        return not self.hard_violations

    def as_dict(self):
        return {"ok": self.ok, "n_checks": len(self.checks),
                "n_hard": len(self.hard_violations), "checks": [c.as_dict() for c in self.checks]}


def verify_bounds(table):
    """Evaluate every applicable bound on every row of ``table``."""
    kind, d = table.kind, table.d
    checks = []
    for row in table.rows:
        n, e = row.n, row.energy
        rem = _remainder(kind, d, n, e) if not (kind.tag == "riesz" and _is_pole(kind.s, d)) else None
        if d == 1:
            exact = en.circle_exact_log(n) if kind.tag == "log" else en.circle_exact(kind.s, n)
            tol = 1e-12 * max(1.0, abs(exact)) + 1e-12 * n
            checks.append(BoundCheck("circle-exact", n, e, exact - tol, exact + tol))
        if kind.tag == "log":
            if d >= 2:
                checks.append(BoundCheck("log-lower", n, rem, lower=-theory.wagner_cprime(d), asymptotic=True))
            if d == 2 and n >= ASYMPTOTIC_MIN_N:
                lo, hi = theory.log_interval_bounds()
                checks.append(BoundCheck("log-interval", n, rem, lo, hi, asymptotic=True))
            continue
        s = kind.s
        if s < d:
            # Optimal energies satisfy E <= N^2 V_s: by averaging over random
            # points for s > 0, since sigma maximizes the energy for s < 0.
            checks.append(BoundCheck("potential-upper", n, rem, upper=0.0))
        elif s == d and d >= 2:
            checks.append(BoundCheck("boundary-lower", n, rem, lower=-theory.boundary_c(d), asymptotic=True))
        elif s > d and d >= 2 and not _is_integer(0.5 * (s - d)):
            v = theory.v_s_sphere(s, d, pole_tol=0.0)
            scale = float(n) ** (1.0 + s / d)
            checks.append(BoundCheck("hypersingular-lower", n, (e - v * n * n) / scale,
                                     lower=theory.hypersing_lower_A(s, d), asymptotic=True))
            checks.append(BoundCheck("hypersingular-upper", n, (e - s / d * v * n * n) / scale,
                                     upper=theory.hypersing_upper_U(s, d), asymptotic=True))
    return BoundReport(checks)


def _is_integer(x):
    return x == math.floor(x)


def _is_pole(s, d):
    if s == d:
        return False
    k = (s - d) / 2
    return _is_integer(k) and k >= 0 and (d % 2 == 1 or k < d // 2)


# ---------------------------------------------------------------- Berezin estimate

def berezin_shell_sum(s, shells=BEREZIN_MAX_SHELLS):
    """Truncated lattice sum over the first hexagonal shells: sum m_k / r_k^s."""
    shells = _check_shells(shells)
    return math.fsum(m / r**s for r, m in en.HEX_SHELLS[:shells])


def _check_shells(shells):
    if isinstance(shells, bool) or int(shells) != shells or not 1 <= shells <= BEREZIN_MAX_SHELLS:
        raise DomainError(f"shells must be an integer in 1..{BEREZIN_MAX_SHELLS}, got {shells!r}",
                          "semicontinuum-estimate")
    return int(shells)


def berezin_estimate(s, n, shells=BEREZIN_MAX_SHELLS):
    """Semicontinuum approximation of the optimal s-energy of N points on S^2.

    Near neighbours sit on hexagonal shells; the remaining points are smeared
    out uniformly.
    """
    s = float(s)
    if not s > 0 or s == 2.0:
        raise DomainError(f"requires s > 0 and s != 2, got s={s:g}", "semicontinuum-estimate")
    shells = _check_shells(shells)
    n = int(n)
    neighbours = 1 + sum(m for _, m in en.HEX_SHELLS[:shells])
    if n < neighbours:
        raise DomainError(f"N={n} is smaller than the {neighbours} points inside the shells",
                          "semicontinuum-estimate")
    n = float(n)
    smeared = n * n * 2.0 ** (1.0 - s) / (2.0 - s) * (1.0 - (neighbours / n) ** (1.0 - s / 2))
    near = n * (n * math.sqrt(3.0) / (8.0 * math.pi)) ** (s / 2) * berezin_shell_sum(s, shells)
    return smeared + near


# ---------------------------------------------------------------- IO

def ingest_table(path, kind, d):
    """Read a CSV with header ``N,energy`` into an :class:`EnergyTable`."""
    path = Path(path)
    with path.open(newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise ParseError(f"{path}: empty file, expected header 'N,energy'", 1)
    header = [h.strip() for h in lines[0].split(",")]
    if header != ["N", "energy"]:
        raise ParseError(f"{path}: header must be 'N,energy', got {lines[0]!r}", 1)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 fields, got {len(parts)}", lineno)
        try:
            n = int(parts[0])
            e = float(parts[1])
        except ValueError:
            raise ParseError(f"cannot parse row {line!r}", lineno) from None
        if n < 2:
            raise ParseError(f"N must be >= 2, got {n}", lineno)
        if not math.isfinite(e):
            raise ParseError(f"energy is not finite: {parts[1]!r}", lineno)
        if rows and n <= rows[-1].n:
            raise ParseError(f"N must be strictly increasing ({rows[-1].n} then {n})", lineno)
        rows.append(TableRow(n, e, "ingested"))
    if not rows:
        raise ParseError(f"{path}: no data rows", len(lines))
    return EnergyTable(kind, d, rows)


def write_table(path, table):
    """Write ``N,energy`` CSV; floats use repr so ingestion is lossless."""
    with Path(path).open("w", newline="") as fh:
        fh.write("N,energy\n")
        for r in table.rows:
            fh.write(f"{r.n},{r.energy!r}\n")


def summary(table, fit=None, bounds=None):
    """JSON-serializable summary: metadata, constants, per-row remainders."""
    limit = conjectured_limit(table.kind, table.d)
    out = {
        "kind": table.kind.tag,
        "s": table.kind.s,
        "d": table.d,
        "n_rows": len(table),
        "leading": _leading_constants(table.kind, table.d),
        "conjectured_limit": limit.as_dict() if limit else None,
        "remainders": [[n, r] for n, r in remainders(table)],
    }
    if fit is not None:
        out["fit"] = fit.as_dict()
    if bounds is not None:
        out["bounds"] = {"ok": bounds.ok, "n_checks": len(bounds.checks),
                         "n_hard": len(bounds.hard_violations)}
    return out


def _leading_constants(kind, d):
    if kind.tag == "log":
        return {"V_log": theory.v_log_sphere(d), "log_coefficient": -1.0 / d}
    if kind.s == d:
        return {"F_d": theory.F(d)}
    return {"V_s": theory.v_s_sphere(kind.s, d)}


def report(table, path, fit=None, bounds=None):
    """Write ``path`` (CSV) and ``path`` with suffix .json (summary)."""
    path = Path(path)
    limit = conjectured_limit(table.kind, table.d)
    limit_value = "" if limit is None else repr(limit.value)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["N", "energy", "remainder", "conjectured_limit"])
        for row, (_, rem) in zip(table.rows, remainders(table)):
            writer.writerow([row.n, repr(row.energy), repr(rem), limit_value])
    json_path = path.with_suffix(".json")
    json_path.write_text(json.dumps(summary(table, fit, bounds), indent=2) + "\n")
    return json_path


def read_report(path, kind, d):
    """Recover the (N, energy) table from a report CSV."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [TableRow(int(r["N"]), float(r["energy"]), "ingested") for r in reader]
    return EnergyTable(kind, d, rows)


def lattice_tail_check(s, shells=BEREZIN_MAX_SHELLS):
    """Truncated shell sum versus the full hexagonal Epstein zeta value."""
    return berezin_shell_sum(s, shells), sf.epstein_hex(s)
