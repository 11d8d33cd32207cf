"""Input validation helpers shared by the energy, optimize and harness modules."""
import numpy as np

from .exceptions import DomainError

UNIT_NORM_TOL = 1e-12


def check_configuration(points, d=None, copy=False):
    """Validate an (N, d+1) array of unit vectors and return it as float64.

    Parameters
    ----------
    points : array_like, shape (N, d+1)
    d : int, optional
        Expected sphere dimension.
    copy : bool
        Return a fresh array even if ``points`` is already float64.

    Raises
    ------
    DomainError
        On wrong shape, fewer than two points, non-finite entries or points
        off the unit sphere.
    """
    x = np.array(points, dtype=np.float64, copy=copy) if copy else np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise DomainError(f"configuration must be a 2-d array (N, d+1), got shape {x.shape}")
    n, dim = x.shape
    if n < 2:
        raise DomainError(f"configuration needs N >= 2 points, got {n}")
    if dim < 2:
        raise DomainError(f"points must live in R^(d+1) with d >= 1, got width {dim}")
    if d is not None and dim != d + 1:
        raise DomainError(f"expected points in R^{d + 1} for S^{d}, got width {dim}")
    if not np.all(np.isfinite(x)):
        raise DomainError("configuration contains non-finite coordinates")
    dev = np.abs(np.linalg.norm(x, axis=1) - 1.0)
    if dev.max() > UNIT_NORM_TOL:
        i = int(dev.argmax())
        raise DomainError(f"point {i} is off the unit sphere (| |x| - 1 | = {dev[i]:.3g})")
    return x


def normalize_rows(x):
    """Project each row of ``x`` onto the unit sphere."""
    x = np.asarray(x, dtype=np.float64)
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value:
        raise DomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return value
