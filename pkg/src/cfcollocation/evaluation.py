"""Monte Carlo error metrics and trial statistics."""

from typing import NamedTuple

import numpy as np

__all__ = [
    "mc_l2_norm",
    "relative_l2_error",
    "best_s_term_error",
    "GeometricStats",
    "geometric_stats",
    "success_rate",
]

# exact-recovery errors are clamped here before taking logs
ZERO_CLAMP = 1e-16


def mc_l2_norm(fn, dimension, n_points, rng):
    """sqrt(mean |g(x_i)|^2) over i.i.d. uniform points on the torus."""
    if n_points < 1:
        raise ValueError("need at least one sample point")
    rng = np.random.default_rng(rng)
    pts = rng.random((int(n_points), int(dimension)))
    vals = np.asarray(fn(pts))
    return float(np.sqrt(np.mean(np.abs(vals) ** 2)))


def relative_l2_error(u_exact, u_approx, dimension, n_points, rng):
    """Monte Carlo estimate of ||u - u_hat|| / ||u||, one shared point set."""
    if n_points < 1:
        raise ValueError("need at least one sample point")
    rng = np.random.default_rng(rng)
    pts = rng.random((int(n_points), int(dimension)))
    exact = np.asarray(u_exact(pts))
    approx = np.asarray(u_approx(pts))
    denom = np.sqrt(np.mean(np.abs(exact) ** 2))
    if denom == 0.0:
        raise ValueError("the exact solution vanishes on the sample")
    return float(np.sqrt(np.mean(np.abs(exact - approx) ** 2)) / denom)


def best_s_term_error(coefficients, s, p):
    """l^p norm of the vector with its s largest-magnitude entries removed.

    Ties between equal magnitudes are broken by index, so the result is
    deterministic.
    """
    c = np.asarray(coefficients).ravel()
    if not 0 <= s <= c.size:
        raise ValueError(f"s must lie in [0, {c.size}]")
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    order = np.argsort(-np.abs(c), kind="stable")
    rest = c[order[int(s):]]
    return float(np.linalg.norm(rest, ord=p))


class GeometricStats(NamedTuple):
    geo_mean: float
    geo_std_factor: float
    n_clamped: int


def geometric_stats(samples):
    """Geometric mean and corrected geometric standard deviation factor.

    Computed as exp of the mean and the (n-1)-corrected standard deviation
    of the log samples.  Exact zeros are clamped to a floor before taking
    logs and the clamp count is reported.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("no samples")
    if np.any(x < 0):
        raise ValueError("samples must be nonnegative")
    n_clamped = int(np.sum(x < ZERO_CLAMP))
    logs = np.log(np.maximum(x, ZERO_CLAMP))
    spread = float(np.exp(np.std(logs, ddof=1))) if x.size > 1 else 1.0
    return GeometricStats(float(np.exp(np.mean(logs))), spread, n_clamped)


def success_rate(errors, threshold=1e-6):
    """Fraction of runs with error strictly below the threshold."""
    e = np.asarray(errors, dtype=float).ravel()
    if e.size == 0:
        raise ValueError("no error samples")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return float(np.mean(e < threshold))
