"""Monte Carlo collocation points and assembly of the linear system.

The collocation system is A z = b with A_ij = Phi_nu_j(y_i) / sqrt(m) and
b_i = f(y_i) / sqrt(m), over m independent uniform points on the torus.
The 1/sqrt(m) normalization makes E[A* A] equal to the Gram matrix of the
Phi system, which is what ties the random matrix to the Riesz analysis.
"""

from dataclasses import dataclass, field

import numpy as np

from .problem import forcing_term
from .spectral import as_points, phi_matrix

__all__ = [
    "CollocationSystem",
    "AssemblyError",
    "sample_collocation_points",
    "assemble",
    "assemble_for_solution",
    "truncation_error_vector",
]


class AssemblyError(RuntimeError):
    """Evaluation failure during assembly, annotated with its location."""


@dataclass
class CollocationSystem:
    """Dense collocation matrix, right-hand side, and their provenance."""

    matrix: np.ndarray
    rhs: np.ndarray
    points: np.ndarray
    index_set: object
    seed: object = None
    meta: dict = field(default_factory=dict)

    @property
    def n_points(self):
        return self.matrix.shape[0]

    @property
    def n_indices(self):
        return self.matrix.shape[1]


def sample_collocation_points(dimension, n_points, rng):
    """m i.i.d. points uniform on [0, 1)^d; reproducible for a fixed seed."""
    if n_points < 1:
        raise ValueError("need at least one collocation point")
    rng = np.random.default_rng(rng)
    return rng.random((int(n_points), int(dimension)))


def _check_finite(name, array):
    bad = np.argwhere(~np.isfinite(array))
    if bad.size:
        raise AssemblyError(f"non-finite {name} entry at position {tuple(bad[0])}")


def assemble(coefficient, f_evaluator, index_set, points, seed=None):
    """Build the scaled collocation system from evaluated rows.

    ``f_evaluator`` maps an (m, d) point array to forcing values.  Failures
    are reported with the offending row/column.
    """
    pts = as_points(points, index_set.dimension)
    if pts.shape[0] < 1:
        raise ValueError("points must be nonempty")
    if index_set.size < 1:
        raise ValueError("index set must be nonempty")
    scale = 1.0 / np.sqrt(pts.shape[0])
    try:
        matrix = scale * phi_matrix(coefficient, index_set, pts)
    except Exception as exc:  # noqa: BLE001 - annotate and rethrow
        raise AssemblyError(f"matrix evaluation failed: {exc}") from exc
    try:
        rhs = scale * np.asarray(f_evaluator(pts), dtype=complex).ravel()
    except Exception as exc:  # noqa: BLE001
        raise AssemblyError(f"right-hand side evaluation failed: {exc}") from exc
    if rhs.shape[0] != pts.shape[0]:
        raise AssemblyError("forcing evaluator returned a wrong-length vector")
    _check_finite("matrix", matrix)
    _check_finite("rhs", rhs)
    return CollocationSystem(matrix=matrix, rhs=rhs, points=pts, index_set=index_set, seed=seed)


def assemble_for_solution(coefficient, solution, index_set, points, rhs_mode="analytic", h=1e-3, seed=None):
    """Assemble with the forcing derived from a manufactured solution."""

    def f_evaluator(pts):
        return forcing_term(coefficient, solution, pts, mode=rhs_mode, h=h)

    system = assemble(coefficient, f_evaluator, index_set, points, seed=seed)
    system.meta["rhs_mode"] = rhs_mode
    return system


def truncation_error_vector(coefficient, solution, spectral_coefficients, index_set, points):
    """Per-point residual of the truncated expansion: A c_Lambda - b.

    ``spectral_coefficients`` must be the spectral-basis coefficients of
    the truncated solution on ``index_set``; the result equals
    (1/sqrt(m)) div(a grad (u - u_Lambda)) sampled at the points, with the
    forcing evaluated analytically.
    """
    system = assemble_for_solution(coefficient, solution, index_set, points)
    return truncation_error_for_system(system, spectral_coefficients)


def truncation_error_for_system(system, spectral_coefficients):
    """A c_Lambda - b on an already assembled system."""
    coeffs = np.asarray(spectral_coefficients, dtype=complex).ravel()
    if coeffs.shape[0] != system.n_indices:
        raise ValueError("coefficient length does not match the system")
    return system.matrix @ coeffs - system.rhs
