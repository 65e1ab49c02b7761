"""Scikit-learn style front end for the collocation pipeline.

``fit`` consumes collocation points and forcing samples (drawing its own
Monte Carlo points when none are given), assembles the system on a
hyperbolic cross, and recovers the expansion coefficients with the
configured solver; ``predict`` evaluates the recovered expansion at new
points.  Being a ``BaseEstimator`` it composes with the usual tooling
(``get_params`` / ``set_params`` / ``clone``).
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .assembly import CollocationSystem, assemble, sample_collocation_points
from .index_sets import build_hyperbolic_cross
from .problem import DiffusionCoefficient, builtin_coefficient
from .recovery import least_squares, omp, oracle_eta, qcbp, reference_coefficients
from .spectral import as_points, phi_matrix, synthesize

__all__ = ["CompressiveFourierCollocation"]


class CompressiveFourierCollocation(BaseEstimator, RegressorMixin):
    """Sparse spectral solver for the periodic diffusion equation.

    Parameters
    ----------
    dimension : ambient dimension of the torus.
    order : hyperbolic-cross order of the truncation set.
    coefficient : diffusion coefficient; a builtin name ("a1", "a2", "a3")
        or a ``DiffusionCoefficient`` instance.
    method : "omp", "qcbp" or "lsq".
    n_collocation : number of Monte Carlo collocation points drawn when
        ``fit`` is not handed explicit points.
    omp_iterations : OMP iteration count; defaults to m // 2.
    eta : QCBP constraint radius, or "oracle" to derive it from a
        least-squares reference on a 4x oversampled fresh system (this
        requires a forcing callable).
    random_state : seed for point sampling.

    Attributes (after fit)
    ----------------------
    index_set_ : the truncation set.
    coefficients_ : recovered spectral-basis coefficients.
    result_ : full ``RecoveryResult`` with solver diagnostics.
    """

    def __init__(
        self,
        dimension=2,
        order=7,
        coefficient="a1",
        method="omp",
        n_collocation=128,
        omp_iterations=None,
        eta=0.0,
        qcbp_max_iterations=50_000,
        qcbp_tol=1e-9,
        random_state=None,
    ):
        self.dimension = dimension
        self.order = order
        self.coefficient = coefficient
        self.method = method
        self.n_collocation = n_collocation
        self.omp_iterations = omp_iterations
        self.eta = eta
        self.qcbp_max_iterations = qcbp_max_iterations
        self.qcbp_tol = qcbp_tol
        self.random_state = random_state

    def _coefficient_instance(self):
        if isinstance(self.coefficient, DiffusionCoefficient):
            return self.coefficient
        return builtin_coefficient(self.coefficient, self.dimension)

    def fit(self, X=None, y=None, forcing=None):
        """Assemble and solve the collocation system.

        X are collocation points (m, d); when None, ``n_collocation``
        points are drawn uniformly.  y are forcing values f(x_i); when
        None they are computed from the ``forcing`` callable, which is
        then also available for the oracle eta policy.
        """
        rng = np.random.default_rng(self.random_state)
        index_set = build_hyperbolic_cross(self.dimension, self.order)
        coefficient = self._coefficient_instance()

        if X is None:
            points = sample_collocation_points(
                self.dimension, self.n_collocation, rng
            )
        else:
            points = as_points(X, self.dimension)
        if y is None:
            if forcing is None:
                raise ValueError("fit needs forcing values y or a forcing callable")
            f_values = np.asarray(forcing(points), dtype=complex).ravel()
        else:
            f_values = np.asarray(y, dtype=complex).ravel()
        if f_values.shape[0] != points.shape[0]:
            raise ValueError("y must supply one forcing value per point")

        m = points.shape[0]
        scale = 1.0 / np.sqrt(m)
        system = CollocationSystem(
            matrix=scale * phi_matrix(coefficient, index_set, points),
            rhs=scale * f_values,
            points=points,
            index_set=index_set,
            seed=self.random_state,
        )

        if self.method == "omp":
            iters = self.omp_iterations or max(1, m // 2)
            result = omp(system, iters)
        elif self.method == "qcbp":
            if self.eta == "oracle":
                if forcing is None:
                    raise ValueError("eta='oracle' needs a forcing callable")
                reference = reference_coefficients(
                    coefficient, forcing, index_set, rng
                )
                eta_value = oracle_eta(system, reference)
            else:
                eta_value = float(self.eta)
            result = qcbp(
                system,
                eta_value,
                max_iterations=self.qcbp_max_iterations,
                tol=self.qcbp_tol,
            )
        elif self.method == "lsq":
            result = least_squares(system)
        else:
            raise ValueError(f"unknown method {self.method!r}")

        self.index_set_ = index_set
        self.coefficient_ = coefficient
        self.system_ = system
        self.result_ = result
        self.coefficients_ = result.coefficients
        self.n_iter_ = result.iterations
        self.residual_norm_ = result.residual_norm
        return self

    def predict(self, X):
        """Evaluate the recovered solution at points X; returns its real part."""
        if not hasattr(self, "coefficients_"):
            raise NotFittedError("this estimator has not been fitted yet")
        pts = as_points(X, self.dimension)
        values = synthesize(self.coefficients_, self.index_set_, pts, basis="spectral")
        self.max_imaginary_part_ = float(np.max(np.abs(values.imag), initial=0.0))
        return values.real
