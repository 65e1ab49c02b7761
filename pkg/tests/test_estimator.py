import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from cfcollocation.estimator import CompressiveFourierCollocation
from cfcollocation.index_sets import build_hyperbolic_cross
from cfcollocation.problem import builtin_coefficient, forcing_term, make_sparse_solution


def _problem(order=39, seed=0):
    index_set = build_hyperbolic_cross(2, order)
    solution = make_sparse_solution(index_set, 10, seed, regime="u1")
    a2 = builtin_coefficient("a2", 2)
    return solution, a2, (lambda pts: forcing_term(a2, solution, pts))


def test_sklearn_parameter_protocol():
    est = CompressiveFourierCollocation(order=11, method="qcbp", eta=1e-8)
    params = est.get_params()
    assert params["order"] == 11
    assert params["eta"] == 1e-8
    cloned = clone(est)
    assert cloned.get_params() == params
    est.set_params(method="lsq")
    assert est.method == "lsq"


def test_predict_before_fit_raises():
    with pytest.raises(NotFittedError):
        CompressiveFourierCollocation().predict(np.zeros((3, 2)))


def test_fit_requires_forcing_information():
    est = CompressiveFourierCollocation(order=10)
    with pytest.raises(ValueError, match="forcing"):
        est.fit()


def test_fit_predict_recovers_sparse_solution():
    solution, _, forcing = _problem()
    est = CompressiveFourierCollocation(
        dimension=2,
        order=39,
        coefficient="a2",
        method="omp",
        n_collocation=128,
        random_state=3,
    )
    est.fit(forcing=forcing)
    pts = np.random.default_rng(4).random((400, 2))
    predicted = est.predict(pts)
    exact = solution.u(pts)
    rel = np.linalg.norm(predicted - exact) / np.linalg.norm(exact)
    assert rel < 1e-6
    assert est.max_imaginary_part_ < 1e-8
    assert est.residual_norm_ < 1e-8


def test_fit_with_explicit_points_and_values():
    solution, _, forcing = _problem(seed=1)
    pts = np.random.default_rng(5).random((150, 2))
    est = CompressiveFourierCollocation(
        dimension=2, order=39, coefficient="a2", method="omp"
    )
    est.fit(pts, forcing(pts))
    probe = np.random.default_rng(6).random((200, 2))
    rel = np.linalg.norm(est.predict(probe) - solution.u(probe)) / np.linalg.norm(
        solution.u(probe)
    )
    assert rel < 1e-6
    with pytest.raises(ValueError, match="per point"):
        est.fit(pts, np.ones(3))


def test_oracle_eta_route():
    solution, _, forcing = _problem(seed=2)
    est = CompressiveFourierCollocation(
        dimension=2,
        order=39,
        coefficient="a2",
        method="qcbp",
        n_collocation=128,
        eta="oracle",
        qcbp_max_iterations=20_000,
        random_state=7,
    )
    est.fit(forcing=forcing)
    pts = np.random.default_rng(8).random((300, 2))
    rel = np.linalg.norm(est.predict(pts) - solution.u(pts)) / np.linalg.norm(
        solution.u(pts)
    )
    assert rel < 1e-6

    bare = CompressiveFourierCollocation(method="qcbp", eta="oracle", order=10)
    with pytest.raises(ValueError, match="oracle"):
        bare.fit(np.random.default_rng(0).random((20, 2)), np.ones(20))


def test_accepts_coefficient_instance_and_lsq():
    solution, a2, forcing = _problem(seed=3)
    est = CompressiveFourierCollocation(
        dimension=2,
        order=39,
        coefficient=a2,
        method="lsq",
        n_collocation=900,
        random_state=9,
    )
    est.fit(forcing=forcing)
    assert not est.result_.diagnostics["minimum_norm"]
    pts = np.random.default_rng(10).random((100, 2))
    rel = np.linalg.norm(est.predict(pts) - solution.u(pts)) / np.linalg.norm(
        solution.u(pts)
    )
    assert rel < 1e-6
