import numpy as np
import pytest

from cfcollocation.assembly import (
    AssemblyError,
    assemble,
    assemble_for_solution,
    sample_collocation_points,
    truncation_error_for_system,
    truncation_error_vector,
)
from cfcollocation.index_sets import build_hyperbolic_cross
from cfcollocation.problem import (
    builtin_coefficient,
    forcing_term,
    make_nonsparse_solution,
    make_sparse_solution,
)
from cfcollocation.riesz import gram_closed_form
from cfcollocation.spectral import eval_phi


def test_points_reproducible_and_uniform():
    first = sample_collocation_points(3, 100, 42)
    second = sample_collocation_points(3, 100, 42)
    assert np.array_equal(first, second)

    pts = sample_collocation_points(2, 100_000, 0)
    se_mean = 1 / np.sqrt(12 * pts.shape[0])
    assert np.max(np.abs(pts.mean(axis=0) - 0.5)) < 3 * se_mean
    cov = np.cov(pts.T)
    # off-diagonal of the covariance of independent uniforms is 0
    se_cov = (1 / 12) / np.sqrt(pts.shape[0])
    assert abs(cov[0, 1]) < 3 * se_cov


def test_single_row_value():
    index_set = build_hyperbolic_cross(2, 2)
    a1 = builtin_coefficient("a1", 2)
    system = assemble(
        a1, lambda p: np.ones(len(p), dtype=complex), index_set, np.zeros((1, 2))
    )
    j = index_set.index_of((1, 0))
    assert system.matrix[0, j] == pytest.approx(1.0)
    assert system.rhs[0] == pytest.approx(1.0)


def test_entries_match_direct_evaluation():
    index_set = build_hyperbolic_cross(2, 6)
    a2 = builtin_coefficient("a2", 2)
    pts = sample_collocation_points(2, 20, 1)
    system = assemble(a2, lambda p: np.zeros(len(p)), index_set, pts)
    scale = 1 / np.sqrt(20)
    for j, nu in enumerate(index_set):
        direct = scale * eval_phi(a2, nu, pts)
        assert np.max(np.abs(system.matrix[:, j] - direct)) < 1e-13


def test_deterministic_reassembly():
    index_set = build_hyperbolic_cross(2, 10)
    a3 = builtin_coefficient("a3", 2)
    u2 = make_nonsparse_solution(2)
    pts = sample_collocation_points(2, 50, 3)
    one = assemble_for_solution(a3, u2, index_set, pts)
    two = assemble_for_solution(a3, u2, index_set, pts)
    assert np.array_equal(one.matrix, two.matrix)
    assert np.array_equal(one.rhs, two.rhs)


def test_exact_representation_identity():
    index_set = build_hyperbolic_cross(2, 39)
    solution = make_sparse_solution(index_set, 10, 5, regime="u1")
    coeffs = solution.spectral_coefficients_on(index_set)
    for name in ("a1", "a2", "a3"):
        a = builtin_coefficient(name, 2)
        pts = sample_collocation_points(2, 128, 7)
        system = assemble_for_solution(a, solution, index_set, pts)
        residual = system.matrix @ coeffs - system.rhs
        assert np.linalg.norm(residual) < 1e-10 * max(1.0, np.linalg.norm(system.rhs))


def test_constant_coefficient_column_norms():
    index_set = build_hyperbolic_cross(2, 10)
    a1 = builtin_coefficient("a1", 2)
    norms = []
    for seed in range(50):
        pts = sample_collocation_points(2, 30, seed)
        system = assemble(a1, lambda p: np.zeros(len(p)), index_set, pts)
        norms.append(np.mean(np.linalg.norm(system.matrix, axis=0) ** 2))
    assert abs(np.mean(norms) - 1.0) < 0.05


def test_expected_gram_matches_closed_form():
    index_set = build_hyperbolic_cross(2, 6)
    a2 = builtin_coefficient("a2", 2)
    gram = gram_closed_form(a2, index_set).entries
    acc = np.zeros_like(gram)
    for seed in range(200):
        pts = sample_collocation_points(2, 50, seed)
        system = assemble(a2, lambda p: np.zeros(len(p)), index_set, pts)
        acc += system.matrix.conj().T @ system.matrix
    acc /= 200
    assert np.max(np.abs(acc - gram)) < 0.05


def test_truncation_error_vanishes_for_supported_solution():
    index_set = build_hyperbolic_cross(2, 39)
    solution = make_sparse_solution(index_set, 10, 9, regime="u1")
    a2 = builtin_coefficient("a2", 2)
    coeffs = solution.spectral_coefficients_on(index_set)
    pts = sample_collocation_points(2, 64, 11)
    error = truncation_error_vector(a2, solution, coeffs, index_set, pts)
    assert np.linalg.norm(error) < 1e-10


def test_truncation_error_below_sup_bound():
    index_set = build_hyperbolic_cross(2, 9)
    u2 = make_nonsparse_solution(2)
    a2 = builtin_coefficient("a2", 2)
    coeffs = u2.spectral_coefficients_on(index_set)
    pts = sample_collocation_points(2, 400, 13)
    error = truncation_error_vector(a2, u2, coeffs, index_set, pts)

    probe = sample_collocation_points(2, 10_000, 17)
    system = assemble_for_solution(a2, u2, index_set, probe)
    residual_fn = np.sqrt(probe.shape[0]) * (system.matrix @ coeffs - system.rhs)
    sup_estimate = np.max(np.abs(residual_fn))
    assert np.linalg.norm(error) <= sup_estimate * (1 + 1e-9)


def test_truncation_error_decreases_with_order():
    u2 = make_nonsparse_solution(2)
    a2 = builtin_coefficient("a2", 2)
    pts = sample_collocation_points(2, 200, 19)
    norms = []
    for order in (7, 11, 15):
        index_set = build_hyperbolic_cross(2, order)
        coeffs = u2.spectral_coefficients_on(index_set)
        error = truncation_error_vector(a2, u2, coeffs, index_set, pts)
        norms.append(np.linalg.norm(error))
    assert norms[0] > norms[1] > norms[2]


def test_assembly_error_reports_location():
    index_set = build_hyperbolic_cross(2, 4)

    def bad_forcing(pts):
        vals = np.ones(len(pts), dtype=complex)
        vals[3] = np.nan
        return vals

    a1 = builtin_coefficient("a1", 2)
    pts = sample_collocation_points(2, 10, 23)
    with pytest.raises(AssemblyError, match="position"):
        assemble(a1, bad_forcing, index_set, pts)
    with pytest.raises(ValueError):
        assemble(a1, lambda p: np.ones(len(p)), index_set, np.empty((0, 2)))
