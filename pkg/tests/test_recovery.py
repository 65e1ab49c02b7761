import numpy as np
import pytest

from cfcollocation.assembly import assemble, assemble_for_solution, sample_collocation_points
from cfcollocation.evaluation import best_s_term_error, relative_l2_error
from cfcollocation.index_sets import build_hyperbolic_cross
from cfcollocation.problem import (
    builtin_coefficient,
    forcing_term,
    make_nonsparse_solution,
    make_sparse_solution,
)
from cfcollocation.recovery import (
    least_squares,
    omp,
    oracle_eta,
    qcbp,
    reference_coefficients,
)
from cfcollocation.spectral import synthesize

ZERO_F = lambda p: np.zeros(len(p), dtype=complex)


def _planted_system(seed, m=128, sparsity=10, order=39):
    index_set = build_hyperbolic_cross(2, order)
    a1 = builtin_coefficient("a1", 2)
    rng = np.random.default_rng(seed)
    pts = rng.random((m, 2))
    system = assemble(a1, ZERO_F, index_set, pts)
    support = rng.choice(index_set.size, size=sparsity, replace=False)
    target = np.zeros(index_set.size, dtype=complex)
    target[support] = (
        rng.standard_normal(sparsity) + 1j * rng.standard_normal(sparsity)
    ) / np.sqrt(2)
    system.rhs = system.matrix @ target
    return system, target


def test_omp_zero_rhs():
    system, _ = _planted_system(0)
    system.rhs = np.zeros_like(system.rhs)
    result = omp(system, 10)
    assert np.all(result.coefficients == 0)
    assert result.support.size == 0
    assert result.residual_norm == 0


def test_omp_planted_recovery():
    for seed in range(5):
        system, target = _planted_system(seed)
        result = omp(system, 20)
        assert np.linalg.norm(result.coefficients - target) < 1e-10
        assert result.residual_norm < 1e-10


def test_omp_invariants():
    system, _ = _planted_system(1, m=64, sparsity=12)
    result = omp(system, 30)
    history = result.diagnostics["residual_history"]
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))
    order = result.diagnostics["selection_order"]
    assert len(set(order)) == len(order)
    # normal equations on the selected support
    residual = system.rhs - system.matrix @ result.coefficients
    gradient = system.matrix[:, result.support].conj().T @ residual
    assert np.max(np.abs(gradient), initial=0.0) < 1e-8
    # the recomputed residual norm matches the solver's own bookkeeping
    assert result.residual_norm == pytest.approx(
        result.diagnostics["solver_residual_norm"], abs=1e-8
    )


def test_omp_sparsity_bounded_by_iterations():
    system, _ = _planted_system(2, m=64, sparsity=30)
    result = omp(system, 7)
    assert np.sum(result.coefficients != 0) <= 7
    assert result.iterations <= 7


def test_omp_rejects_bad_iteration_count():
    system, _ = _planted_system(3)
    with pytest.raises(ValueError):
        omp(system, 0)


def test_qcbp_zero_is_optimal_for_large_eta():
    system, _ = _planted_system(4)
    eta = np.linalg.norm(system.rhs) * 1.01
    result = qcbp(system, eta)
    assert np.sum(np.abs(result.coefficients)) <= 1e-8
    assert result.diagnostics["converged"]


def test_qcbp_planted_recovery_and_feasibility():
    system, target = _planted_system(5)
    result = qcbp(system, 1e-10)
    norm_b = np.linalg.norm(system.rhs)
    assert result.residual_norm <= 1e-10 + 1e-7 * max(1.0, norm_b)
    assert np.linalg.norm(result.coefficients - target) < 1e-6

    greedy = omp(system, 20)
    assert np.sum(np.abs(result.coefficients)) <= np.sum(np.abs(greedy.coefficients)) + 1e-6


def test_qcbp_rejects_negative_eta():
    system, _ = _planted_system(6)
    with pytest.raises(ValueError):
        qcbp(system, -1.0)


def test_qcbp_nonconvergence_is_flagged_not_fatal():
    system, _ = _planted_system(7)
    result = qcbp(system, 0.0, max_iterations=5)
    assert not result.diagnostics["converged"]
    assert result.coefficients.shape == (system.n_indices,)


def test_least_squares_exact_when_overdetermined():
    system, target = _planted_system(8, m=500, order=10)
    result = least_squares(system)
    assert np.linalg.norm(result.coefficients - target) < 1e-10
    assert not result.diagnostics["minimum_norm"]


def test_least_squares_flags_underdetermined():
    system, _ = _planted_system(9, m=32)
    result = least_squares(system)
    assert result.diagnostics["minimum_norm"]
    assert result.residual_norm < 1e-10  # interpolation is always possible


def test_recovery_error_decays_with_samples_u1():
    index_set = build_hyperbolic_cross(2, 39)
    solution = make_sparse_solution(index_set, 10, 31, regime="u1")
    a1 = builtin_coefficient("a1", 2)
    pts = sample_collocation_points(2, 128, 31)
    system = assemble_for_solution(a1, solution, index_set, pts)
    result = omp(system, 64)
    err = relative_l2_error(
        solution.u,
        lambda p: synthesize(result.coefficients, index_set, p),
        2,
        2 * index_set.size,
        31,
    )
    assert err < 1e-6


def test_oracle_eta_vanishes_for_supported_solution():
    index_set = build_hyperbolic_cross(2, 39)
    solution = make_sparse_solution(index_set, 5, 37, regime="u1")
    a2 = builtin_coefficient("a2", 2)
    f_eval = lambda p: forcing_term(a2, solution, p)
    pts = sample_collocation_points(2, 100, 37)
    system = assemble_for_solution(a2, solution, index_set, pts)
    reference = reference_coefficients(a2, f_eval, index_set, 41)
    assert oracle_eta(system, reference) < 1e-9


def test_oracle_eta_decreases_with_order_and_is_stable():
    u2 = make_nonsparse_solution(2)
    a1 = builtin_coefficient("a1", 2)
    f_eval = lambda p: forcing_term(a1, u2, p)
    etas = {}
    for order in (19, 39):
        index_set = build_hyperbolic_cross(2, order)
        pts = sample_collocation_points(2, 128, 43)
        system = assemble_for_solution(a1, u2, index_set, pts)
        reference = reference_coefficients(a1, f_eval, index_set, 47)
        etas[order] = oracle_eta(system, reference)
    assert 0 < etas[39] < etas[19]

    index_set = build_hyperbolic_cross(2, 19)
    pts = sample_collocation_points(2, 128, 43)
    system = assemble_for_solution(a1, u2, index_set, pts)
    eta4 = oracle_eta(system, reference_coefficients(a1, f_eval, index_set, 53, oversample=4))
    eta8 = oracle_eta(system, reference_coefficients(a1, f_eval, index_set, 59, oversample=8))
    assert eta8 <= 1.5 * eta4


def test_recovery_error_bounded_by_compressibility():
    # noiseless compressible targets: error <= C1 sigma_s(c)_1 / sqrt(s)
    # exactly sparse noisy targets: error <= C2 ||e||_2, with C1, C2 <= 100
    index_set = build_hyperbolic_cross(2, 20)
    a1 = builtin_coefficient("a1", 2)
    n = index_set.size
    s = 5
    c1_fits, c2_fits = [], []
    for seed in range(25):
        rng = np.random.default_rng(100 + seed)
        pts = rng.random((128, 2))
        system = assemble(a1, ZERO_F, index_set, pts)

        magnitudes = np.arange(1, n + 1, dtype=float) ** -2.0
        phases = np.exp(2j * np.pi * rng.random(n))
        target = magnitudes[rng.permutation(n)] * phases
        system.rhs = system.matrix @ target
        result = omp(system, 24 * s)
        sigma = best_s_term_error(target, s, 1)
        c1_fits.append(np.linalg.norm(result.coefficients - target) * np.sqrt(s) / sigma)

        sparse_target = np.zeros(n, dtype=complex)
        support = rng.choice(n, size=s, replace=False)
        sparse_target[support] = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        noise = rng.standard_normal(128) + 1j * rng.standard_normal(128)
        noise *= 1e-3 / np.linalg.norm(noise)
        system.rhs = system.matrix @ sparse_target + noise
        result = omp(system, 24 * s)
        c2_fits.append(np.linalg.norm(result.coefficients - sparse_target) / 1e-3)

    assert max(c1_fits) <= 100
    assert max(c2_fits) <= 100
