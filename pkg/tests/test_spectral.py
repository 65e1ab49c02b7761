import numpy as np
import pytest

from cfcollocation.index_sets import build_hyperbolic_cross
from cfcollocation.problem import (
    CallableCoefficient,
    FourierSparseCoefficient,
    builtin_coefficient,
    make_sparse_solution,
)
from cfcollocation.spectral import (
    TWO_PI,
    convert_coefficients,
    eval_fourier,
    eval_phi,
    eval_spectral_basis,
    fourier_matrix,
    phi_matrix,
    synthesize,
)


def test_fourier_values():
    assert eval_fourier((0, 0), (0.3, 0.9)) == pytest.approx(1.0)
    assert eval_fourier((1, 0), (0.25, 0.7)) == pytest.approx(1j, abs=1e-14)
    # nu.x = 2*0.5 - 1*0.5 = 0.5, a half period
    assert eval_fourier((2, -1), (0.5, 0.5)) == pytest.approx(-1.0, abs=1e-14)


def test_fourier_unit_modulus():
    rng = np.random.default_rng(0)
    pts = rng.random((200, 3))
    for nu in [(1, 0, 0), (2, -5, 1), (7, 7, -7)]:
        assert np.max(np.abs(np.abs(eval_fourier(nu, pts)) - 1.0)) < 1e-14


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        eval_fourier((1, 0, 0), (0.5, 0.5))


def test_spectral_basis_values():
    pi2 = np.pi**2
    origin = (0.0, 0.0)
    assert eval_spectral_basis((1, 0), origin) == pytest.approx(1 / (4 * pi2))
    assert eval_spectral_basis((1, 1), origin) == pytest.approx(1 / (8 * pi2))
    assert eval_spectral_basis((3, 4), origin) == pytest.approx(1 / (100 * pi2))
    with pytest.raises(ValueError):
        eval_spectral_basis((0, 0), origin)


def test_phi_constant_coefficient_degenerates_exactly():
    a1 = builtin_coefficient("a1", 2)
    index_set = build_hyperbolic_cross(2, 8)
    pts = np.random.default_rng(1).random((40, 2))
    assert np.array_equal(phi_matrix(a1, index_set, pts), fourier_matrix(index_set, pts))
    for nu in [(1, 0), (2, -3)]:
        assert np.array_equal(eval_phi(a1, nu, pts), eval_fourier(nu, pts))


def test_phi_single_mode_perturbation_value():
    a = FourierSparseCoefficient(
        2, {(0, 0): 1.0, (1, 0): 0.1, (-1, 0): 0.1}, a_min=0.8
    )
    # tau.(0,1) = 0 for both perturbation modes, all phases are 1 at x = 0
    assert eval_phi(a, (0, 1), (0.0, 0.0)) == pytest.approx(1.2)
    one_sided = FourierSparseCoefficient(
        2, {(0, 0): 1.0, (1, 0): 0.1}, a_min=0.8, declared_real=False
    )
    assert eval_phi(one_sided, (0, 1), (0.0, 0.0)) == pytest.approx(1.1)


def _a2_callable():
    def fn(p):
        return (
            1
            + 0.25 * np.sin(TWO_PI * p[:, 0]) * np.sin(TWO_PI * p[:, 1])
            + 0.25 * np.sin(2 * TWO_PI * p[:, 0])
        )

    def grad(p):
        g = np.zeros((p.shape[0], 2))
        g[:, 0] = 0.25 * TWO_PI * np.cos(TWO_PI * p[:, 0]) * np.sin(
            TWO_PI * p[:, 1]
        ) + 0.5 * TWO_PI * np.cos(2 * TWO_PI * p[:, 0])
        g[:, 1] = 0.25 * TWO_PI * np.sin(TWO_PI * p[:, 0]) * np.cos(TWO_PI * p[:, 1])
        return g

    return CallableCoefficient(2, fn, grad, a_min=0.5)


def test_phi_closed_form_matches_product_rule():
    a2 = builtin_coefficient("a2", 2)
    a2c = _a2_callable()
    assert eval_phi(a2, (1, 0), (0.3, 0.6)) == pytest.approx(
        eval_phi(a2c, (1, 0), (0.3, 0.6)), abs=1e-12
    )
    pts = np.random.default_rng(2).random((100, 2))
    for nu in [(1, 0), (0, 2), (3, -4), (5, 5)]:
        diff = np.abs(eval_phi(a2, nu, pts) - eval_phi(a2c, nu, pts))
        assert np.max(diff) < 1e-10


def test_synthesize_basics():
    index_set = build_hyperbolic_cross(2, 6)
    zeros = np.zeros(index_set.size, dtype=complex)
    assert synthesize(zeros, index_set, (0.2, 0.4)) == 0
    unit = zeros.copy()
    unit[index_set.index_of((1, 0))] = 1.0
    assert synthesize(unit, index_set, (0.0, 0.0), basis="fourier") == pytest.approx(1.0)
    with pytest.raises(ValueError):
        synthesize(zeros[:-1], index_set, (0.2, 0.4))


def test_synthesize_matches_sine_products():
    index_set = build_hyperbolic_cross(2, 39)
    solution = make_sparse_solution(index_set, 10, 99, regime="u1")
    coeffs = solution.fourier_coefficients_on(index_set)
    x = np.array([0.1, 0.2])
    value = synthesize(coeffs, index_set, x, basis="fourier")
    assert value == pytest.approx(solution.u(x)[0], abs=1e-12)
    assert abs(value.imag) < 1e-12


def test_convert_roundtrip_and_values():
    index_set = build_hyperbolic_cross(2, 6)
    rng = np.random.default_rng(3)
    coeffs = rng.standard_normal(index_set.size) + 1j * rng.standard_normal(index_set.size)
    there = convert_coefficients(coeffs, index_set, "spectral_to_fourier")
    back = convert_coefficients(there, index_set, "fourier_to_spectral")
    assert np.max(np.abs(back - coeffs)) < 1e-14

    unit = np.zeros(index_set.size, dtype=complex)
    unit[index_set.index_of((1, 0))] = 1.0
    fourier = convert_coefficients(unit, index_set, "spectral_to_fourier")
    assert fourier[index_set.index_of((1, 0))] == pytest.approx(1 / (4 * np.pi**2))

    unit[:] = 0
    unit[index_set.index_of((1, 1))] = 1.0
    spectral = convert_coefficients(unit, index_set, "fourier_to_spectral")
    assert spectral[index_set.index_of((1, 1))] == pytest.approx(8 * np.pi**2)


def test_discrete_orthonormality_monte_carlo():
    index_set = build_hyperbolic_cross(2, 10)
    pts = np.random.default_rng(4).random((100_000, 2))
    F = fourier_matrix(index_set, pts)
    gram = (F.conj().T @ F) / pts.shape[0]
    off = gram - np.eye(index_set.size)
    assert np.max(np.abs(off)) < 0.05
