"""Fourier system, rescaled spectral basis, and its image under the operator.

Conventions: points live on the unit torus [0, 1)^d, the Fourier system is
F_nu(x) = exp(2 pi i nu.x), and the spectral basis divides F_nu by
4 pi^2 ||nu||^2 so that -Laplace(Psi_nu) = F_nu.  Applying the divergence
form operator -div(a grad .) to Psi_nu yields the family Phi_nu that the
collocation matrix samples.

All evaluators accept a single point of shape (d,) or a batch of shape
(m, d) and broadcast accordingly.
"""

import numpy as np

TWO_PI = 2.0 * np.pi
FOUR_PI_SQ = 4.0 * np.pi**2

__all__ = [
    "as_points",
    "eval_fourier",
    "eval_spectral_basis",
    "eval_phi",
    "fourier_matrix",
    "phi_matrix",
    "synthesize",
    "convert_coefficients",
]


def as_points(x, dimension=None):
    """Coerce to an (m, d) float array with coordinates reduced mod 1."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2:
        raise ValueError(f"points must have shape (d,) or (m, d), got {pts.shape}")
    if dimension is not None and pts.shape[1] != dimension:
        raise ValueError(
            f"points have dimension {pts.shape[1]}, expected {dimension}"
        )
    return np.mod(pts, 1.0)


def _point_batch(nu, x):
    nu = np.asarray(nu, dtype=float).ravel()
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if x.shape[-1] != nu.shape[0]:
        raise ValueError(
            f"dimension mismatch: index has length {nu.shape[0]}, "
            f"points have {x.shape[-1]} coordinates"
        )
    return nu, np.atleast_2d(x), single


def eval_fourier(nu, x):
    """F_nu(x) = exp(2 pi i nu.x); unit modulus everywhere."""
    nu, pts, single = _point_batch(nu, x)
    vals = np.exp(2j * np.pi * (pts @ nu))
    return vals[0] if single else vals


def eval_spectral_basis(nu, x):
    """Psi_nu(x) = F_nu(x) / (4 pi^2 ||nu||^2); nu = 0 is rejected."""
    nu_arr = np.asarray(nu)
    sq = float(np.sum(np.asarray(nu_arr, dtype=float) ** 2))
    if sq == 0.0:
        raise ValueError("the zero frequency has no spectral basis function")
    return eval_fourier(nu, x) / (FOUR_PI_SQ * sq)


def eval_phi(coefficient, nu, x):
    """Phi_nu(x) = [-div(a grad Psi_nu)](x) for a diffusion coefficient a.

    For a coefficient with a finite Fourier expansion {e_tau} this is the
    closed form sum_tau (1 + tau.nu / ||nu||^2) e_tau F_{tau + nu}(x).
    For a callable coefficient it is evaluated through the product rule,
    a(x) F_nu(x) - grad a(x) . grad Psi_nu(x).
    """
    nu_arr, pts, single = _point_batch(np.asarray(nu), x)
    sq = float(nu_arr @ nu_arr)
    if sq == 0.0:
        raise ValueError("the zero frequency is excluded from the system")
    if getattr(coefficient, "is_fourier_sparse", False):
        taus = coefficient.frequencies.astype(float)
        weights = 1.0 + (taus @ nu_arr) / sq
        phases = np.exp(2j * np.pi * (pts @ (taus + nu_arr).T))
        vals = phases @ (weights * coefficient.values)
    else:
        f_vals = np.exp(2j * np.pi * (pts @ nu_arr))
        a_vals = coefficient.value(pts)
        grad_dot = coefficient.gradient(pts) @ nu_arr
        vals = (a_vals - 1j * grad_dot / (TWO_PI * sq)) * f_vals
    return vals[0] if single else vals


def fourier_matrix(index_set, points):
    """(m, N) matrix of F_nu_j(y_i) over an index set."""
    pts = as_points(points, index_set.dimension)
    return np.exp(2j * np.pi * (pts @ index_set.indices.T.astype(float)))


def phi_matrix(coefficient, index_set, points):
    """(m, N) matrix of Phi_nu_j(y_i); columns follow the index set order.

    For Fourier-sparse coefficients the matrix is accumulated term by term
    as e_tau * diag(F_tau(y)) * F * diag(1 + tau.nu / ||nu||^2), reusing a
    single Fourier matrix F, so the cost is O(m N nnz(a)).
    """
    pts = as_points(points, index_set.dimension)
    base = fourier_matrix(index_set, pts)
    freqs = index_set.indices.astype(float)
    sq = index_set.squared_norms
    if getattr(coefficient, "is_fourier_sparse", False):
        out = np.zeros_like(base)
        for tau, e_tau in zip(coefficient.frequencies, coefficient.values):
            tau = tau.astype(float)
            weights = 1.0 + (freqs @ tau) / sq
            phases = np.exp(2j * np.pi * (pts @ tau))
            out += e_tau * (phases[:, None] * base * weights[None, :])
        return out
    a_vals = coefficient.value(pts)
    grad_dot = coefficient.gradient(pts) @ freqs.T
    return (a_vals[:, None] - 1j * grad_dot / (TWO_PI * sq[None, :])) * base


def synthesize(coefficients, index_set, x, basis="spectral"):
    """Evaluate sum_nu c_nu B_nu(x) with B the Fourier or spectral basis."""
    coeffs = np.asarray(coefficients, dtype=complex).ravel()
    if coeffs.shape[0] != index_set.size:
        raise ValueError(
            f"coefficient vector has length {coeffs.shape[0]}, "
            f"index set has {index_set.size}"
        )
    if basis == "spectral":
        coeffs = coeffs / (FOUR_PI_SQ * index_set.squared_norms)
    elif basis != "fourier":
        raise ValueError(f"unknown basis {basis!r}")
    x_arr = np.asarray(x, dtype=float)
    single = x_arr.ndim == 1
    vals = fourier_matrix(index_set, x_arr) @ coeffs
    return vals[0] if single else vals


def convert_coefficients(coefficients, index_set, direction):
    """Rescale coefficients between the spectral and Fourier conventions.

    The two expansions of the same function satisfy
    c_spectral = 4 pi^2 ||nu||^2 c_fourier entrywise.
    """
    coeffs = np.asarray(coefficients, dtype=complex).ravel()
    if coeffs.shape[0] != index_set.size:
        raise ValueError("coefficient length does not match the index set")
    scale = FOUR_PI_SQ * index_set.squared_norms
    if direction == "spectral_to_fourier":
        return coeffs / scale
    if direction == "fourier_to_spectral":
        return coeffs * scale
    raise ValueError(f"unknown direction {direction!r}")
