"""Sparse and dense solvers for the collocation system.

Three routes from (A, b) to a coefficient vector: greedy orthogonal
matching pursuit, quadratically-constrained basis pursuit solved by a
first-order primal-dual iteration, and ordinary least squares.  All
solvers return coefficients in the original (unnormalized) column
coordinates of A, so their outputs feed ``synthesize`` directly and are
mutually comparable.
"""

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lstsq as scipy_lstsq
from scipy.sparse.linalg import LinearOperator, lsmr

from .assembly import assemble

__all__ = [
    "RecoveryResult",
    "omp",
    "qcbp",
    "least_squares",
    "oracle_eta",
    "reference_coefficients",
]


@dataclass
class RecoveryResult:
    """Coefficients plus solver diagnostics for one recovery run."""

    coefficients: np.ndarray
    support: np.ndarray
    residual_norm: float
    iterations: int
    method: str
    diagnostics: dict = field(default_factory=dict)


def _as_system_arrays(system):
    return np.asarray(system.matrix), np.asarray(system.rhs).ravel()


def omp(system, n_iterations):
    """Orthogonal matching pursuit with exact restricted least squares.

    Columns are l2-normalized up front; each iteration selects the column
    most correlated with the residual (ties broken by lowest index), grows
    the support, and re-solves the least-squares problem restricted to it.
    The residual is maintained through an incrementally built orthonormal
    basis of the selected columns, so it is the exact projection residual
    at every step.  Returned coefficients are mapped back to the original
    column scaling.  Iterations stop early once the residual has hit the
    roundoff floor; a rank-deficient restricted system falls back to a
    minimum-norm solve and is flagged.
    """
    A, b = _as_system_arrays(system)
    m, n = A.shape
    K = int(n_iterations)
    if K < 1:
        raise ValueError("need at least one iteration")

    col_norms = np.linalg.norm(A, axis=0)
    zero_cols = col_norms <= 0.0
    if np.any(zero_cols):
        warnings.warn(
            f"{int(np.sum(zero_cols))} zero columns excluded from selection",
            stacklevel=2,
        )
    safe_norms = np.where(zero_cols, 1.0, col_norms)
    An = A / safe_norms
    AnH = np.ascontiguousarray(An.conj().T)

    norm_b = np.linalg.norm(b)
    stop_tol = 1e-13 * max(1.0, norm_b)

    Q = np.empty((m, min(K, m)), dtype=complex)
    rank = 0
    residual = b.copy()
    selected = []
    history = [norm_b]
    rank_deficient = False

    for _ in range(K):
        if np.linalg.norm(residual) <= stop_tol:
            break
        corr = np.abs(AnH @ residual)
        corr[zero_cols] = -1.0
        if selected:
            corr[selected] = -1.0
        j = int(np.argmax(corr))
        if corr[j] < 0:
            break
        selected.append(j)
        # Gram-Schmidt with one reorthogonalization pass
        w = An[:, j]
        if rank:
            w = w - Q[:, :rank] @ (Q[:, :rank].conj().T @ w)
            w = w - Q[:, :rank] @ (Q[:, :rank].conj().T @ w)
        norm_w = np.linalg.norm(w)
        if norm_w <= 1e-12:
            rank_deficient = True
        elif rank < Q.shape[1]:
            Q[:, rank] = w / norm_w
            residual = residual - Q[:, rank] * (Q[:, rank].conj() @ residual)
            rank += 1
        history.append(float(np.linalg.norm(residual)))

    coefficients = np.zeros(n, dtype=complex)
    if selected:
        sol, _, lstsq_rank, _ = np.linalg.lstsq(An[:, selected], b, rcond=None)
        rank_deficient = rank_deficient or lstsq_rank < len(selected)
        coefficients[selected] = sol / safe_norms[selected]

    residual_norm = float(np.linalg.norm(A @ coefficients - b))
    return RecoveryResult(
        coefficients=coefficients,
        support=np.array(sorted(selected), dtype=int),
        residual_norm=residual_norm,
        iterations=len(selected),
        method="omp",
        diagnostics={
            "residual_history": history,
            "selection_order": list(selected),
            "rank_deficient": rank_deficient,
            "stopped_early": len(selected) < K,
            "solver_residual_norm": history[-1],
        },
    )


def _operator_norm(A, AH, n_iterations=60):
    # power iteration on A*A, deterministic start
    v = np.ones(A.shape[1], dtype=complex)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(n_iterations):
        w = AH @ (A @ v)
        lam = np.linalg.norm(w)
        if lam == 0.0:
            return 0.0
        v = w / lam
    return float(np.sqrt(lam))


def _soft_threshold(z, t):
    mag = np.abs(z)
    scale = np.maximum(mag - t, 0.0)
    out = np.zeros_like(z)
    nz = mag > 0
    out[nz] = z[nz] * (scale[nz] / mag[nz])
    return out


def qcbp(
    system,
    eta,
    max_iterations=50_000,
    tol=1e-9,
    stagnation_window=50,
    x0=None,
):
    """min ||z||_1 subject to ||A z - b||_2 <= eta, by primal-dual splitting.

    The l1 objective is handled by complex soft thresholding and the ball
    constraint by projection (through the proximal map of its support
    function on the dual side).  Step sizes are set from a power-method
    estimate of ||A||_2 so that tau * sigma * ||A||^2 < 1.  Iterations stop
    once the constraint violation falls below tol * max(1, ||b||) and the
    objective has changed by less than a relative tol over the stagnation
    window, or at the iteration cap, in which case the current iterate is
    still returned and flagged as non-converged.
    """
    A, b = _as_system_arrays(system)
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    m, n = A.shape
    AH = np.ascontiguousarray(A.conj().T)

    op_norm = _operator_norm(A, AH)
    if op_norm == 0.0:
        return RecoveryResult(
            coefficients=np.zeros(n, dtype=complex),
            support=np.array([], dtype=int),
            residual_norm=float(np.linalg.norm(b)),
            iterations=0,
            method="qcbp",
            diagnostics={"converged": True, "operator_norm": 0.0},
        )
    step = 0.99 / op_norm
    tau = sigma = step

    x = np.zeros(n, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex).copy()
    y = np.zeros(m, dtype=complex)
    Ax = A @ x
    Ax_prev = Ax.copy()

    norm_b = np.linalg.norm(b)
    feas_tol = tol * max(1.0, norm_b)
    objectives = deque(maxlen=stagnation_window + 1)
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        v = y + sigma * (2.0 * Ax - Ax_prev)
        dev = v / sigma - b
        norm_dev = np.linalg.norm(dev)
        if norm_dev > eta and norm_dev > 0:
            projection = b + dev * (eta / norm_dev)
        else:
            projection = v / sigma
        y = v - sigma * projection

        x_new = _soft_threshold(x - tau * (AH @ y), tau)
        Ax_prev = Ax
        Ax = A @ x_new
        x = x_new

        objective = float(np.sum(np.abs(x)))
        objectives.append(objective)
        violation = float(np.linalg.norm(Ax - b)) - eta
        if violation <= feas_tol and len(objectives) == objectives.maxlen:
            spread = max(objectives) - min(objectives)
            if spread <= tol * max(1.0, objective):
                converged = True
                break

    residual_norm = float(np.linalg.norm(A @ x - b))
    if not converged:
        # returned anyway; callers decide whether a flagged iterate is usable
        pass
    return RecoveryResult(
        coefficients=x,
        support=np.flatnonzero(x),
        residual_norm=residual_norm,
        iterations=iterations,
        method="qcbp",
        diagnostics={
            "converged": converged,
            "eta": float(eta),
            "constraint_violation": residual_norm - float(eta),
            "objective": float(np.sum(np.abs(x))),
            "operator_norm": op_norm,
            "step_size": step,
        },
    )


def least_squares(system):
    """Ordinary least squares through a rank-revealing factorization.

    For underdetermined or rank-deficient systems the minimum-norm
    solution is returned and flagged; the singular-value based condition
    estimate lands in the diagnostics.
    """
    A, b = _as_system_arrays(system)
    m, n = A.shape
    x, _, rank, sv = np.linalg.lstsq(A, b, rcond=None)
    minimum_norm = (m < n) or (rank < n)
    cond = float(sv[0] / sv[rank - 1]) if rank > 0 else np.inf
    return RecoveryResult(
        coefficients=x,
        support=np.flatnonzero(x),
        residual_norm=float(np.linalg.norm(A @ x - b)),
        iterations=0,
        method="lsq",
        diagnostics={
            "rank": int(rank),
            "minimum_norm": bool(minimum_norm),
            "condition_estimate": cond,
        },
    )


def oracle_eta(system, reference_coefficients):
    """Constraint radius from a precomputed reference: ||A c_ref - b||_2."""
    coeffs = np.asarray(reference_coefficients, dtype=complex).ravel()
    return float(np.linalg.norm(system.matrix @ coeffs - system.rhs))


def reference_coefficients(
    coefficient,
    f_evaluator,
    index_set,
    rng,
    oversample=4,
    lsmr_above=1000,
):
    """Reference solve on a fresh oversampled system (m = oversample * N).

    Small systems go through a dense least-squares factorization; large
    ones through LSMR at tolerance 1e-12, which agrees with the dense
    solution to working precision for these well-conditioned full-rank
    systems at a fraction of the cost.
    """
    rng = np.random.default_rng(rng)
    n = index_set.size
    m_ref = int(oversample) * n
    points = rng.random((m_ref, index_set.dimension))
    ref_system = assemble(coefficient, f_evaluator, index_set, points)
    A, b = ref_system.matrix, ref_system.rhs
    if n <= lsmr_above:
        coeffs = scipy_lstsq(A, b, lapack_driver="gelsy", check_finite=False)[0]
    else:
        op = LinearOperator(
            A.shape,
            matvec=lambda v: A @ v,
            rmatvec=lambda w: (w.conj() @ A).conj(),
            dtype=complex,
        )
        coeffs = lsmr(op, b, atol=1e-12, btol=1e-12, maxiter=50 * int(np.sqrt(n)) + 500)[0]
    return coeffs
