"""Experiment drivers reproducing the standard studies as result tables.

Every study runs independent trials of the full pipeline (sample points,
assemble, solve, measure the error against the exact solution) and
aggregates errors with geometric statistics.  Trials draw from dedicated
counter-based RNG streams keyed by (master seed, purpose, m, trial), so
tables are bit-reproducible and trials can run in any order or in
parallel without changing the output.
"""

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .assembly import assemble, assemble_for_solution, sample_collocation_points
from .evaluation import geometric_stats, relative_l2_error, success_rate
from .index_sets import build_hyperbolic_cross, largest_order_within_budget
from .problem import (
    builtin_coefficient,
    forcing_term,
    load_coefficient_csv,
    make_nonsparse_solution,
    make_sparse_solution,
)
from .recovery import least_squares, omp, oracle_eta, qcbp, reference_coefficients
from .spectral import synthesize

__all__ = [
    "ExperimentConfig",
    "ErrorSample",
    "SweepResult",
    "run_sweep",
    "run_indexset_study",
    "run_phase_transition",
    "write_rows_csv",
    "config_hash",
]

# purpose tags for RNG substreams
_POINTS, _SOLUTION, _ERROR, _ORACLE, _PLANT = 0, 1, 2, 3, 4


def substream(master_seed, *key):
    """Independent generator for (master seed, purpose, ...) tuples."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class ExperimentConfig:
    """Resolved settings for one study; validated on construction."""

    dimension: int = 2
    order: int | None = None
    budget: int | None = None
    coefficient: str = "a1"
    solution: str = "u1"
    methods: tuple = ("omp", "qcbp")
    m_grid: tuple = (32, 64, 128, 256, 512, 1024)
    trials: int = 25
    seed: int = 0
    rhs_mode: str = "analytic"
    fd_step: float = 1e-3
    eta: object = "oracle"
    omp_iterations: int | None = None
    qcbp_max_iterations: int = 20_000
    qcbp_tol: float = 1e-9
    sparsity: int = 10
    error_points: int | None = None
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        grid = tuple(int(m) for m in self.m_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("m grid must be strictly increasing")
        self.m_grid = grid
        self.methods = tuple(self.methods)
        if self.order is None and self.budget is None:
            raise ValueError("either order or budget must be given")
        if self.rhs_mode not in ("analytic", "fd6"):
            raise ValueError(f"unknown rhs mode {self.rhs_mode!r}")

    def resolved_order(self):
        if self.order is not None:
            return int(self.order)
        return largest_order_within_budget(self.dimension, self.budget)


@dataclass
class ErrorSample:
    relative_l2: float
    seed: int
    trial: int
    m: int
    method: str
    converged: bool = True
    failed: bool = False


@dataclass
class SweepResult:
    rows: list
    samples: list
    config: dict
    config_hash: str


def config_hash(resolved):
    payload = json.dumps(resolved, sort_keys=True, default=str).encode()
    return hashlib.sha256(payload).hexdigest()[:12]


def _resolve(config, extra=None):
    resolved = asdict(config)
    resolved["resolved_order"] = config.resolved_order()
    if extra:
        resolved.update(extra)
    return resolved, config_hash(resolved)


def _make_coefficient(config):
    name = config.coefficient
    if isinstance(name, str) and name.endswith(".csv"):
        return load_coefficient_csv(name, config.dimension)
    return builtin_coefficient(name, config.dimension)


def _solution_for_trial(config, index_set, trial, shared):
    if config.solution == "u2":
        return shared["u2"]
    regime = {"u1": "u1", "u3": "u3", "phase": "phase"}[config.solution]
    rng = substream(config.seed, _SOLUTION, trial)
    return make_sparse_solution(index_set, config.sparsity, rng, regime=regime)


def _f_evaluator(coefficient, solution, config):
    def evaluate(pts):
        return forcing_term(
            coefficient, solution, pts, mode=config.rhs_mode, h=config.fd_step
        )

    return evaluate


def _solve(method, system, config, m, eta_value):
    if method == "omp":
        iters = config.omp_iterations or max(1, m // 2)
        return omp(system, iters)
    if method == "qcbp":
        return qcbp(
            system,
            eta_value,
            max_iterations=config.qcbp_max_iterations,
            tol=config.qcbp_tol,
        )
    if method == "lsq":
        return least_squares(system)
    raise ValueError(f"unknown method {method!r}")


def _planted_trial(config, index_set, coefficient, m, trial):
    rng_plant = substream(config.seed, _PLANT, trial)
    n = index_set.size
    support = rng_plant.choice(n, size=min(config.sparsity, n), replace=False)
    values = (
        rng_plant.standard_normal(support.size)
        + 1j * rng_plant.standard_normal(support.size)
    ) / np.sqrt(2.0)
    target = np.zeros(n, dtype=complex)
    target[support] = values

    points = sample_collocation_points(
        index_set.dimension, m, substream(config.seed, _POINTS, m, trial)
    )
    system = assemble(
        coefficient,
        lambda pts: np.zeros(pts.shape[0], dtype=complex),
        index_set,
        points,
        seed=(config.seed, trial),
    )
    system.rhs = system.matrix @ target

    samples = []
    scale = np.linalg.norm(target)
    for method in config.methods:
        eta_value = 0.0 if config.eta == "oracle" else float(config.eta)
        result = _solve(method, system, config, m, eta_value)
        err = float(np.linalg.norm(result.coefficients - target) / scale)
        samples.append(
            ErrorSample(
                relative_l2=err,
                seed=config.seed,
                trial=trial,
                m=m,
                method=method,
                converged=result.diagnostics.get("converged", True),
            )
        )
    return samples


def _manufactured_trial(config, index_set, coefficient, m, trial, shared):
    solution = _solution_for_trial(config, index_set, trial, shared)
    points = sample_collocation_points(
        index_set.dimension, m, substream(config.seed, _POINTS, m, trial)
    )
    system = assemble_for_solution(
        coefficient,
        solution,
        index_set,
        points,
        rhs_mode=config.rhs_mode,
        h=config.fd_step,
        seed=(config.seed, trial),
    )

    eta_value = None
    if "qcbp" in config.methods:
        if config.eta == "oracle":
            if config.solution == "u2":
                reference = shared["u2_reference"]
            else:
                reference = reference_coefficients(
                    coefficient,
                    _f_evaluator(coefficient, solution, config),
                    index_set,
                    substream(config.seed, _ORACLE, trial),
                )
            eta_value = oracle_eta(system, reference)
        else:
            eta_value = float(config.eta)

    n_error = config.error_points or 2 * index_set.size

    samples = []
    for k, method in enumerate(config.methods):
        result = _solve(method, system, config, m, eta_value)
        coeffs = result.coefficients
        err = relative_l2_error(
            solution.u,
            lambda pts: synthesize(coeffs, index_set, pts, basis="spectral"),
            index_set.dimension,
            n_error,
            substream(config.seed, _ERROR, m, trial, k),
        )
        samples.append(
            ErrorSample(
                relative_l2=err,
                seed=config.seed,
                trial=trial,
                m=m,
                method=method,
                converged=result.diagnostics.get("converged", True),
            )
        )
    return samples


def _shared_state(config, index_set, coefficient):
    shared = {}
    if config.solution == "u2":
        shared["u2"] = make_nonsparse_solution(config.dimension)
        if config.eta == "oracle" and "qcbp" in config.methods:
            shared["u2_reference"] = reference_coefficients(
                coefficient,
                _f_evaluator(coefficient, shared["u2"], config),
                index_set,
                substream(config.seed, _ORACLE),
            )
    return shared


def _run_trials(config, index_set, coefficient, m, shared):
    def job(trial):
        try:
            if config.solution == "planted":
                return _planted_trial(config, index_set, coefficient, m, trial)
            return _manufactured_trial(config, index_set, coefficient, m, trial, shared)
        except Exception:  # noqa: BLE001 - per-trial failures are recorded
            return [
                ErrorSample(
                    relative_l2=float("nan"),
                    seed=config.seed,
                    trial=trial,
                    m=m,
                    method=method,
                    converged=False,
                    failed=True,
                )
                for method in config.methods
            ]

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            per_trial = list(pool.map(job, range(config.trials)))
    else:
        per_trial = [job(t) for t in range(config.trials)]

    samples = []
    for entry in per_trial:
        samples.extend(s for s in entry if isinstance(s, ErrorSample))
    return samples


def run_sweep(config):
    """Geometric-mean error versus number of collocation points.

    One row per (m, method); rows with more than 20% failed trials are
    flagged rather than dropped.
    """
    resolved, digest = _resolve(config)
    order = config.resolved_order()
    index_set = build_hyperbolic_cross(config.dimension, order)
    coefficient = _make_coefficient(config)
    shared = _shared_state(config, index_set, coefficient)

    rows = []
    all_samples = []
    for m in config.m_grid:
        samples = _run_trials(config, index_set, coefficient, m, shared)
        all_samples.extend(samples)
        for method in config.methods:
            chunk = [s for s in samples if s.method == method]
            good = [s.relative_l2 for s in chunk if not s.failed]
            n_failed = sum(s.failed for s in chunk)
            if good:
                stats = geometric_stats(good)
            else:
                stats = None
            rows.append(
                {
                    "m": m,
                    "method": method,
                    "geo_mean": stats.geo_mean if stats else float("nan"),
                    "geo_std_factor": stats.geo_std_factor if stats else float("nan"),
                    "trials": config.trials,
                    "n_failed": n_failed,
                    "n_nonconverged": sum(not s.converged for s in chunk),
                    "n_clamped": stats.n_clamped if stats else 0,
                    "flagged": n_failed > 0.2 * config.trials,
                    "seed": config.seed,
                    "config_hash": digest,
                }
            )
    return SweepResult(rows=rows, samples=all_samples, config=resolved, config_hash=digest)


def run_indexset_study(config, orders):
    """Sweep repeated over a list of hyperbolic-cross orders."""
    rows = []
    results = {}
    for order in orders:
        sub = replace(config, order=int(order), budget=None)
        result = run_sweep(sub)
        results[int(order)] = result
        for row in result.rows:
            rows.append({"order": int(order), **row})
    return rows, results


def run_phase_transition(config, q_values, m_multipliers=(2, 4, 8), threshold=1e-6):
    """Success rate of exact sparse recovery versus number of points.

    The solution has q sine-product terms on distinct frequency pairs
    (complex sparsity s = 4q), OMP runs s iterations, and the m grid is
    laid out in multiples of s.  Errors are measured on 200 Monte Carlo
    points; success means relative error below the threshold.
    """
    resolved, digest = _resolve(
        config, {"q_values": list(q_values), "m_multipliers": list(m_multipliers)}
    )
    order = config.resolved_order()
    index_set = build_hyperbolic_cross(config.dimension, order)
    coefficient = _make_coefficient(config)

    rows = []
    for q in q_values:
        if q == 0:
            for mult in m_multipliers:
                rows.append(
                    {
                        "dimension": config.dimension,
                        "q": 0,
                        "s": 0,
                        "m": 0,
                        "success_rate": 1.0,
                        "trials": config.trials,
                        "n_failed": 0,
                        "seed": config.seed,
                        "config_hash": digest,
                    }
                )
            continue
        s = 4 * int(q)
        sub = replace(
            config,
            solution="phase",
            sparsity=int(q),
            methods=("omp",),
            omp_iterations=s,
            error_points=200,
            m_grid=tuple(mult * s for mult in m_multipliers),
        )
        shared = {}
        for m in sub.m_grid:
            samples = _run_trials(sub, index_set, coefficient, m, shared)
            good = [x.relative_l2 for x in samples if not x.failed]
            n_failed = sum(x.failed for x in samples)
            rows.append(
                {
                    "dimension": config.dimension,
                    "q": int(q),
                    "s": s,
                    "m": m,
                    "success_rate": success_rate(good, threshold) if good else 0.0,
                    "trials": config.trials,
                    "n_failed": n_failed,
                    "seed": config.seed,
                    "config_hash": digest,
                }
            )
    return rows, resolved, digest


def write_rows_csv(path, rows, config=None):
    """Write result rows as CSV with a JSON sidecar of the resolved config."""
    if not rows:
        raise ValueError("no rows to write")
    fields = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    if config is not None:
        sidecar = str(path) + ".config.json"
        with open(sidecar, "w") as fh:
            json.dump(config, fh, indent=2, sort_keys=True, default=str)
        return sidecar
    return None
