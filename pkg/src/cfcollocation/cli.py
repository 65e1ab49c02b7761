"""Command line driver: index sets, Riesz reports, and experiment tables.

Subcommands: ``indexset``, ``riesz``, ``sweep``, ``phase``,
``indexset-study``, ``dump-system``.  Tables are written as CSV with a
JSON sidecar recording the resolved configuration and its hash.  The exit
code is nonzero exactly when a hard error occurred.
"""

import argparse
import csv
import json
import sys

import numpy as np

from .assembly import assemble_for_solution, sample_collocation_points
from .experiments import (
    ExperimentConfig,
    run_indexset_study,
    run_phase_transition,
    run_sweep,
    substream,
    write_rows_csv,
)
from .index_sets import (
    build_hyperbolic_cross,
    hyperbolic_cross_size,
    largest_order_within_budget,
)
from .problem import (
    builtin_coefficient,
    load_coefficient_csv,
    make_nonsparse_solution,
    make_sparse_solution,
)
from .riesz import (
    estimate_tail_norms,
    gershgorin_interval,
    gram_closed_form,
    gram_quadrature_oracle,
    one_sparse_perturbation_bounds,
    sparse_plus_tail_bounds,
    spectral_interval,
)

__all__ = ["main"]


def _int_list(text):
    return tuple(int(v) for v in text.split(",") if v)


def _coefficient(name, dimension):
    if name.endswith(".csv"):
        return load_coefficient_csv(name, dimension)
    return builtin_coefficient(name, dimension)


def _add_common(parser):
    parser.add_argument("--dim", type=int, default=2, help="ambient dimension")
    parser.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    parser.add_argument("--out", type=str, default=None, help="output path")
    parser.add_argument("--threads", type=int, default=1)


def _add_sweep_options(parser):
    parser.add_argument("--order", type=int, default=None)
    parser.add_argument("--budget", type=int, default=None)
    parser.add_argument("--coefficient", type=str, default="a1")
    parser.add_argument("--solution", type=str, default="u1",
                        choices=["u1", "u2", "u3", "planted"])
    parser.add_argument("--methods", type=str, default="omp,qcbp",
                        help="comma list from omp,qcbp,lsq")
    parser.add_argument("--m-grid", type=str, default="32,64,128,256,512,1024")
    parser.add_argument("--trials", type=int, default=25)
    parser.add_argument("--rhs-mode", type=str, default="analytic",
                        choices=["analytic", "fd6"])
    parser.add_argument("--fd-step", type=float, default=1e-3)
    parser.add_argument("--eta", type=str, default="oracle",
                        help="'oracle' or a numeric constraint radius")
    parser.add_argument("--sparsity", type=int, default=10)
    parser.add_argument("--omp-iters", type=int, default=None)
    parser.add_argument("--max-iters", type=int, default=20_000,
                        help="QCBP iteration cap")
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--error-points", type=int, default=None)


def _config_from(args, **overrides):
    eta = args.eta if args.eta == "oracle" else float(args.eta)
    settings = dict(
        dimension=args.dim,
        order=args.order,
        budget=args.budget,
        coefficient=args.coefficient,
        solution=args.solution,
        methods=tuple(args.methods.split(",")),
        m_grid=_int_list(args.m_grid),
        trials=args.trials,
        seed=args.seed,
        rhs_mode=args.rhs_mode,
        fd_step=args.fd_step,
        eta=eta,
        omp_iterations=args.omp_iters,
        qcbp_max_iterations=args.max_iters,
        qcbp_tol=args.tol,
        sparsity=args.sparsity,
        error_points=args.error_points,
        threads=args.threads,
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


def _cmd_indexset(args):
    if args.order is None and args.budget is None:
        raise ValueError("indexset needs --order or --budget")
    order = args.order
    if order is None:
        order = largest_order_within_budget(args.dim, args.budget)
        print(f"largest order within budget {args.budget}: n = {order}")
        if order == 0:
            return
    size = hyperbolic_cross_size(args.dim, order)
    print(f"|hyperbolic cross(d={args.dim}, n={order})| = {size}")
    if args.out:
        index_set = build_hyperbolic_cross(args.dim, order)
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            for nu in index_set:
                writer.writerow(nu)
        print(f"wrote {size} multi-indices to {args.out}")


def _cmd_riesz(args):
    coefficient = _coefficient(args.coefficient, args.dim)
    index_set = build_hyperbolic_cross(args.dim, args.order)
    report_info = {
        "coefficient": args.coefficient,
        "dimension": args.dim,
        "order": args.order,
        "n_basis": index_set.size,
    }
    if coefficient.is_fourier_sparse:
        gram = gram_closed_form(coefficient, index_set)
        zero = (0,) * args.dim
        nonconstant = [
            (tau, val)
            for tau, val in coefficient.coefficients.items()
            if tau != zero
        ]
        if len(nonconstant) == 2:
            # conjugate pair: a one-sparse perturbation up to symmetry
            tau, val = nonconstant[0]
            report = one_sparse_perturbation_bounds(
                coefficient.coefficients.get(zero, 0.0), val, tau
            )
        else:
            report = sparse_plus_tail_bounds(coefficient, index_set.size)
    else:
        gram = gram_quadrature_oracle(coefficient, index_set, args.grid_resolution)
        constant = float(np.real(np.mean(coefficient.value(
            substream(args.seed, 9).random((args.tail_samples, args.dim))
        ))))
        tails = estimate_tail_norms(
            coefficient, constant, n_samples=args.tail_samples, seed=args.seed
        )
        sparse_part = builtin_coefficient("a1", args.dim)
        sparse_part = type(sparse_part)(
            args.dim, {(0,) * args.dim: constant}, a_min=min(constant, 1.0)
        )
        report = sparse_plus_tail_bounds(
            sparse_part,
            index_set.size,
            t=0,
            tail_h1_seminorm=tails["tail_h1_seminorm"],
            tail_l2=tails["tail_l2"],
            tail_linf=tails["tail_linf"],
            tail_grad_linf_sum=tails["tail_grad_linf_sum"],
            details=tails,
        )
    report.spectral_interval = spectral_interval(gram)
    payload = report.to_dict()
    payload.update(report_info)
    payload["gershgorin_interval"] = gershgorin_interval(gram)
    text = json.dumps(payload, indent=2, default=str)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote report to {args.out}")
    else:
        print(text)


def _cmd_sweep(args):
    config = _config_from(args)
    result = run_sweep(config)
    for row in result.rows:
        print(
            f"m={row['m']:>5d}  {row['method']:>4s}  geo_mean={row['geo_mean']:.3e}"
            f"  spread={row['geo_std_factor']:.3f}"
            + ("  FLAGGED" if row["flagged"] else "")
        )
    if args.out:
        sidecar = write_rows_csv(args.out, result.rows, result.config)
        print(f"wrote {args.out} and {sidecar}")


def _cmd_phase(args):
    config = _config_from(args, solution="u1", methods=("omp",))
    rows, resolved, _ = run_phase_transition(
        config, _int_list(args.q), m_multipliers=_int_list(args.m_multipliers)
    )
    for row in rows:
        print(
            f"d={row['dimension']}  q={row['q']:>2d}  m={row['m']:>4d}  "
            f"success={row['success_rate']:.2f}"
        )
    if args.out:
        sidecar = write_rows_csv(args.out, rows, resolved)
        print(f"wrote {args.out} and {sidecar}")


def _cmd_indexset_study(args):
    config = _config_from(args)
    rows, results = run_indexset_study(config, _int_list(args.orders))
    for row in rows:
        print(
            f"n={row['order']:>3d}  m={row['m']:>5d}  {row['method']:>4s}  "
            f"geo_mean={row['geo_mean']:.3e}"
        )
    if args.out:
        any_result = next(iter(results.values()))
        sidecar = write_rows_csv(args.out, rows, any_result.config)
        print(f"wrote {args.out} and {sidecar}")


def _cmd_dump_system(args):
    coefficient = _coefficient(args.coefficient, args.dim)
    index_set = build_hyperbolic_cross(args.dim, args.order)
    if args.solution == "u2":
        solution = make_nonsparse_solution(args.dim)
    else:
        regime = "u3" if args.solution == "u3" else "u1"
        solution = make_sparse_solution(
            index_set, args.sparsity, substream(args.seed, 1), regime=regime
        )
    points = sample_collocation_points(args.dim, args.m, substream(args.seed, 0))
    system = assemble_for_solution(
        coefficient, solution, index_set, points, rhs_mode=args.rhs_mode
    )

    def interleave(block):
        stacked = np.empty(block.shape + (2,))
        stacked[..., 0] = block.real
        stacked[..., 1] = block.imag
        return stacked.reshape(block.shape[0], -1)

    matrix_path = f"{args.out}_A.csv"
    rhs_path = f"{args.out}_b.csv"
    np.savetxt(matrix_path, interleave(system.matrix), delimiter=",")
    np.savetxt(rhs_path, interleave(system.rhs[:, None]), delimiter=",")
    print(f"wrote {matrix_path} ({system.n_points}x{system.n_indices}, re/im pairs)")
    print(f"wrote {rhs_path}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cfc",
        description="Compressive Fourier collocation for periodic diffusion equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indexset", help="hyperbolic-cross size and index list")
    _add_common(p)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(handler=_cmd_indexset)

    p = sub.add_parser("riesz", help="Riesz constants and Gram spectrum report")
    _add_common(p)
    p.add_argument("--coefficient", type=str, default="a1")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--grid-resolution", type=int, default=64)
    p.add_argument("--tail-samples", type=int, default=100_000)
    p.set_defaults(handler=_cmd_riesz)

    p = sub.add_parser("sweep", help="geometric-mean error versus m")
    _add_common(p)
    _add_sweep_options(p)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("phase", help="success rate of sparse recovery versus m")
    _add_common(p)
    _add_sweep_options(p)
    p.add_argument("--q", type=str, default="4,8", help="comma list of term counts")
    p.add_argument("--m-multipliers", type=str, default="2,4,8",
                   help="m grid in multiples of the complex sparsity s=4q")
    p.set_defaults(handler=_cmd_phase)

    p = sub.add_parser("indexset-study", help="sweep repeated over several orders")
    _add_common(p)
    _add_sweep_options(p)
    p.add_argument("--orders", type=str, required=True, help="comma list of orders")
    p.set_defaults(handler=_cmd_indexset_study)

    p = sub.add_parser("dump-system", help="write A and b as re/im CSV files")
    _add_common(p)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--coefficient", type=str, default="a1")
    p.add_argument("--solution", type=str, default="u1", choices=["u1", "u2", "u3"])
    p.add_argument("--sparsity", type=int, default=10)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rhs-mode", type=str, default="analytic",
                   choices=["analytic", "fd6"])
    p.set_defaults(handler=_cmd_dump_system)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.handler(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
