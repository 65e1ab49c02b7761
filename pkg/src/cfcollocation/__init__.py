"""Compressive Fourier collocation for periodic diffusion equations.

Sparse spectral solver for -div(a grad u) = f on the d-dimensional torus:
hyperbolic-cross truncation, Monte Carlo collocation, recovery by greedy
pursuit or l1 minimization, and the Riesz-system analysis that backs the
recovery guarantees.
"""

from .assembly import (
    CollocationSystem,
    assemble,
    assemble_for_solution,
    sample_collocation_points,
    truncation_error_for_system,
    truncation_error_vector,
)
from .estimator import CompressiveFourierCollocation
from .evaluation import (
    best_s_term_error,
    geometric_stats,
    mc_l2_norm,
    relative_l2_error,
    success_rate,
)
from .experiments import (
    ExperimentConfig,
    run_indexset_study,
    run_phase_transition,
    run_sweep,
)
from .index_sets import (
    IndexSet,
    build_hyperbolic_cross,
    cardinality_upper_bound,
    hyperbolic_cross_size,
    largest_order_within_budget,
)
from .problem import (
    CallableCoefficient,
    DiffusionCoefficient,
    FourierSparseCoefficient,
    ManufacturedSolution,
    builtin_coefficient,
    forcing_term,
    make_nonsparse_solution,
    make_sparse_solution,
    sine_product_solution,
)
from .recovery import (
    RecoveryResult,
    least_squares,
    omp,
    oracle_eta,
    qcbp,
    reference_coefficients,
)
from .riesz import (
    GramMatrix,
    RieszReport,
    empirical_rip_constant,
    gershgorin_interval,
    gram_closed_form,
    gram_quadrature_oracle,
    one_sparse_perturbation_bounds,
    riesz_sandwich_check,
    sparse_plus_tail_bounds,
    spectral_interval,
)
from .spectral import (
    convert_coefficients,
    eval_fourier,
    eval_phi,
    eval_spectral_basis,
    fourier_matrix,
    phi_matrix,
    synthesize,
)

__version__ = "0.1.0"
