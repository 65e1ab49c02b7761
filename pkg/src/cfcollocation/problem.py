"""Diffusion coefficients, manufactured solutions, and forcing terms.

The test problems are manufactured: an exact solution u is fixed, the
forcing f = -div(a grad u) is computed from it (analytically by default,
or through a sixth-order finite-difference scheme), and the solver output
is compared against u.  Everything here is evaluated through the complex
pipeline; realness of the built-in problems is a testable symmetry, not an
assumption.
"""

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.integrate import quad

from .spectral import FOUR_PI_SQ, TWO_PI, as_points, convert_coefficients

__all__ = [
    "DiffusionCoefficient",
    "FourierSparseCoefficient",
    "CallableCoefficient",
    "ManufacturedSolution",
    "builtin_coefficient",
    "load_coefficient_csv",
    "sine_product_solution",
    "make_sparse_solution",
    "make_nonsparse_solution",
    "forcing_term",
    "FD6_STENCIL",
]

# 7-point sixth-order central first-derivative stencil (divided by h).
FD6_STENCIL = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
FD6_OFFSETS = np.arange(-3, 4)


class DiffusionCoefficient:
    """Diffusion field a(x) on the torus with an elliptic lower bound."""

    is_fourier_sparse = False

    def __init__(self, dimension, a_min):
        self.dimension = int(dimension)
        self.a_min = float(a_min)
        if self.a_min <= 0:
            raise ValueError("ellipticity requires a_min > 0")

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def min_sampled_real(self, n_samples=10_000, seed=0):
        """Minimum of Re a(x) over uniform random samples (ellipticity check)."""
        rng = np.random.default_rng(seed)
        pts = rng.random((int(n_samples), self.dimension))
        return float(np.min(np.real(self.value(pts))))


class FourierSparseCoefficient(DiffusionCoefficient):
    """a(x) = sum_tau e_tau F_tau(x) with a finite coefficient map.

    When ``declared_real`` the map must satisfy e_{-tau} = conj(e_tau).
    """

    is_fourier_sparse = True

    def __init__(self, dimension, coefficients, a_min, declared_real=True):
        super().__init__(dimension, a_min)
        items = sorted(
            ((tuple(int(c) for c in tau), complex(v)) for tau, v in coefficients.items())
        )
        self.coefficients = dict(items)
        self.frequencies = np.array([tau for tau, _ in items], dtype=np.int64).reshape(
            -1, self.dimension
        )
        self.values = np.array([v for _, v in items], dtype=complex)
        self.declared_real = bool(declared_real)
        if self.declared_real:
            for tau, v in self.coefficients.items():
                mirror = tuple(-c for c in tau)
                partner = self.coefficients.get(mirror)
                if partner is None or abs(partner - v.conjugate()) > 1e-14 * (1 + abs(v)):
                    raise ValueError(
                        "real-valued coefficient needs conjugate-symmetric terms; "
                        f"offending frequency {tau}"
                    )

    def value(self, x):
        pts = as_points(x, self.dimension)
        phases = np.exp(2j * np.pi * (pts @ self.frequencies.T.astype(float)))
        return phases @ self.values

    def gradient(self, x):
        pts = as_points(x, self.dimension)
        taus = self.frequencies.astype(float)
        phases = np.exp(2j * np.pi * (pts @ taus.T))
        return phases @ (2j * np.pi * taus * self.values[:, None])


class CallableCoefficient(DiffusionCoefficient):
    """a(x) given by evaluation procedures for the value and the gradient."""

    def __init__(self, dimension, fn, grad_fn, a_min):
        super().__init__(dimension, a_min)
        self._fn = fn
        self._grad_fn = grad_fn

    def value(self, x):
        return np.asarray(self._fn(as_points(x, self.dimension)), dtype=complex)

    def gradient(self, x):
        return np.asarray(self._grad_fn(as_points(x, self.dimension)), dtype=complex)


def builtin_coefficient(name, dimension=2):
    """The three built-in diffusion coefficients: constant, sparse, nonsparse.

    a1 is identically one; a2 adds two sine modes (seven Fourier terms);
    a3 = 1 + 0.2 exp(sin(2 pi x1) sin(2 pi x2)) is not band-limited and is
    represented by callables with an analytic gradient.
    """
    d = int(dimension)
    if name == "a1":
        return FourierSparseCoefficient(d, {(0,) * d: 1.0}, a_min=1.0)
    if d < 2:
        raise ValueError(f"{name} requires dimension >= 2")
    if name == "a2":
        def tau(i, j):
            t = [0] * d
            t[0], t[1] = i, j
            return tuple(t)

        coeffs = {
            tau(0, 0): 1.0,
            # 0.25 sin(2 pi x1) sin(2 pi x2) expands into four terms
            tau(1, 1): -1 / 16,
            tau(-1, -1): -1 / 16,
            tau(1, -1): 1 / 16,
            tau(-1, 1): 1 / 16,
            # 0.25 sin(4 pi x1) expands into two terms
            tau(2, 0): -0.125j,
            tau(-2, 0): 0.125j,
        }
        return FourierSparseCoefficient(d, coeffs, a_min=0.5)
    if name == "a3":
        def fn(pts):
            s1 = np.sin(TWO_PI * pts[:, 0])
            s2 = np.sin(TWO_PI * pts[:, 1])
            return 1.0 + 0.2 * np.exp(s1 * s2)

        def grad_fn(pts):
            s1 = np.sin(TWO_PI * pts[:, 0])
            s2 = np.sin(TWO_PI * pts[:, 1])
            c1 = np.cos(TWO_PI * pts[:, 0])
            c2 = np.cos(TWO_PI * pts[:, 1])
            core = 0.2 * TWO_PI * np.exp(s1 * s2)
            out = np.zeros((pts.shape[0], d))
            out[:, 0] = core * c1 * s2
            out[:, 1] = core * s1 * c2
            return out

        return CallableCoefficient(d, fn, grad_fn, a_min=1.0 + 0.2 * math.exp(-1.0))
    raise ValueError(f"unknown coefficient {name!r}")


def load_coefficient_csv(path, dimension):
    """Load a Fourier-sparse coefficient from rows (nu_1..nu_d, Re, Im).

    Ellipticity is verified by sampling; the sampled minimum becomes a_min.
    """
    d = int(dimension)
    coeffs = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != d + 2:
                raise ValueError(
                    f"expected {d + 2} columns (frequency, Re, Im), got {len(row)}"
                )
            tau = tuple(int(c) for c in row[:d])
            coeffs[tau] = float(row[d]) + 1j * float(row[d + 1])
    probe = FourierSparseCoefficient(d, coeffs, a_min=1.0, declared_real=False)
    a_min = probe.min_sampled_real()
    if a_min <= 0:
        raise ValueError(f"coefficient is not elliptic: sampled min Re(a) = {a_min}")
    return FourierSparseCoefficient(d, coeffs, a_min=a_min, declared_real=False)


@dataclass
class ManufacturedSolution:
    """Exact solution with analytic derivatives and known Fourier content.

    ``fourier_terms`` is the complete complex-exponential expansion when it
    is finite; ``fourier_coefficient_fn`` maps a frequency to its exact
    coefficient when a closed form is known (possibly for infinitely many
    modes).  ``sparsity_label`` counts the complex exponentials of the
    construction, with multiplicity.
    """

    dimension: int
    name: str
    u: object
    grad_u: object
    laplacian_u: object
    fourier_terms: dict | None = None
    fourier_coefficient_fn: object = None
    sparsity_label: int | None = None
    meta: dict = field(default_factory=dict)

    def fourier_coefficients_on(self, index_set):
        """Exact Fourier-basis coefficients aligned with the index set."""
        if self.fourier_terms is not None:
            return np.array(
                [self.fourier_terms.get(nu, 0.0) for nu in index_set], dtype=complex
            )
        if self.fourier_coefficient_fn is not None:
            return np.array(
                [self.fourier_coefficient_fn(nu) for nu in index_set], dtype=complex
            )
        raise ValueError(f"{self.name} carries no exact Fourier coefficients")

    def spectral_coefficients_on(self, index_set):
        return convert_coefficients(
            self.fourier_coefficients_on(index_set), index_set, "fourier_to_spectral"
        )


def sine_product_solution(dimension, terms, name="sine-product"):
    """u(x) = sum_k d_k prod_{l active} sin(2 pi m_{k,l} x_l).

    ``terms`` is a sequence of (amplitude, frequency tuple) pairs; zero
    components of a frequency are inactive (no sine factor).  Each term
    expands into 2^(#active) complex exponentials, which defines the
    sparsity label; exponentials shared by duplicate frequency tuples are
    merged in the exact coefficient map.
    """
    d = int(dimension)
    amps = np.array([float(a) for a, _ in terms])
    freqs = np.array([[int(c) for c in m] for _, m in terms], dtype=np.int64).reshape(
        -1, d
    )
    if np.any(freqs < 0):
        raise ValueError("sine-product frequencies must be nonnegative")
    active = [np.flatnonzero(freqs[k]) for k in range(len(terms))]
    if any(len(act) == 0 for act in active):
        raise ValueError("a term with no active frequency is identically zero")

    def term_values(pts, k):
        act = active[k]
        return np.prod(np.sin(TWO_PI * pts[:, act] * freqs[k, act]), axis=1)

    def u(x):
        pts = as_points(x, d)
        out = np.zeros(pts.shape[0])
        for k in range(len(terms)):
            out += amps[k] * term_values(pts, k)
        return out

    def grad_u(x):
        pts = as_points(x, d)
        out = np.zeros((pts.shape[0], d))
        for k, act in enumerate(active):
            sines = np.sin(TWO_PI * pts[:, act] * freqs[k, act])
            for pos, l in enumerate(act):
                rest = np.prod(np.delete(sines, pos, axis=1), axis=1)
                out[:, l] += (
                    amps[k]
                    * TWO_PI
                    * freqs[k, l]
                    * np.cos(TWO_PI * freqs[k, l] * pts[:, l])
                    * rest
                )
        return out

    def laplacian_u(x):
        pts = as_points(x, d)
        out = np.zeros(pts.shape[0])
        for k in range(len(terms)):
            sq = float(np.sum(freqs[k].astype(float) ** 2))
            out += -FOUR_PI_SQ * sq * amps[k] * term_values(pts, k)
        return out

    expansion = {}
    label = 0
    for k, act in enumerate(active):
        label += 2 ** len(act)
        base = amps[k] * (1.0 / 2j) ** len(act)
        for signs in product((1, -1), repeat=len(act)):
            nu = np.zeros(d, dtype=np.int64)
            nu[act] = np.array(signs) * freqs[k, act]
            key = tuple(int(c) for c in nu)
            expansion[key] = expansion.get(key, 0.0) + base * np.prod(signs)

    return ManufacturedSolution(
        dimension=d,
        name=name,
        u=u,
        grad_u=grad_u,
        laplacian_u=laplacian_u,
        fourier_terms=expansion,
        sparsity_label=label,
        meta={"amplitudes": amps, "frequencies": freqs},
    )


def _two_active_patterns(index_set):
    """Positive representatives of the 2-active members of an index set."""
    rows = index_set.indices
    mask = np.sum(rows != 0, axis=1) == 2
    pos = np.unique(np.abs(rows[mask]), axis=0)
    return pos


def make_sparse_solution(index_set, q, rng, regime="u1"):
    """Random sparse sine-product solution supported inside the index set.

    Regimes: ``u1`` draws q independent frequency pairs uniformly from
    {1..5}^2 acting on the first two variables; ``phase`` draws q distinct
    pairs from {1..4}^2 (error if q exceeds the 16 available); ``u3`` draws
    q two-active frequency patterns uniformly from the index set.  Each
    term expands into 4 complex exponentials, so the sparsity label is 4q.
    """
    rng = np.random.default_rng(rng)
    d = index_set.dimension
    if d < 2:
        raise ValueError("sparse sine-product solutions need dimension >= 2")
    q = int(q)
    if q < 1:
        raise ValueError("q must be >= 1")

    if regime == "u1":
        pairs = rng.integers(1, 6, size=(q, 2))
    elif regime == "phase":
        if q > 16:
            raise ValueError("at most 16 distinct frequency pairs in {1..4}^2")
        chosen = rng.choice(16, size=q, replace=False)
        pairs = np.column_stack((chosen // 4 + 1, chosen % 4 + 1))
    elif regime == "u3":
        patterns = _two_active_patterns(index_set)
        if len(patterns) == 0:
            raise ValueError("index set has no two-active members to draw from")
        pairs = patterns[rng.integers(0, len(patterns), size=q)]
    else:
        raise ValueError(f"unknown regime {regime!r}")

    amps = rng.random(q)
    freqs = np.zeros((q, d), dtype=np.int64)
    if regime == "u3":
        freqs = pairs.astype(np.int64)
    else:
        freqs[:, 0] = pairs[:, 0]
        freqs[:, 1] = pairs[:, 1]

    solution = sine_product_solution(
        d, list(zip(amps, freqs)), name=f"sparse-{regime}"
    )
    for nu in solution.fourier_terms:
        if not index_set.contains(nu):
            raise ValueError(
                f"index set of order {index_set.order} does not contain "
                f"frequency {nu} of the drawn solution"
            )
    return solution


@lru_cache(maxsize=1)
def _exp_sine_mean():
    # integral of exp(sin(2 pi t)) over one period, by adaptive quadrature
    val, _ = quad(
        lambda t: math.exp(math.sin(TWO_PI * t)), 0.0, 1.0, epsabs=1e-12, epsrel=1e-12
    )
    return val


def make_nonsparse_solution(dimension):
    """u(x) = exp(sin(2 pi x1) + sin(2 pi x2)) - c, mean zero over the torus.

    Only the first two variables are active regardless of the ambient
    dimension.  The centering constant c is the squared one-dimensional
    mean of exp(sin), computed once by adaptive quadrature and cached; the
    exact Fourier coefficients are products of modified Bessel values, so
    the expansion is known in closed form even though it is not sparse.
    """
    from scipy.special import iv

    d = int(dimension)
    if d < 2:
        raise ValueError("the nonsparse solution needs dimension >= 2")
    c = _exp_sine_mean() ** 2

    def core(pts):
        return np.exp(np.sin(TWO_PI * pts[:, 0]) + np.sin(TWO_PI * pts[:, 1]))

    def u(x):
        return core(as_points(x, d)) - c

    def grad_u(x):
        pts = as_points(x, d)
        e = core(pts)
        out = np.zeros((pts.shape[0], d))
        out[:, 0] = TWO_PI * np.cos(TWO_PI * pts[:, 0]) * e
        out[:, 1] = TWO_PI * np.cos(TWO_PI * pts[:, 1]) * e
        return out

    def laplacian_u(x):
        pts = as_points(x, d)
        e = core(pts)
        out = np.zeros(pts.shape[0])
        for l in (0, 1):
            cl = np.cos(TWO_PI * pts[:, l])
            sl = np.sin(TWO_PI * pts[:, l])
            out += FOUR_PI_SQ * (cl * cl - sl) * e
        return out

    def fourier_coefficient(nu):
        nu = tuple(int(v) for v in np.asarray(nu).ravel())
        if any(v != 0 for v in nu[2:]):
            return 0.0
        coeff = complex(1.0)
        for k in nu[:2]:
            coeff *= iv(abs(k), 1.0) * (-1j) ** k
        if all(v == 0 for v in nu):
            coeff -= c
        return coeff

    return ManufacturedSolution(
        dimension=d,
        name="exp-sine",
        u=u,
        grad_u=grad_u,
        laplacian_u=laplacian_u,
        fourier_coefficient_fn=fourier_coefficient,
        meta={"centering_constant": c},
    )


def _fd6_directional(fn, pts, axis, h):
    # sixth-order central first derivative of fn along one axis
    out = None
    for c, k in zip(FD6_STENCIL, FD6_OFFSETS):
        if c == 0.0:
            continue
        shifted = pts.copy()
        shifted[:, axis] += k * h
        contrib = c * np.asarray(fn(shifted))
        out = contrib if out is None else out + contrib
    return out / h


def forcing_term(coefficient, solution, x, mode="analytic", h=1e-3):
    """f(x) = [-div(a grad u)](x), analytically or via FD6 stencils.

    The analytic mode needs grad_u and laplacian_u; the FD6 mode composes
    two sixth-order first-difference stencils in divergence form and needs
    only pointwise values of u and a.
    """
    pts = as_points(x, solution.dimension)
    single = np.asarray(x, dtype=float).ndim == 1
    if mode == "analytic":
        if solution.grad_u is None or solution.laplacian_u is None:
            raise ValueError("analytic forcing needs grad_u and laplacian_u")
        grads_a = coefficient.gradient(pts)
        vals = -(
            np.sum(grads_a * solution.grad_u(pts), axis=1)
            + coefficient.value(pts) * solution.laplacian_u(pts)
        )
    elif mode == "fd6":
        def flux(axis):
            def g(p):
                return coefficient.value(p) * _fd6_directional(solution.u, p, axis, h)

            return g

        vals = 0.0
        for axis in range(solution.dimension):
            vals = vals - _fd6_directional(flux(axis), pts, axis, h)
    else:
        raise ValueError(f"unknown forcing mode {mode!r}")
    vals = np.asarray(vals, dtype=complex)
    return vals[0] if single else vals
