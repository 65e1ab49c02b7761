"""Hyperbolic-cross multi-index sets on Z^d.

The truncation sets used throughout this package are hyperbolic crosses:
all frequency vectors nu in Z^d with prod_l (|nu_l| + 1) <= n, minus the
zero vector.  Their cardinality grows slowly with the dimension d at fixed
order n, which is what makes the method viable in high dimension.
"""

import math
import sys
from functools import lru_cache

import numpy as np

__all__ = [
    "IndexSet",
    "build_hyperbolic_cross",
    "hyperbolic_cross_size",
    "in_hyperbolic_cross",
    "cardinality_upper_bound",
    "largest_order_within_budget",
    "UNBOUNDED",
]

# Sentinel returned by cardinality_upper_bound when the bound overflows
# double precision.  Never wraps around silently.
UNBOUNDED = math.inf


def _check_positive_int(value, name):
    if not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return int(value)


class IndexSet:
    """Ordered set of frequency multi-indices nu in Z^d (zero excluded).

    Indices are stored as an (N, d) integer array in strict lexicographic
    order (componentwise integer comparison, negatives first).  The order
    is part of the contract: it fixes the column ordering of every
    collocation matrix and coefficient vector built on top of the set.
    """

    def __init__(self, dimension, order, indices):
        self.dimension = int(dimension)
        self.order = int(order)
        self.indices = np.asarray(indices, dtype=np.int64).reshape(-1, self.dimension)
        self.indices.setflags(write=False)
        self._positions = {
            tuple(int(c) for c in row): i for i, row in enumerate(self.indices)
        }
        # float copy: used as denominator ||nu||^2 all over the spectral code
        self.squared_norms = np.sum(self.indices.astype(float) ** 2, axis=1)
        self.squared_norms.setflags(write=False)

    @property
    def size(self):
        return self.indices.shape[0]

    def __len__(self):
        return self.size

    def __iter__(self):
        for row in self.indices:
            yield tuple(int(c) for c in row)

    def __repr__(self):
        return (
            f"IndexSet(dimension={self.dimension}, order={self.order}, "
            f"size={self.size})"
        )

    def contains(self, nu):
        return tuple(int(c) for c in np.asarray(nu).ravel()) in self._positions

    def index_of(self, nu):
        """Position of ``nu`` in the ordering.  KeyError if absent."""
        return self._positions[tuple(int(c) for c in np.asarray(nu).ravel())]

    def positions_of(self, frequencies):
        """Positions of an (k, d) array of frequencies, -1 where absent."""
        freq = np.asarray(frequencies, dtype=np.int64).reshape(-1, self.dimension)
        out = np.empty(freq.shape[0], dtype=np.int64)
        for i, row in enumerate(freq):
            out[i] = self._positions.get(tuple(int(c) for c in row), -1)
        return out


def in_hyperbolic_cross(nu, order):
    """Membership predicate: prod(|nu_l| + 1) <= order and nu != 0."""
    comps = [abs(int(c)) for c in np.asarray(nu).ravel()]
    if all(c == 0 for c in comps):
        return False
    prod = 1
    for c in comps:
        prod *= c + 1
        if prod > order:
            return False
    return True


def build_hyperbolic_cross(dimension, order):
    """Enumerate the hyperbolic cross of given order, zero index removed.

    The enumeration walks dimension by dimension, bounding each component
    by the remaining multiplicative budget, so the cost is proportional to
    the size of the output rather than to the (exponentially large)
    bounding box.  Components are visited in ascending order, which yields
    the lexicographic ordering directly.
    """
    d = _check_positive_int(dimension, "dimension")
    n = _check_positive_int(order, "order")

    out = []
    point = [0] * d

    def recurse(level, budget):
        if level == d:
            out.append(tuple(point))
            return
        limit = budget - 1  # |v| + 1 <= budget
        for v in range(-limit, limit + 1):
            point[level] = v
            recurse(level + 1, budget // (abs(v) + 1))
        point[level] = 0

    recurse(0, n)
    zero = (0,) * d
    indices = [p for p in out if p != zero]
    return IndexSet(d, n, np.array(indices, dtype=np.int64).reshape(-1, d))


@lru_cache(maxsize=None)
def _box_count(dims_left, budget):
    # number of integer vectors (length dims_left, zero allowed) with
    # prod(|v_l| + 1) <= budget
    if dims_left == 0:
        return 1
    total = 0
    for p in range(1, budget + 1):  # p = |v| + 1
        total += (1 if p == 1 else 2) * _box_count(dims_left - 1, budget // p)
    return total


def hyperbolic_cross_size(dimension, order):
    """|hyperbolic cross| without materializing it (zero index excluded)."""
    d = _check_positive_int(dimension, "dimension")
    n = _check_positive_int(order, "order")
    return _box_count(d, n) - 1


def cardinality_upper_bound(dimension, order):
    """Analytic upper bound min{4 n^5 16^d, e^2 n^(2 + log2 d)} on |set|.

    Evaluated in log space and rounded up; saturates to ``UNBOUNDED`` when
    the value exceeds double precision instead of wrapping around.
    """
    d = _check_positive_int(dimension, "dimension")
    n = _check_positive_int(order, "order")
    log_n = math.log(n)
    log_first = math.log(4.0) + 5.0 * log_n + d * math.log(16.0)
    log_second = 2.0 + (2.0 + math.log2(d)) * log_n
    smallest = min(log_first, log_second)
    if smallest > math.log(sys.float_info.max) - 1.0:
        return UNBOUNDED
    return int(math.ceil(math.exp(smallest)))


def largest_order_within_budget(dimension, budget):
    """Largest order with a nonempty set strictly smaller than ``budget``.

    Returns 0 when no order yields a nonempty set below the budget.
    """
    d = _check_positive_int(dimension, "dimension")
    b = _check_positive_int(budget, "budget")
    best = 0
    n = 1
    while True:
        size = hyperbolic_cross_size(d, n)
        if size >= b:
            return best
        if size > 0:
            best = n
        n += 1
