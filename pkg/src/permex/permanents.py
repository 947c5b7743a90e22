"""Exact permanents, subpermanent profiles, and the brute-force ensemble oracle.

perm_m of an n x n matrix is the sum, over all ways to pick m rows and m
columns, of the permanent of the selected m x m submatrix.  Everything in
this module is exact integer or rational arithmetic.
"""

import concurrent.futures
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from itertools import combinations, permutations
from typing import NamedTuple

from . import kernels
from .errors import CapacityError, DomainError
from .model import TUPLE_BUDGET_DEFAULT, SquareMatrix, tuple_count

DIM_LIMIT_DEFAULT = 24
BRUTEFORCE_DIM_LIMIT = 8


class MomentKey(NamedTuple):
    """The (n, r, m, m2) a moment value refers to."""

    n: int
    r: int
    m: int
    m2: int


@dataclass(frozen=True)
class SubpermanentVector:
    """perm_0 .. perm_n of one matrix; index m holds perm_m."""

    n: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.n + 1:
            raise DomainError("profile must have n + 1 values")


@dataclass(frozen=True)
class ExactMoment:
    """An exact rational expectation plus how many terms produced it."""

    value: Fraction
    term_count: int
    meta: MomentKey


def permanent(matrix: SquareMatrix, dim_limit: int = DIM_LIMIT_DEFAULT) -> int:
    """Permanent by inclusion-exclusion over column subsets (Gray-code order)."""
    n = matrix.n
    if n > dim_limit:
        raise CapacityError(f"permanent limited to n <= {dim_limit}, got {n}")
    rows = matrix.entries
    sums = [0] * n
    total = 0
    prev = 0
    ones = 0
    for g in range(1, 1 << n):
        gray = g ^ (g >> 1)
        bit = gray ^ prev
        j = bit.bit_length() - 1
        prev = gray
        if gray & bit:
            ones += 1
            for i in range(n):
                sums[i] += rows[i][j]
        else:
            ones -= 1
            for i in range(n):
                sums[i] -= rows[i][j]
        prod = 1
        for v in sums:
            prod *= v
        total += prod if (n - ones) % 2 == 0 else -prod
    return total


def subpermanent_profile(
    matrix: SquareMatrix, dim_limit: int = DIM_LIMIT_DEFAULT
) -> SubpermanentVector:
    """All perm_m at once via the subset dynamic program (2^n states)."""
    n = matrix.n
    if n > dim_limit:
        raise CapacityError(f"profile limited to n <= {dim_limit}, got {n}")
    values = kernels.subperm_profile(matrix.entries, n, matrix.max_entry())
    return SubpermanentVector(n=n, values=tuple(values))


def subpermanent_bruteforce(matrix: SquareMatrix, m: int) -> int:
    """Independent oracle for perm_m: enumerate subsets, expand by definition."""
    n = matrix.n
    if n > BRUTEFORCE_DIM_LIMIT:
        raise CapacityError(f"brute force limited to n <= {BRUTEFORCE_DIM_LIMIT}, got {n}")
    if not 0 <= m <= n:
        raise DomainError(f"m must be in 0..{n}, got {m}")
    rows = matrix.entries
    total = 0
    for rsel in combinations(range(n), m):
        for csel in combinations(range(n), m):
            for perm in permutations(range(m)):
                prod = 1
                for a in range(m):
                    prod *= rows[rsel[a]][csel[perm[a]]]
                total += prod
    return total


_table_cache = {}
_table_lock = threading.Lock()


def _oracle_worker(args):
    n, r, lo, hi = args
    return kernels.oracle_product_sums(n, r, lo, hi)


def product_sum_table(
    n: int,
    r: int,
    tuple_budget: int = TUPLE_BUDGET_DEFAULT,
    threads: int = 1,
):
    """Exact (n+1) x (n+1) table of sums of perm_m * perm_m2 over all tuples.

    Cached per (n, r); the budget only guards the first computation.
    """
    if n < 1 or r < 1:
        raise DomainError(f"need n >= 1 and r >= 1, got n={n}, r={r}")
    key = (n, r)
    with _table_lock:
        if key in _table_cache:
            return _table_cache[key]
    total = tuple_count(n, r)
    if total > tuple_budget:
        raise CapacityError(
            f"(n!)^r = {total} tuples for (n={n}, r={r}) exceeds budget {tuple_budget}"
        )
    nfact = factorial(n)
    if threads > 1 and nfact >= 2 * threads:
        bounds = [nfact * i // threads for i in range(threads + 1)]
        jobs = [(n, r, bounds[i], bounds[i + 1]) for i in range(threads)]
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_oracle_worker, jobs))
        table = [[0] * (n + 1) for _ in range(n + 1)]
        for part in parts:
            for m in range(n + 1):
                for m2 in range(n + 1):
                    table[m][m2] += part[m][m2]
    else:
        table = kernels.oracle_product_sums(n, r)
    with _table_lock:
        _table_cache[key] = table
    return table


def ensemble_average_bruteforce(
    n: int,
    r: int,
    m: int,
    m2: int,
    tuple_budget: int = TUPLE_BUDGET_DEFAULT,
    threads: int = 1,
) -> ExactMoment:
    """Exact E(perm_m * perm_m2) by full enumeration of all (n!)^r tuples."""
    if not (0 <= m <= n and 0 <= m2 <= n):
        raise DomainError(f"m and m2 must lie in 0..{n}, got {m}, {m2}")
    table = product_sum_table(n, r, tuple_budget=tuple_budget, threads=threads)
    total = tuple_count(n, r)
    return ExactMoment(
        value=Fraction(table[m][m2], total),
        term_count=total,
        meta=MomentKey(n, r, m, m2),
    )
