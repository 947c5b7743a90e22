"""Pure-Python reference kernels.

These run on plain Python integers, so they have no overflow ceiling; the
compiled twin in ``_ckernels`` is selected instead whenever its int64 bound
certification passes.  Both implementations must stay bit-identical in
output.
"""

import itertools

BACKEND_NAME = "pure"


def subperm_profile(rows, n):
    """All subpermanent sums of an n x n integer matrix in one pass.

    Column-by-column dynamic program over subsets of used rows: after
    processing every column, accumulator S holds the weighted count of
    rook placements covering exactly the row set S.  Grouping by popcount
    gives the value for every placement size at once.
    """
    size = 1 << n
    f = [0] * size
    f[0] = 1
    for j in range(n):
        col = [rows[i][j] for i in range(n)]
        # Descend so f[S ^ bit] still holds the previous column's value.
        for s in range(size - 1, 0, -1):
            acc = f[s]
            t = s
            while t:
                low = t & -t
                v = col[low.bit_length() - 1]
                if v:
                    acc += v * f[s ^ low]
                t ^= low
            f[s] = acc
    out = [0] * (n + 1)
    for s in range(size):
        out[bin(s).count("1")] += f[s]
    return out


def oracle_product_sums(n, r, first_lo=0, first_hi=None):
    """Sum perm_m * perm_m2 over permutation tuples, for every (m, m2).

    Enumerates tuples whose first permutation has lexicographic index in
    [first_lo, first_hi); the full table is the sum of disjoint slices.
    Returns an (n+1) x (n+1) symmetric table of exact integers.
    """
    perms = list(itertools.permutations(range(n)))
    if first_hi is None:
        first_hi = len(perms)
    table = [[0] * (n + 1) for _ in range(n + 1)]
    for first in perms[first_lo:first_hi]:
        for rest in itertools.product(perms, repeat=r - 1):
            rows = [[0] * n for _ in range(n)]
            for p in (first, *rest):
                for i, j in enumerate(p):
                    rows[i][j] += 1
            prof = subperm_profile(rows, n)
            for m in range(n + 1):
                pm = prof[m]
                row = table[m]
                for m2 in range(m, n + 1):
                    row[m2] += pm * prof[m2]
    for m in range(n + 1):
        for m2 in range(m + 1, n + 1):
            table[m2][m] = table[m][m2]
    return table
