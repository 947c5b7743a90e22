import itertools
from math import comb, factorial

import pytest

from permex import (
    CapacityError,
    EnsembleSpec,
    SquareMatrix,
    ensemble_average_bruteforce,
    permanent,
    sample_matrix,
    subpermanent_bruteforce,
    subpermanent_profile,
)
from permex import _pykernels, kernels
from permex.permanents import product_sum_table

IDENTITY3 = SquareMatrix.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
ONES3 = SquareMatrix.from_rows([[1, 1, 1]] * 3)
ONES2 = SquareMatrix.from_rows([[1, 1], [1, 1]])
DIAG2 = SquareMatrix.from_rows([[2, 0], [0, 2]])


def perm_by_definition(mat):
    total = 0
    for sigma in itertools.permutations(range(mat.n)):
        prod = 1
        for i, j in enumerate(sigma):
            prod *= mat.entries[i][j]
        total += prod
    return total


def random_matrix(rng, n, max_entry=3):
    rows = [[int(rng.integers(0, max_entry + 1)) for _ in range(n)] for _ in range(n)]
    return SquareMatrix.from_rows(rows)


@pytest.mark.parametrize(
    "mat,value", [(IDENTITY3, 1), (ONES3, 6), (DIAG2, 4)]
)
def test_permanent_examples(mat, value):
    assert permanent(mat) == value


def test_permanent_matches_definition():
    import numpy as np

    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(1, 6))
        mat = random_matrix(rng, n)
        assert permanent(mat) == perm_by_definition(mat)


def test_permanent_capacity():
    mat = SquareMatrix.from_rows([[1] * 5] * 5)
    with pytest.raises(CapacityError):
        permanent(mat, dim_limit=4)


@pytest.mark.parametrize(
    "mat,values", [(ONES2, (1, 4, 2)), (DIAG2, (1, 4, 4))]
)
def test_profile_examples(mat, values):
    assert subpermanent_profile(mat).values == values


def test_profile_basic_identities():
    import numpy as np

    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 7))
        mat = random_matrix(rng, n)
        prof = subpermanent_profile(mat)
        assert prof.values[0] == 1
        assert prof.values[1] == mat.entry_total()
        assert prof.values[-1] == permanent(mat)


@pytest.mark.parametrize(
    "mat,m,value",
    [(ONES3, 2, 18), (ONES3, 0, 1), (IDENTITY3, 2, 3)],
)
def test_bruteforce_examples(mat, m, value):
    assert subpermanent_bruteforce(mat, m) == value


def test_profile_vs_bruteforce_spot():
    import numpy as np

    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(1, 7))
        mat = random_matrix(rng, n)
        prof = subpermanent_profile(mat)
        for m in range(n + 1):
            assert prof.values[m] == subpermanent_bruteforce(mat, m)


def test_profile_capacity():
    with pytest.raises(CapacityError):
        subpermanent_profile(ONES3, dim_limit=2)
    with pytest.raises(CapacityError):
        subpermanent_bruteforce(SquareMatrix.from_rows([[1] * 9] * 9), 2)


def test_oracle_hand_values_n2_r2():
    assert ensemble_average_bruteforce(2, 2, 2, 0).value == 3
    assert ensemble_average_bruteforce(2, 2, 2, 2).value == 10
    assert ensemble_average_bruteforce(2, 2, 1, 1).value == 16


def test_oracle_meta_and_denominator():
    m = ensemble_average_bruteforce(3, 2, 2, 1)
    assert m.meta == (3, 2, 2, 1)
    assert m.term_count == 36
    assert factorial(3) ** 2 % m.value.denominator == 0


def test_profile_monotone_bound():
    for n, r in [(4, 2), (5, 3)]:
        spec = EnsembleSpec(n=n, r=r, seed=21)
        for i in range(5):
            mat = sample_matrix(spec, i)
            prof = subpermanent_profile(mat)
            assert prof.values[1] == r * n
            for m in range(n + 1):
                assert prof.values[m] <= comb(n, m) ** 2 * factorial(m) * r**m


def test_oracle_threads_equivalent():
    serial = kernels.oracle_product_sums(3, 2)
    lo = kernels.oracle_product_sums(3, 2, 0, 3)
    hi = kernels.oracle_product_sums(3, 2, 3, 6)
    merged = [
        [lo[m][m2] + hi[m][m2] for m2 in range(4)] for m in range(4)
    ]
    assert merged == serial


def test_backends_agree():
    if not kernels.compiled_available():
        pytest.skip("compiled backend not built")
    from permex import _ckernels
    import numpy as np

    rng = np.random.default_rng(13)
    for _ in range(15):
        n = int(rng.integers(1, 8))
        mat = random_matrix(rng, n)
        assert _ckernels.subperm_profile(mat.entries, n) == _pykernels.subperm_profile(
            mat.entries, n
        )
    assert _ckernels.oracle_product_sums(3, 2) == _pykernels.oracle_product_sums(3, 2)
    assert _ckernels.oracle_product_sums(2, 3) == _pykernels.oracle_product_sums(2, 3)


def test_pure_backend_forced(monkeypatch):
    monkeypatch.setenv("PERMEX_BACKEND", "pure")
    assert kernels.profile_backend_name(4, 2) == "pure"
    prof = subpermanent_profile(ONES2)
    assert prof.values == (1, 4, 2)


def test_product_table_cached_and_symmetric():
    table = product_sum_table(3, 2)
    assert table is product_sum_table(3, 2)
    for m in range(4):
        for m2 in range(4):
            assert table[m][m2] == table[m2][m]
