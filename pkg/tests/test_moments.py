from fractions import Fraction
from math import factorial

import pytest

from permex import (
    CapacityError,
    ColorProfile,
    DomainError,
    argmax_profile,
    ensemble_average_bruteforce,
    expectation_perm,
    expectation_product,
    profile_iterator,
    term_value,
    validate_profile,
)
from permex.moments import (
    _term_integer,
    factor_base,
    factor_col_hits,
    factor_completion,
    factor_cross,
    factor_dup,
    factor_fresh,
    factor_row_hits,
)


def zeros(r):
    return tuple((0,) * r for _ in range(r))


def make_profile(r, base, fresh=None, dup=None, row_hits=None, col_hits=None,
                 cross_rows=None, cross_cols=None):
    return ColorProfile(
        base=tuple(base),
        fresh=tuple(fresh) if fresh else (0,) * r,
        dup=tuple(dup) if dup else (0,) * r,
        row_hits=row_hits or zeros(r),
        col_hits=col_hits or zeros(r),
        cross_rows=cross_rows or zeros(r),
        cross_cols=cross_cols or zeros(r),
    )


# ---------------------------------------------------------------------------
# single-moment formula


def test_expectation_perm_examples():
    assert expectation_perm(4, 3, 0).value == 1
    assert expectation_perm(3, 2, 1).value == 6
    assert expectation_perm(2, 2, 2).value == 3


def test_expectation_perm_term_count():
    assert expectation_perm(4, 2, 3).term_count == 4
    assert expectation_perm(5, 3, 2).term_count == 6


def test_expectation_perm_domain():
    with pytest.raises(DomainError):
        expectation_perm(3, 2, 4)
    with pytest.raises(DomainError):
        expectation_perm(3, 2, -1)


def test_expectation_perm_r1_is_binomial():
    # a single permutation matrix has C(n, m) placements of every size
    from math import comb

    for n in range(1, 6):
        for m in range(n + 1):
            assert expectation_perm(n, 1, m).value == comb(n, m)


# ---------------------------------------------------------------------------
# profile iterator


def test_iterator_counts():
    assert len(list(profile_iterator(2, 2, 0, 0))) == 1
    assert len(list(profile_iterator(2, 2, 2, 0))) == 3
    profiles = list(profile_iterator(1, 1, 1, 1))
    assert len(profiles) == 1
    assert profiles[0].base == (1,)
    assert profiles[0].dup == (1,)


def test_iterator_profiles_all_valid_and_distinct():
    for n, r, m, m2 in [(3, 2, 2, 2), (2, 3, 1, 2), (4, 2, 3, 2), (3, 3, 3, 3)]:
        seen = set()
        for profile in profile_iterator(n, r, m, m2):
            validate_profile(profile, n, r, m, m2)
            assert profile not in seen
            seen.add(profile)


def test_validator_rejects_unbalanced_cross():
    bad = make_profile(
        2, base=(1, 1),
        cross_rows=((0, 1), (0, 0)),
        cross_cols=((0, 0), (0, 0)),
    )
    with pytest.raises(DomainError):
        validate_profile(bad, 2, 2, 2, 1)


# ---------------------------------------------------------------------------
# the seven factors, on hand-built profiles


def test_factor_base_examples():
    assert factor_base(make_profile(2, (1, 1)), 2, 2, 2) == 1
    assert factor_base(make_profile(1, (0,)), 2, 1, 0) == Fraction(1, 2)
    assert factor_base(make_profile(2, (2, 0)), 2, 2, 2) == Fraction(1, 2)


def test_factor_fresh_examples():
    assert factor_fresh(make_profile(2, (1, 0)), 3, 1) == 1
    assert factor_fresh(make_profile(2, (1, 0), fresh=(1, 0)), 3, 1) == 4
    assert factor_fresh(make_profile(2, (1, 0), fresh=(1, 1)), 3, 1) == 4


def test_factor_dup_examples():
    assert factor_dup(make_profile(2, (2, 1))) == 1
    assert factor_dup(make_profile(1, (2,), dup=(1,))) == 2
    assert factor_dup(make_profile(2, (2, 1), dup=(1, 1))) == 2


def test_factor_row_hits_examples():
    assert factor_row_hits(make_profile(2, (1, 1)), 3, 2) == 1
    profile = make_profile(2, (0, 1), row_hits=((0, 1), (0, 0)))
    assert factor_row_hits(profile, 3, 1) == 2


def test_factor_col_hits_mirrors_row_hits():
    checked = 0
    for profile in profile_iterator(4, 2, 3, 3):
        swapped = ColorProfile(
            base=profile.base, fresh=profile.fresh, dup=profile.dup,
            row_hits=profile.col_hits, col_hits=profile.row_hits,
            cross_rows=profile.cross_cols, cross_cols=profile.cross_rows,
        )
        assert factor_col_hits(profile, 4, 3) == factor_row_hits(swapped, 4, 3)
        checked += 1
        if checked >= 100:
            break
    assert checked == 100


def test_factor_cross_examples():
    assert factor_cross(make_profile(2, (1, 1))) == 1
    profile = make_profile(
        2, (1, 1),
        cross_rows=((0, 1), (0, 0)),
        cross_cols=((0, 1), (0, 0)),
    )
    assert factor_cross(profile) == 1


def test_factor_completion_examples():
    assert factor_completion(make_profile(2, (0, 0)), 2) == 4
    assert factor_completion(make_profile(2, (2, 0)), 2) == 2


def test_term_value_is_product_of_factors():
    n, r, m, m2 = 3, 2, 2, 2
    norm = factorial(n) ** r
    for profile in profile_iterator(n, r, m, m2):
        expected = (
            factor_base(profile, n, r, m)
            * factor_fresh(profile, n, m)
            * factor_dup(profile)
            * factor_row_hits(profile, n, m)
            * factor_col_hits(profile, n, m)
            * factor_cross(profile)
            * factor_completion(profile, n)
        )
        assert term_value(profile, n, r, m) == expected
        assert expected == Fraction(_term_integer(profile, n, r, m), norm)


# ---------------------------------------------------------------------------
# product formula against the brute-force oracle


def test_product_oracle_equality_small():
    for n in (1, 2, 3):
        for r in (1, 2):
            for m in range(n + 1):
                for m2 in range(m, n + 1):
                    got = expectation_product(n, r, m, m2)
                    want = ensemble_average_bruteforce(n, r, m, m2)
                    assert got.value == want.value, (n, r, m, m2)


def test_product_known_values():
    assert expectation_product(2, 2, 2, 0).value == 3
    assert expectation_product(2, 2, 1, 1).value == 16
    assert expectation_product(2, 2, 2, 2).value == 10


def test_product_symmetry():
    # the profile decomposition is oriented, so only the values must match
    for m, m2 in [(1, 3), (0, 2), (2, 4)]:
        a = expectation_product(4, 2, m, m2)
        b = expectation_product(4, 2, m2, m)
        assert a.value == b.value


def test_product_reduces_to_single():
    for n, r in [(3, 2), (4, 2), (3, 3)]:
        for m in range(n + 1):
            assert expectation_product(n, r, m, 0).value == expectation_perm(n, r, m).value


def test_product_domain_and_budget():
    with pytest.raises(DomainError):
        expectation_product(3, 2, 4, 0)
    with pytest.raises(CapacityError):
        expectation_product(4, 2, 3, 3, term_budget=10)


def test_product_parallel_matches_serial():
    serial = expectation_product(4, 2, 3, 3)
    parallel = expectation_product(4, 2, 3, 3, threads=2)
    assert serial.value == parallel.value
    assert serial.term_count == parallel.term_count


# ---------------------------------------------------------------------------
# dominant-term structure


def test_argmax_trivial():
    profile, value = argmax_profile(2, 2, 0, 0)
    assert profile.base == (0, 0)
    assert profile.second_total == 0
    assert value == Fraction(
        _term_integer(profile, 2, 2, 0), factorial(2) ** 2
    )


def test_argmax_balanced_at_n8():
    profile, value = argmax_profile(8, 2, 4, 4)
    assert abs(profile.base[0] - 2) <= 1
    assert abs(profile.row_hit_total - profile.col_hit_total) <= 2
    assert value > 0


def test_argmax_budget():
    with pytest.raises(CapacityError):
        argmax_profile(8, 2, 4, 4, term_budget=5)
