from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.core_types import ALL_PAIRS, CASE_B_PAIRS, SettingPair
from app.core.errors import HullQueryError, InconsistentTallyError, UndefinedRatioError
from app.core.published_tables import (
    PUBLISHED_DIFFERENT_23,
    PUBLISHED_SAME_23,
    PUBLISHED_TABLE_3,
    PUBLISHED_TABLE_4,
)
from app.schemas.reports import DistributionCounts, TallyTable
from app.services.analysis_service import (
    HullQuery,
    analysis_service,
    decompose_case_b_fraction,
    hull_membership,
    recover_distribution,
    same_different_ratio,
    solve_exact,
)
from app.services.lad_monte_carlo_service import case_b_same_fraction
from app.services.realm_matrix_service import realm_matrix_service

counts_strategy = st.builds(
    DistributionCounts,
    n1=st.integers(0, 10**6), n2=st.integers(0, 10**6), n3=st.integers(0, 10**6), n4=st.integers(0, 10**6),
).filter(lambda d: d.n > 0)


def _tally(counts, n=None):
    return TallyTable(n_vectors=n or counts[0], counts=list(counts))


def test_recover_published_table_3():
    d = recover_distribution(_tally(PUBLISHED_TABLE_3))
    assert d.as_tuple() == (62874, 187317, 187458, 562351)
    assert d.as_tuple() == PUBLISHED_TABLE_4["23"]


def test_recover_small_cases():
    assert recover_distribution(_tally([5] * 9)).as_tuple() == (5, 0, 0, 0)
    assert recover_distribution(_tally([8, 2, 2, 2, 8, 4, 2, 4, 8])).as_tuple() == (0, 2, 2, 4)


@pytest.mark.parametrize("counts", [
    [8, 2, 2, 2, 8, 4, 2, 4, 7],   # case (a) count below n
    [8, 2, 2, 3, 8, 4, 2, 4, 8],   # 12 and 21 differ
    [8, 2, 2, 2, 8, 5, 2, 5, 8],   # odd 2*N1
    [8, 1, 1, 1, 8, 1, 1, 1, 8],   # negative N1
    [8, 6, 1, 6, 8, 5, 1, 5, 8],   # negative N3
])
def test_inconsistent_tallies_rejected(counts):
    with pytest.raises(InconsistentTallyError):
        recover_distribution(_tally(counts, n=8))


@settings(max_examples=1000, deadline=None)
@given(counts_strategy)
def test_synthesize_then_recover_is_exact(d):
    tally = analysis_service.synthesize_tally(d)
    assert recover_distribution(tally) == d
    assert case_b_same_fraction(tally) == decompose_case_b_fraction(d).total


@settings(max_examples=1000, deadline=None)
@given(counts_strategy.filter(lambda d: d.n2 + d.n3 + d.n4 > 0))
def test_different_over_same_is_two(d):
    ratio = same_different_ratio(d)
    assert ratio.ratio == 2
    assert analysis_service.same_from_tally(analysis_service.synthesize_tally(d), d) == ratio.same


def test_same_and_different_for_published_column_23():
    d = DistributionCounts(n1=62874, n2=187317, n3=187458, n4=562351)
    ratio = same_different_ratio(d)
    assert ratio.same == PUBLISHED_SAME_23 == 1_874_252
    assert ratio.different == PUBLISHED_DIFFERENT_23 == 3_748_504
    assert ratio.require_ratio() == 2


def test_ratio_small_and_undefined():
    ratio = same_different_ratio(DistributionCounts(n1=0, n2=1, n3=1, n4=2))
    assert (ratio.same, ratio.different, ratio.ratio) == (8, 16, 2)
    undefined = same_different_ratio(DistributionCounts(n1=5, n2=0, n3=0, n4=0))
    assert not undefined.defined
    with pytest.raises(UndefinedRatioError):
        undefined.require_ratio()


def test_decomposition():
    d = DistributionCounts(n1=62874, n2=187317, n3=187458, n4=562351)
    parts = decompose_case_b_fraction(d)
    assert parts.base == Fraction(1, 3)
    assert parts.total == Fraction(1, 3) + Fraction(2, 3) * Fraction(62874, 1_000_000)
    assert round(float(parts.total), 6) == 0.375249
    assert decompose_case_b_fraction(DistributionCounts(n1=0, n2=3, n3=3, n4=3)).total == Fraction(1, 3)
    assert decompose_case_b_fraction(DistributionCounts(n1=7, n2=0, n3=0, n4=0)).total == 1
    totals = [decompose_case_b_fraction(DistributionCounts(n1=k, n2=10 - k, n3=0, n4=0)).total for k in range(11)]
    assert totals == sorted(set(totals))
    with pytest.raises(InconsistentTallyError):
        decompose_case_b_fraction(DistributionCounts(n1=0, n2=0, n3=0, n4=0))


def test_solve_exact():
    status, x = solve_exact([[2, 1], [1, 3]], [3, 5])
    assert status == "unique" and x == [Fraction(4, 5), Fraction(7, 5)]
    assert solve_exact([[1, 1], [1, 1]], [1, 2]) == ("inconsistent", None)
    assert solve_exact([[1, 1], [2, 2]], [1, 2]) == ("underdetermined", None)


def test_hull_quantum_point_is_outside():
    verdict = hull_membership(HullQuery.uniform_case_b(Fraction(1, 4)))
    assert not verdict.feasible
    assert verdict.certificate == "w1 = -1/8"
    assert verdict.summary() == "infeasible, w1 = -1/8"
    assert verdict.affine_weights == (Fraction(-1, 8), Fraction(3, 8), Fraction(3, 8), Fraction(3, 8))


def test_hull_three_eighths_point_is_inside():
    verdict = hull_membership(HullQuery.uniform_case_b("0.375"))
    assert verdict.feasible
    assert verdict.weights == (Fraction(1, 16), Fraction(5, 16), Fraction(5, 16), Fraction(5, 16))


@pytest.mark.parametrize("f,feasible,w1", [
    (Fraction(1, 4), False, Fraction(-1, 8)),
    (Fraction(1, 3), True, Fraction(0)),
    (Fraction(3, 8), True, Fraction(1, 16)),
    (Fraction(1, 2), True, Fraction(1, 4)),
    (Fraction(1), True, Fraction(1)),
])
def test_uniform_case_b_boundary_is_the_bell_bound(f, feasible, w1):
    verdict = hull_membership(HullQuery.uniform_case_b(f))
    assert verdict.feasible is feasible
    assert verdict.affine_weights[0] == w1
    assert verdict.affine_weights[1:] == ((1 - f) / 2,) * 3


def test_hull_vertices_are_feasible():
    for i, col in enumerate(realm_matrix_service.matrix.columns):
        verdict = hull_membership(HullQuery(col.as_fractions()))
        expected = tuple(Fraction(1 if j == i else 0) for j in range(4))
        assert verdict.feasible and verdict.weights == expected


def test_hull_from_expectations():
    expectations = [-1 if p.case.value == "a" else Fraction(1, 2) for p in ALL_PAIRS]
    verdict = hull_membership(HullQuery.from_expectations(expectations))
    assert verdict.certificate == "w1 = -1/8"


def test_hull_asymmetric_target_violates_pair_equations():
    target = [Fraction(1) if p.case.value == "a" else Fraction(3, 8) for p in ALL_PAIRS]
    target[SettingPair.from_label("21").index - 1] = Fraction(1, 2)
    verdict = hull_membership(HullQuery(tuple(target)))
    assert not verdict.feasible
    assert "21" in verdict.certificate


def test_hull_rejects_bad_queries():
    with pytest.raises(HullQueryError):
        hull_membership(HullQuery((Fraction(1, 2),) * 9))
    with pytest.raises(HullQueryError):
        HullQuery((Fraction(1),) * 8)


@pytest.mark.parametrize("value", ["1/0", "abc", "", None, float("nan")])
def test_hull_rejects_unparseable_fractions(value):
    with pytest.raises(HullQueryError):
        HullQuery.uniform_case_b(value)
    with pytest.raises(HullQueryError):
        HullQuery.from_expectations([value] * 9)


def _permute(target, perm):
    moved = [None] * 9
    for pair in ALL_PAIRS:
        image = SettingPair(perm[pair.alice - 1], perm[pair.bob - 1])
        moved[image.index - 1] = target[pair.index - 1]
    return tuple(moved)


eighths = st.sampled_from([Fraction(k, 8) for k in range(9)])


@settings(max_examples=300, deadline=None)
@given(st.lists(eighths, min_size=6, max_size=6), st.sampled_from(list(permutations((1, 2, 3)))))
def test_hull_membership_is_invariant_under_relabeling_settings(values, perm):
    it = iter(values)
    target = tuple(Fraction(1) if p not in CASE_B_PAIRS else next(it) for p in ALL_PAIRS)
    original = hull_membership(HullQuery(target))
    moved = hull_membership(HullQuery(_permute(target, perm)))
    assert original.feasible == moved.feasible
    if original.affine_weights is not None:
        assert original.affine_weights[0] == moved.affine_weights[0]
        assert sorted(original.affine_weights[1:]) == sorted(moved.affine_weights[1:])


def test_published_checks_all_pass():
    checks = analysis_service.published_checks()
    assert [c["relation"] for c in checks] == list(PUBLISHED_TABLE_4)
    for check in checks:
        assert check["round_trip"]
        assert check["ratio"] == "2"
        assert check["same_matches_tally_formula"]
        assert check["largest_matches_model"]
        assert check["g9_1_within_4_sigma"]
        assert check["matches_table_3"]
        assert 0.37 <= float(Fraction(check["case_b_fraction"])) <= 0.38


def test_published_tally_round_trip():
    tally = analysis_service.published_tally("23")
    assert tuple(tally.counts) == PUBLISHED_TABLE_3
    assert analysis_service.published_table_3_tally().counts == list(PUBLISHED_TABLE_3)
