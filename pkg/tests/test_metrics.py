import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfbench.errors import EmptySuite, IncompleteBench
from dfbench.metrics import (
    MatchCounts,
    Metrics,
    Suite,
    SuiteScore,
    aggregate_bench,
    aggregate_suite,
    average_sub_cases,
    compute_metrics,
    format_score,
    main_test_case,
    suite_for_test_case,
)

counts_st = st.builds(
    MatchCounts,
    st.integers(0, 10_000),
    st.integers(0, 10_000),
    st.integers(0, 10_000),
)


def oracle(tp, fp, fn):
    # F1 from the count form 2TP / (2TP + FP + FN), independent of P and R
    if tp + fp + fn == 0:
        return 1.0, 1.0, 1.0
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return p, r, 2 * tp / (2 * tp + fp + fn)


@pytest.mark.parametrize(
    "counts, expected",
    [
        ((3, 0, 0), (1.0, 1.0, 1.0)),
        ((2, 0, 1), (1.0, 2 / 3, 0.8)),
        ((0, 0, 0), (1.0, 1.0, 1.0)),
        ((0, 4, 2), (0.0, 0.0, 0.0)),
    ],
)
def test_compute_metrics_examples(counts, expected):
    m = compute_metrics(MatchCounts(*counts))
    assert (m.precision, m.recall, m.f1) == pytest.approx(expected, abs=1e-12)


def test_degenerate_one_sided():
    assert compute_metrics(MatchCounts(0, 3, 0)) == Metrics(0.0, 0.0, 0.0)
    assert compute_metrics(MatchCounts(0, 0, 3)) == Metrics(0.0, 0.0, 0.0)


def test_counts_reject_negative():
    with pytest.raises(ValueError):
        MatchCounts(-1, 0, 0)


@given(counts_st, counts_st)
def test_counts_addition_commutes(a, b):
    assert a + b == b + a
    assert (a + b).tp == a.tp + b.tp


@given(counts_st)
def test_matches_oracle(c):
    m = compute_metrics(c)
    p, r, f = oracle(c.tp, c.fp, c.fn)
    assert abs(m.precision - p) <= 1e-12
    assert abs(m.recall - r) <= 1e-12
    assert abs(m.f1 - f) <= 1e-12
    assert m.f1 <= max(m.precision, m.recall) + 1e-15


@given(counts_st)
def test_monotone_fn_to_tp(c):
    if c.fn == 0:
        return
    better = MatchCounts(c.tp + 1, c.fp, c.fn - 1)
    assert compute_metrics(better).f1 >= compute_metrics(c).f1


@given(counts_st)
def test_monotone_tp_to_fp(c):
    if c.tp == 0:
        return
    worse = MatchCounts(c.tp - 1, c.fp + 1, c.fn)
    assert compute_metrics(worse).f1 <= compute_metrics(c).f1


def test_aggregate_suite_examples():
    one = Metrics(1.0, 1.0, 1.0)
    half = Metrics(0.5, 0.5, 0.5)
    assert aggregate_suite("string_search", [("a", one)] * 3).score == 1.0
    assert aggregate_suite(Suite.SQLITE, [("a", one), ("b", half)]).score == 0.75
    with pytest.raises(EmptySuite):
        aggregate_suite(Suite.SQLITE, [])


@given(st.floats(0, 1), st.integers(1, 50))
def test_aggregate_identical_is_exact(f1, n):
    m = Metrics(f1, f1, f1)
    assert aggregate_suite(Suite.FILE_CARVING, [("x", m)] * n).score == f1


def _suites(scores):
    return [SuiteScore(s, (("x", Metrics(v, v, v)),), v) for s, v in zip(Suite, scores)]


def test_aggregate_bench_examples():
    assert aggregate_bench(_suites([1, 1, 1, 1, 1])).score == 1.0
    assert aggregate_bench(_suites([1, 0, 1, 0, 1])).score == pytest.approx(0.6, abs=1e-15)
    with pytest.raises(IncompleteBench):
        aggregate_bench(_suites([1, 1, 1, 1]))
    dup = _suites([1, 1, 1, 1, 1])
    dup[4] = dup[0]
    with pytest.raises(IncompleteBench):
        aggregate_bench(dup)


def test_aggregate_bench_permutation_invariant():
    suites = _suites([0.1, 0.7, 0.3, 0.9, 0.55])
    scores = {aggregate_bench(list(p)).score for p in itertools.permutations(suites)}
    assert len(scores) == 1


def test_sub_case_averaging():
    per_case = [
        ("DFR-01", Metrics(1, 1, 1)),
        ("DFR-01-MAC", Metrics(0, 0, 0)),
        ("DFR-02", Metrics(1, 1, 1)),
    ]
    rolled = average_sub_cases(per_case)
    assert [c for c, _ in rolled] == ["DFR-01", "DFR-02"]
    assert rolled[0][1].f1 == 0.5


@pytest.mark.parametrize(
    "case, main, suite",
    [
        ("FT-SS-01", "FT-SS-01", Suite.STRING_SEARCH),
        ("DFR-11-SIZE", "DFR-11", Suite.DELETED_FILE_RECOVERY),
        ("carve-conti-bmp", "carve-conti-bmp", Suite.FILE_CARVING),
        ("MR-15", "MR-15", Suite.WINDOWS_REGISTRY),
        ("SFT-03", "SFT-03", Suite.SQLITE),
    ],
)
def test_case_ids(case, main, suite):
    assert main_test_case(case) == main
    assert suite_for_test_case(case) is suite


def test_format_score_half_even():
    assert format_score(1.0) == "1.000000"
    assert format_score(2 / 3) == "0.666667"
    assert format_score(0.0000005) == "0.000000"  # binary value sits just below the half
    assert format_score(0.8) == "0.800000"
