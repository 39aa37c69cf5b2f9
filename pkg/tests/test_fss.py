import pytest
from hypothesis import given
from hypothesis import strategies as st

from dfbench.errors import UnknownTestCase
from dfbench.metrics import MatchCounts, Suite
from dfbench.records import GroundTruthRecord
from dfbench.scorers.fss import FssReport, extract_identifier, score_string_search

GT = [
    GroundTruthRecord("FT-SS-01", Suite.STRING_SEARCH, os="windows", payload=f"{i}|DireWolf {i}")
    for i in ("0896", "0898", "0900")
]


def score(lines, os="windows", gt=GT):
    return score_string_search(FssReport("FT-SS-01", os, lines), gt)


def test_full_report_scores_one():
    counts, m = score(["0896 DireWolf", "0898 DireWolf", "0900 DireWolf"])
    assert counts == MatchCounts(3, 0, 0)
    assert m.f1 == 1.0


def test_two_of_three():
    counts, m = score(["0896 DireWolf", "0898 DireWolf"])
    assert counts == MatchCounts(2, 0, 1)
    assert m.f1 == pytest.approx(0.8, abs=1e-12)


def test_empty_report():
    counts, m = score([])
    assert counts == MatchCounts(0, 0, 3)
    assert m.f1 == 0.0


def test_extra_and_unidentified_lines_are_fp():
    counts, _ = score(["0896 a", "1234 stray", "no identifier here", "no identifier here"])
    assert counts == MatchCounts(1, 2, 2)


def test_os_scopes_ground_truth():
    gt = GT + [GroundTruthRecord("FT-SS-01", Suite.STRING_SEARCH, os="linux", payload="0777|x")]
    counts, _ = score(["0777 x"], os="linux", gt=gt)
    assert counts == MatchCounts(1, 0, 0)
    with pytest.raises(UnknownTestCase):
        score(["0896"], os="macos")


def test_no_ground_truth():
    with pytest.raises(UnknownTestCase):
        score(["0896"], gt=[])


@pytest.mark.parametrize(
    "line, ident",
    [
        ("0896 DireWolf", "0896"),
        ("DireWolf 0896", "0896"),
        ("12345 then 0896", "0896"),
        ("a0896b 0900", "0896"),
        ("0896 and 0900", "0896"),
        ("no digits", None),
        ("123 45678", None),
    ],
)
def test_identifier_rule(line, ident):
    assert extract_identifier(line) == ident


def test_from_content_drops_blank_lines():
    report = FssReport.from_content("FT-SS-01", "windows", "0896 a\r\n\r\n0898 b\n")
    assert report.reported_lines == ["0896 a", "0898 b"]


lines_st = st.lists(
    st.one_of(
        st.sampled_from(["0896 DireWolf", "0898 x", "0900 y", "4444 z", "noise", "more noise"]),
        st.text(max_size=12),
    ),
    max_size=15,
)


@given(lines_st, st.randoms(use_true_random=False))
def test_permutation_invariant(lines, rnd):
    shuffled = list(lines)
    rnd.shuffle(shuffled)
    assert score(lines)[0] == score(shuffled)[0]


@given(lines_st)
def test_duplication_idempotent(lines):
    assert score(lines)[0] == score(lines + lines)[0]
