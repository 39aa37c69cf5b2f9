"""Counting and scoring arithmetic shared by every suite.

Per-case F1 values roll up into a suite score (unweighted mean) and the five
suite scores roll up into the overall benchmark score.
"""

from __future__ import annotations

import re
from collections import OrderedDict
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from enum import Enum
from statistics import mean as _exact_mean
from typing import Iterable, Sequence

from .errors import EmptySuite, IncompleteBench


class Suite(str, Enum):
    STRING_SEARCH = "string_search"
    DELETED_FILE_RECOVERY = "deleted_file_recovery"
    FILE_CARVING = "file_carving"
    WINDOWS_REGISTRY = "windows_registry"
    SQLITE = "sqlite"

    @property
    def short_name(self) -> str:
        return _SHORT_NAMES[self]

    @classmethod
    def parse(cls, value: "str | Suite") -> "Suite":
        if isinstance(value, Suite):
            return value
        key = str(value).strip().lower().replace("-", "_")
        for suite in cls:
            if key in (suite.value, suite.short_name.lower()):
                return suite
        raise ValueError(f"unknown suite: {value!r}")


_SHORT_NAMES = {
    Suite.STRING_SEARCH: "FSS",
    Suite.DELETED_FILE_RECOVERY: "DFR",
    Suite.FILE_CARVING: "FC",
    Suite.WINDOWS_REGISTRY: "WRR",
    Suite.SQLITE: "SDR",
}


@dataclass(frozen=True)
class MatchCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "fn"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        if not isinstance(other, MatchCounts):
            return NotImplemented
        return MatchCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float


def compute_metrics(counts: MatchCounts) -> Metrics:
    """Precision, recall and F1 for one set of counts.

    Empty report against empty ground truth is exact agreement (all 1.0);
    any other zero denominator yields 0.0 for the undefined ratio.
    """
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    if tp == 0 and fp == 0 and fn == 0:
        return Metrics(1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return Metrics(precision, recall, 0.0)
    return Metrics(precision, recall, 2 * precision * recall / (precision + recall))


@dataclass(frozen=True)
class SuiteScore:
    suite: Suite
    per_case: tuple = field(default_factory=tuple)
    score: float = 0.0


@dataclass(frozen=True)
class BenchScore:
    suite_scores: tuple
    score: float


def aggregate_suite(suite: "Suite | str", per_case: Iterable[tuple[str, Metrics]]) -> SuiteScore:
    per_case = tuple((case_id, m) for case_id, m in per_case)
    if not per_case:
        raise EmptySuite(f"no test cases were evaluated for suite {Suite.parse(suite).value}")
    return SuiteScore(Suite.parse(suite), per_case, _exact_mean(m.f1 for _, m in per_case))


def aggregate_bench(suites: Sequence[SuiteScore]) -> BenchScore:
    seen = [s.suite for s in suites]
    missing = [s.value for s in Suite if s not in seen]
    duplicated = sorted({s.value for s in seen if seen.count(s) > 1})
    if missing or duplicated or len(suites) != len(Suite):
        raise IncompleteBench(f"missing suites {missing}, duplicated suites {duplicated}")
    ordered = tuple(sorted(suites, key=lambda s: list(Suite).index(s.suite)))
    return BenchScore(ordered, _exact_mean(s.score for s in ordered))


_MAIN_CASE_PATTERNS = [
    re.compile(r"^(FT-SS-\d+)", re.IGNORECASE),
    re.compile(r"^(DFR-\d+)", re.IGNORECASE),
    re.compile(r"^(FC-\d+)", re.IGNORECASE),
    re.compile(r"^(carve-[a-z]+-[a-z0-9]+)", re.IGNORECASE),
    re.compile(r"^((?:CR|MR|NR)-\d+)", re.IGNORECASE),
    re.compile(r"^(SFT-\d+)", re.IGNORECASE),
]


def main_test_case(test_case: str) -> str:
    """Strip sub-test-case suffixes: ``DFR-01-MAC`` -> ``DFR-01``."""
    for pattern in _MAIN_CASE_PATTERNS:
        m = pattern.match(test_case.strip())
        if m:
            return m.group(1)
    return test_case.strip()


def average_sub_cases(per_case: Iterable[tuple[str, Metrics]]) -> list[tuple[str, Metrics]]:
    """Collapse sub-test cases into their main test case by averaging.

    Precision, recall and F1 are each averaged; order follows first
    appearance of the main case.
    """
    groups: "OrderedDict[str, list[Metrics]]" = OrderedDict()
    for case_id, m in per_case:
        groups.setdefault(main_test_case(case_id), []).append(m)
    return [
        (
            case_id,
            Metrics(
                _exact_mean(m.precision for m in ms),
                _exact_mean(m.recall for m in ms),
                _exact_mean(m.f1 for m in ms),
            ),
        )
        for case_id, ms in groups.items()
    ]


def format_score(value: float) -> str:
    """Six decimal places, round-half-even on the exact binary value."""
    return str(Decimal(value).quantize(Decimal("0.000001"), rounding=ROUND_HALF_EVEN))


_SUITE_PREFIXES = [
    (re.compile(r"^FT-SS-", re.IGNORECASE), Suite.STRING_SEARCH),
    (re.compile(r"^DFR-", re.IGNORECASE), Suite.DELETED_FILE_RECOVERY),
    (re.compile(r"^(FC-|carve-)", re.IGNORECASE), Suite.FILE_CARVING),
    (re.compile(r"^(CR|MR|NR)-", re.IGNORECASE), Suite.WINDOWS_REGISTRY),
    (re.compile(r"^SFT-", re.IGNORECASE), Suite.SQLITE),
]


def suite_for_test_case(test_case: str) -> Suite:
    for pattern, suite in _SUITE_PREFIXES:
        if pattern.match(test_case.strip()):
            return suite
    raise ValueError(f"cannot infer suite from test case id {test_case!r}")
