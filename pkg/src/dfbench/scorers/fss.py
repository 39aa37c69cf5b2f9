"""Forensic string search scoring.

Each planted line in the ground truth carries a four-digit identifier. Tool
output lines are mapped to identifiers and compared as sets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..errors import UnknownTestCase
from ..metrics import MatchCounts, Metrics, compute_metrics
from ..records import GroundTruthRecord

_IDENTIFIER = re.compile(r"(?<!\d)(\d{4})(?!\d)")


@dataclass
class FssReport:
    test_case: str
    os: str
    reported_lines: Sequence[str] = field(default_factory=list)

    @classmethod
    def from_content(cls, test_case: str, os: str, content: str) -> "FssReport":
        return cls(test_case, os, [line for line in content.splitlines() if line.strip()])


def extract_identifier(line: str) -> Optional[str]:
    """First standalone run of exactly four decimal digits, if any."""
    m = _IDENTIFIER.search(line)
    return m.group(1) if m else None


def _applies(record: GroundTruthRecord, os: str) -> bool:
    return not record.os or not os or record.os.strip().lower() == os.strip().lower()


def score_string_search(
    report: FssReport, ground_truth: Sequence[GroundTruthRecord]
) -> tuple[MatchCounts, Metrics]:
    expected = {r.fss_identifier for r in ground_truth if _applies(r, report.os)}
    if not expected:
        raise UnknownTestCase(f"no string-search ground truth for {report.test_case} ({report.os})")

    reported_ids = set()
    unidentified = set()
    for line in report.reported_lines:
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        ident = extract_identifier(line)
        if ident is None:
            # identifier-less noise costs one FP per distinct line text
            unidentified.add(line)
        else:
            reported_ids.add(ident)

    tp = len(reported_ids & expected)
    counts = MatchCounts(
        tp=tp,
        fp=len(reported_ids - expected) + len(unidentified),
        fn=len(expected - reported_ids),
    )
    return counts, compute_metrics(counts)
