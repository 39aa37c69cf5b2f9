"""Deleted file recovery scoring: block sets and the metadata validators."""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from ..errors import OutOfPartition, UnknownTestCase
from ..metrics import MatchCounts, Metrics, compute_metrics
from ..records import BlockRange, GroundTruthRecord
from ..timestamps import parse_timestamp


@dataclass(frozen=True)
class DfrGeometry:
    partition_start_sector: int = 0
    sector_size: int = 512
    sectors_per_block: int = 1

    def __post_init__(self):
        if self.partition_start_sector < 0:
            raise ValueError("partition_start_sector must be non-negative")
        if self.sector_size <= 0 or self.sector_size & (self.sector_size - 1):
            raise ValueError("sector_size must be a power of two")
        if self.sectors_per_block < 1:
            raise ValueError("sectors_per_block must be at least 1")


@dataclass
class DfrRecoveredFile:
    file_name: Optional[str] = None
    size: Optional[int] = None
    accessed: Optional[object] = None
    modified: Optional[object] = None
    created: Optional[object] = None
    blocks: Optional[frozenset] = None


def sector_to_block(sector: int, geometry: DfrGeometry) -> int:
    """Block index of an absolute sector: its offset from the partition start.

    Block sets are kept at sector granularity, so no division by
    ``sectors_per_block`` happens here.
    """
    if sector < geometry.partition_start_sector:
        raise OutOfPartition(
            f"sector {sector} precedes partition start {geometry.partition_start_sector}"
        )
    return sector - geometry.partition_start_sector


def blocks_for_file(start_sector: int, file_size: int, geometry: DfrGeometry) -> BlockRange:
    if file_size <= 0:
        raise ValueError("file_size must be positive")
    start = sector_to_block(start_sector, geometry)
    n_blocks = math.ceil(file_size / (geometry.sector_size * geometry.sectors_per_block))
    return BlockRange(start, start + n_blocks * geometry.sectors_per_block - 1)


def _require(ground_truth, test_case, predicate, what):
    records = [r for r in ground_truth if predicate(r)]
    if not records:
        raise UnknownTestCase(f"no {what} ground truth for {test_case}")
    return records


def score_blocks(
    ground_truth: Sequence[GroundTruthRecord], recovered: Iterable[Iterable[int]], test_case: str = ""
) -> tuple[MatchCounts, Metrics]:
    """A recovered file is a TP only when its block set equals a GT file's set.

    Partial overlaps and phantom recoveries are FPs; every GT set is claimed
    at most once and unclaimed ones are FNs.
    """
    records = _require(ground_truth, test_case, lambda r: r.dfr_blocks, "block")
    unclaimed = [r.block_set() for r in records]
    tp = fp = 0
    for blocks in recovered:
        blocks = frozenset(blocks)
        try:
            unclaimed.remove(blocks)
            tp += 1
        except ValueError:
            fp += 1
    counts = MatchCounts(tp, fp, len(unclaimed))
    return counts, compute_metrics(counts)


def _nfc(name: str) -> str:
    return unicodedata.normalize("NFC", name)


def _pair(records, file: DfrRecoveredFile, claimed: set, matches) -> Optional[int]:
    """Index of the GT record a reported file should be judged against."""
    open_idx = [i for i in range(len(records)) if i not in claimed]
    if file.file_name is not None:
        named = [i for i in open_idx if records[i].file_name is not None
                 and _nfc(records[i].file_name) == _nfc(file.file_name)]
        if named:
            return named[0]
        if any(r.file_name for r in records):
            return None
    for i in open_idx:
        if matches(records[i], file):
            return i
    return None


def _score_metadata(records, reported, matches) -> MatchCounts:
    claimed: set[int] = set()
    tp = fp = 0
    for file in reported:
        i = _pair(records, file, claimed, matches)
        if i is not None and matches(records[i], file):
            claimed.add(i)
            tp += 1
        else:
            fp += 1
    return MatchCounts(tp, fp, len(records) - len(claimed))


_MAC_FIELDS = (
    ("accessed", "access_time_stamp"),
    ("modified", "modify_time_stamp"),
    ("created", "change_time_stamp"),
)


def _mac_equal(record: GroundTruthRecord, file: DfrRecoveredFile) -> bool:
    for reported_attr, gt_attr in _MAC_FIELDS:
        expected = getattr(record, gt_attr)
        if expected is None:
            continue
        try:
            got = parse_timestamp(getattr(file, reported_attr))
        except ValueError:
            return False
        if got is None or got != parse_timestamp(expected):
            return False
    return True


def score_mac_times(
    ground_truth: Sequence[GroundTruthRecord],
    reported: "DfrRecoveredFile | Sequence[DfrRecoveredFile]",
    test_case: str = "",
) -> tuple[MatchCounts, Metrics]:
    """All-or-nothing MAC check per file; an absent timestamp is a mismatch."""
    records = _require(
        ground_truth, test_case,
        lambda r: any(getattr(r, g) for _, g in _MAC_FIELDS), "MAC-time",
    )
    if isinstance(reported, DfrRecoveredFile):
        reported = [reported]
    counts = _score_metadata(records, reported, _mac_equal)
    return counts, compute_metrics(counts)


def score_file_size(
    ground_truth: Sequence[GroundTruthRecord],
    reported: "int | DfrRecoveredFile | Sequence[int | DfrRecoveredFile]",
    test_case: str = "",
) -> tuple[MatchCounts, Metrics]:
    records = _require(ground_truth, test_case, lambda r: r.size is not None, "file-size")
    if isinstance(reported, (int, DfrRecoveredFile)):
        reported = [reported]
    files = [f if isinstance(f, DfrRecoveredFile) else DfrRecoveredFile(size=f) for f in reported]
    counts = _score_metadata(records, files, lambda r, f: f.size is not None and int(f.size) == r.size)
    return counts, compute_metrics(counts)


def score_file_name(
    ground_truth: Sequence[GroundTruthRecord], reported: Sequence[str], test_case: str = ""
) -> tuple[MatchCounts, Metrics]:
    """Exact name match after NFC normalisation; multiset semantics."""
    records = _require(ground_truth, test_case, lambda r: r.file_name, "file-name")
    remaining = [_nfc(r.file_name) for r in records]
    tp = fp = 0
    for name in reported:
        try:
            remaining.remove(_nfc(name))
            tp += 1
        except ValueError:
            fp += 1
    counts = MatchCounts(tp, fp, len(remaining))
    return counts, compute_metrics(counts)
