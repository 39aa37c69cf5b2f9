"""SQLite data recovery scoring (SFT-01..04) and the database header reader."""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..errors import InvalidReport, NotSqlite, Truncated, UnknownTestCase
from ..metrics import MatchCounts, Metrics, compute_metrics
from ..records import GroundTruthRecord

MAGIC = b"SQLite format 3\x00"
HEADER_SIZE = 100
JOURNAL_MODES = ("delete", "wal", "truncate", "persist", "memory", "off")
_ENCODINGS = {1: "utf8", 2: "utf16le", 3: "utf16be"}


@dataclass(frozen=True)
class SqliteHeader:
    page_size: int
    page_count: int
    text_encoding: Optional[str]
    write_version: int
    read_version: int
    journal_hint: Optional[str]


def read_sqlite_header(data: bytes) -> SqliteHeader:
    """Decode the 100-byte database header.

    The in-header page count is trusted only when its version-valid-for
    number matches the change counter; otherwise it is derived from the
    input length. ``journal_hint`` is ``"wal"`` when the write version is 2
    and ``None`` otherwise (rollback modes are indistinguishable here).
    """
    if len(data) < HEADER_SIZE:
        raise Truncated(f"need {HEADER_SIZE} header bytes, got {len(data)}")
    if data[:16] != MAGIC:
        raise NotSqlite("bad magic string")
    (raw_page_size,) = struct.unpack(">H", data[16:18])
    page_size = 65536 if raw_page_size == 1 else raw_page_size
    write_version, read_version = data[18], data[19]
    (change_counter,) = struct.unpack(">I", data[24:28])
    (page_count,) = struct.unpack(">I", data[28:32])
    (encoding,) = struct.unpack(">I", data[56:60])
    (valid_for,) = struct.unpack(">I", data[92:96])
    if page_count == 0 or valid_for != change_counter:
        page_count = len(data) // page_size if page_size else 0
    return SqliteHeader(
        page_size=page_size,
        page_count=page_count,
        text_encoding=_ENCODINGS.get(encoding),
        write_version=write_version,
        read_version=read_version,
        journal_hint="wal" if write_version == 2 else None,
    )


def canonical_encoding(value) -> Optional[str]:
    if value is None:
        return None
    return re.sub(r"[\s_\-]", "", str(value)).lower()


@dataclass
class SqliteConfigReport:
    page_size: Optional[int] = None
    journal_mode: Optional[str] = None
    page_count: Optional[int] = None
    file_hash: Optional[str] = None
    text_encoding: Optional[str] = None
    database_name: Optional[str] = None


@dataclass(frozen=True)
class TableReport:
    name: str
    columns: tuple
    row_count: int


@dataclass
class SqliteSchemaReport:
    tables: Sequence[TableReport] = field(default_factory=list)
    database_name: Optional[str] = None


@dataclass
class SqliteRowRecoveryReport:
    database_name: Optional[str] = None
    deleted_row_ids: frozenset = frozenset()
    updated_row_ids: frozenset = frozenset()


@dataclass
class SqliteSourceReport:
    source_file: str = ""
    database_name: Optional[str] = None


def select_record(
    records: Sequence[GroundTruthRecord], database_name: Optional[str], test_case: str = ""
) -> dict:
    """Payload of the GT variation a report addresses, chosen by database name."""
    if not records:
        raise UnknownTestCase(f"no SQLite ground truth for {test_case}")
    payloads = [r.payload_json() for r in records]
    if database_name is None:
        if len(payloads) == 1:
            return payloads[0]
        raise InvalidReport(f"{test_case} has {len(payloads)} databases; database_name is required")
    for payload in payloads:
        if payload.get("database_name") == database_name:
            return payload
    raise UnknownTestCase(f"no SQLite ground truth for {test_case} database {database_name!r}")


def _int_or_none(value):
    try:
        return int(value)
    except (TypeError, ValueError):
        return None


def _lower_or_none(value):
    return None if value is None else str(value).strip().lower()


def score_sft01(expected: dict, report: SqliteConfigReport) -> tuple[MatchCounts, Metrics]:
    """Five parameters, each a TP when it matches and an FP otherwise; FN is 0."""
    checks = [
        _int_or_none(report.page_size) == _int_or_none(expected["page_size"]),
        _lower_or_none(report.journal_mode) == _lower_or_none(expected["journal_mode"]),
        _int_or_none(report.page_count) == _int_or_none(expected["page_count"]),
        _lower_or_none(report.file_hash) == _lower_or_none(expected["file_hash"]),
        canonical_encoding(report.text_encoding) == canonical_encoding(expected["text_encoding"]),
    ]
    counts = MatchCounts(tp=sum(checks), fp=len(checks) - sum(checks), fn=0)
    return counts, compute_metrics(counts)


def score_sft02(expected: dict, report: SqliteSchemaReport) -> tuple[MatchCounts, Metrics]:
    """A reported table is a TP only if name, ordered columns and row count all match."""
    names = [t.name for t in report.tables]
    if len(set(names)) != len(names):
        raise InvalidReport("table names in a schema report must be unique")
    gt = {t["name"]: (tuple(t["columns"]), int(t["row_count"])) for t in expected["tables"]}
    tp = sum(gt.get(t.name) == (tuple(t.columns), int(t.row_count)) for t in report.tables)
    counts = MatchCounts(tp=tp, fp=len(report.tables) - tp, fn=0)
    return counts, compute_metrics(counts)


def score_sft03(
    expected: dict, report: SqliteRowRecoveryReport, strict: bool = False
) -> tuple[MatchCounts, Metrics]:
    """Row-id recovery.

    By default FP counts ground-truth ids missing from the report and FN
    counts reported ids with no ground-truth record, the reverse of the usual
    convention; ``strict=True`` swaps them back.
    """
    deleted, updated = set(report.deleted_row_ids), set(report.updated_row_ids)
    if deleted & updated:
        raise InvalidReport("deleted and updated row ids must be disjoint")
    gt_deleted = {int(i) for i in expected["deleted_row_ids"]}
    gt_updated = {int(i) for i in expected["updated_row_ids"]}
    tp = len(deleted & gt_deleted) + len(updated & gt_updated)
    missing = len(gt_deleted - deleted) + len(gt_updated - updated)
    spurious = len(deleted - gt_deleted) + len(updated - gt_updated)
    if strict:
        counts = MatchCounts(tp=tp, fp=spurious, fn=missing)
    else:
        counts = MatchCounts(tp=tp, fp=missing, fn=spurious)
    return counts, compute_metrics(counts)


def base_name(path: str) -> str:
    return re.split(r"[\\/]", path.strip())[-1]


def score_sft04(expected: dict, report: SqliteSourceReport) -> tuple[MatchCounts, Metrics]:
    """Case-sensitive base-name match of the source file; FN is 0."""
    ok = base_name(report.source_file) == base_name(expected["source_file"])
    counts = MatchCounts(tp=int(ok), fp=int(not ok), fn=0)
    return counts, compute_metrics(counts)


def table_reports(tables: Iterable) -> list[TableReport]:
    """Build ``TableReport`` values from dicts or tuples."""
    out = []
    for t in tables:
        if isinstance(t, TableReport):
            out.append(t)
        elif isinstance(t, dict):
            out.append(TableReport(t["name"], tuple(t["columns"]), int(t["row_count"])))
        else:
            name, columns, row_count = t
            out.append(TableReport(name, tuple(columns), int(row_count)))
    return out
