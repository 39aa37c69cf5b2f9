"""Record types persisted by the store, plus their text codecs."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Optional

from .errors import SchemaViolation, UnknownTestCase
from .metrics import MatchCounts, Suite, main_test_case
from .timestamps import canonical_timestamp

FILE_STATUSES = ("active", "deleted", "unallocated")
CARVE_TYPES = ("contig", "non", "frag")
TIMESTAMP_FIELDS = (
    "access_time_stamp",
    "modify_time_stamp",
    "change_time_stamp",
    "deleted_time_stamp",
)

# Block-level ground truth is incomplete for these cases; their bare ids may be
# stored without dfr_blocks and are then unscoreable.
INCOMPLETE_DFR_CASES = frozenset({"DFR-06", "DFR-07", "DFR-08", "DFR-09", "DFR-10", "DFR-13"})

_DFR_SUFFIXES = {
    "": "blocks",
    "MAC": "mac",
    "SIZE": "size",
    "CHAR": "name",
    "RECYCLE": "name",
    "NTFS": "name",
}

_FSS_PAYLOAD = re.compile(r"^(\d{4})\|(.*)$", re.DOTALL)


@dataclass(frozen=True, order=True)
class BlockRange:
    start_block: int
    end_block: int

    def __post_init__(self):
        if self.start_block < 0 or self.end_block < self.start_block:
            raise ValueError(f"invalid block range {self.start_block}-{self.end_block}")

    def blocks(self) -> range:
        return range(self.start_block, self.end_block + 1)


def format_block_ranges(ranges) -> str:
    return ";".join(
        str(r.start_block) if r.start_block == r.end_block else f"{r.start_block}-{r.end_block}"
        for r in ranges
    )


def parse_block_ranges(text: str) -> tuple[BlockRange, ...]:
    """Parse ``"0-3;7;9-10"`` into block ranges."""
    ranges = []
    for part in re.split(r"[;,\s]+", text.strip()):
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        ranges.append(BlockRange(int(lo), int(hi) if sep else int(lo)))
    return tuple(ranges)


def blocks_to_ranges(blocks) -> tuple[BlockRange, ...]:
    """Compress a set of block indices into sorted maximal ranges."""
    out = []
    for b in sorted(set(blocks)):
        if out and out[-1][1] == b - 1:
            out[-1][1] = b
        else:
            out.append([b, b])
    return tuple(BlockRange(lo, hi) for lo, hi in out)


def ranges_to_blocks(ranges) -> frozenset[int]:
    return frozenset(b for r in ranges for b in r.blocks())


def dfr_variant(test_case: str) -> str:
    """Validator selected by a DFR test-case suffix (bare id scores blocks)."""
    base = main_test_case(test_case)
    suffix = test_case.strip()[len(base):].strip("-_ ").upper()
    try:
        return _DFR_SUFFIXES[suffix]
    except KeyError:
        raise UnknownTestCase(f"unsupported deleted-file-recovery variant {test_case!r}") from None


def sqlite_case(test_case: str) -> str:
    """``SFT-01-foo`` -> ``SFT-01`` (zero-padded)."""
    m = re.match(r"^SFT-0*(\d+)", test_case.strip(), re.IGNORECASE)
    if not m:
        raise UnknownTestCase(f"not an SQLite test case: {test_case!r}")
    return f"SFT-{int(m.group(1)):02d}"


@dataclass(frozen=True)
class GroundTruthRecord:
    test_case: str
    cftt_task: Suite
    type: Optional[str] = None
    os: Optional[str] = None
    file_name: Optional[str] = None
    size: Optional[int] = None
    access_time_stamp: Optional[str] = None
    modify_time_stamp: Optional[str] = None
    change_time_stamp: Optional[str] = None
    deleted_time_stamp: Optional[str] = None
    dfr_blocks: Optional[tuple] = None
    carve_type: Optional[str] = None
    payload: Optional[str] = None
    id: Optional[int] = None

    @property
    def fss_identifier(self) -> str:
        return _FSS_PAYLOAD.match(self.payload or "").group(1)

    @property
    def fss_line(self) -> str:
        return _FSS_PAYLOAD.match(self.payload or "").group(2)

    def payload_json(self) -> dict:
        return json.loads(self.payload or "{}")

    def block_set(self) -> frozenset[int]:
        return ranges_to_blocks(self.dfr_blocks or ())

    def natural_key(self) -> str:
        if self.cftt_task is Suite.STRING_SEARCH:
            return self.fss_identifier
        body = asdict(replace(self, id=None))
        body["cftt_task"] = self.cftt_task.value
        body["dfr_blocks"] = format_block_ranges(self.dfr_blocks) if self.dfr_blocks else None
        return json.dumps(body, sort_keys=True, ensure_ascii=False)


def normalize_record(record: GroundTruthRecord) -> GroundTruthRecord:
    """Canonicalise timestamps and enum text, then validate the result."""
    changes = {"cftt_task": Suite.parse(record.cftt_task), "test_case": record.test_case.strip()}
    for name in TIMESTAMP_FIELDS:
        try:
            changes[name] = canonical_timestamp(getattr(record, name))
        except ValueError as exc:
            raise SchemaViolation(f"{name}: {exc}") from None
    if record.type:
        changes["type"] = record.type.strip().lower()
    if record.carve_type:
        changes["carve_type"] = record.carve_type.strip().lower()
    if record.dfr_blocks is not None:
        changes["dfr_blocks"] = tuple(record.dfr_blocks)
    record = replace(record, **changes)
    validate_record(record)
    return record


def validate_record(record: GroundTruthRecord) -> None:
    def fail(msg):
        raise SchemaViolation(f"{record.test_case or '<empty>'}: {msg}")

    if not record.test_case:
        fail("test_case must be non-empty")
    if record.type is not None and record.type not in FILE_STATUSES:
        fail(f"type must be one of {FILE_STATUSES}")
    suite = record.cftt_task
    if record.dfr_blocks is not None and suite is not Suite.DELETED_FILE_RECOVERY:
        fail("dfr_blocks is only valid for deleted_file_recovery")
    if record.carve_type is not None and suite is not Suite.FILE_CARVING:
        fail("carve_type is only valid for file_carving")

    if suite is Suite.STRING_SEARCH:
        if not _FSS_PAYLOAD.match(record.payload or ""):
            fail("payload must be '<4-digit identifier>|<line text>'")
    elif suite is Suite.DELETED_FILE_RECOVERY:
        try:
            variant = dfr_variant(record.test_case)
        except UnknownTestCase as exc:
            fail(str(exc))
        if variant == "blocks":
            if not record.dfr_blocks and main_test_case(record.test_case).upper() not in INCOMPLETE_DFR_CASES:
                fail("block test case requires dfr_blocks")
        elif variant == "mac":
            if not any(getattr(record, n) for n in TIMESTAMP_FIELDS[:3]):
                fail("MAC-time test case requires timestamps")
        elif variant == "size":
            if record.size is None:
                fail("file-size test case requires size")
        elif not record.file_name:
            fail("file-name test case requires file_name")
        if record.size is not None and record.size < 0:
            fail("size must be non-negative")
    elif suite is Suite.FILE_CARVING:
        if record.carve_type not in CARVE_TYPES:
            fail(f"carve_type must be one of {CARVE_TYPES}")
        if not record.payload:
            fail("payload must name the ground-truth image path")
    elif suite is Suite.WINDOWS_REGISTRY:
        if not record.payload:
            fail("payload must name the ground-truth dump CSV path")
    elif suite is Suite.SQLITE:
        try:
            body = record.payload_json()
            case = sqlite_case(record.test_case)
        except (ValueError, UnknownTestCase) as exc:
            fail(str(exc))
        if not isinstance(body, dict):
            fail("payload must be a JSON object")
        required = SQLITE_PAYLOAD_FIELDS.get(case)
        if required is None:
            fail(f"unsupported SQLite test case {case}")
        missing = [k for k in required if k not in body]
        if missing:
            fail(f"payload missing {missing}")


SQLITE_PAYLOAD_FIELDS = {
    "SFT-01": ("page_size", "journal_mode", "page_count", "file_hash", "text_encoding"),
    "SFT-02": ("tables",),
    "SFT-03": ("database_name", "deleted_row_ids", "updated_row_ids"),
    "SFT-04": ("source_file",),
}


@dataclass(frozen=True)
class TestResultRecord:
    test_case: str
    counts: MatchCounts
    f1: float
    tool: str = "unspecified"
    job_id: str = ""
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    )
    id: Optional[int] = None

    __test__ = False  # not a pytest class
