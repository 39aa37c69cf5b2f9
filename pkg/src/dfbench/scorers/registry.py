"""Windows registry recovery scoring: row-level dump CSV comparison."""

from __future__ import annotations

import csv
import hashlib
import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from ..errors import ParseError
from ..metrics import MatchCounts, Metrics, compute_metrics
from ..timestamps import canonical_timestamp

HEADER = ("PATH", "TYPE", "VALUE", "MTIME")
_SEPARATORS = re.compile(r"[\\/]+")


@dataclass(frozen=True)
class RegistryRow:
    path: str
    type: str
    value: str
    mtime: str = ""


def normalize_row(row: RegistryRow) -> RegistryRow:
    path = _SEPARATORS.sub(lambda _: "\\", row.path.strip()).casefold()
    mtime = row.mtime.strip()
    if mtime:
        try:
            mtime = canonical_timestamp(mtime)
        except ValueError:
            pass
    return RegistryRow(path, row.type.strip().casefold(), row.value.strip(), mtime)


def render_value(value) -> str:
    """Text form for dump values: bytes as bare lowercase hex, lists joined by LF."""
    if isinstance(value, (bytes, bytearray)):
        return bytes(value).hex()
    if isinstance(value, (list, tuple)):
        return "\n".join(render_value(v) for v in value)
    return "" if value is None else str(value)


def iter_dump(stream: TextIO) -> Iterator[RegistryRow]:
    """Stream rows from a PATH,TYPE,VALUE,MTIME dump; raises ParseError."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty dump, header PATH,TYPE,VALUE,MTIME required", line=1) from None
    except csv.Error as exc:
        raise ParseError(str(exc), line=1) from None
    if tuple(h.strip().upper() for h in header) != HEADER:
        raise ParseError(f"header must be {','.join(HEADER)}, got {','.join(header)}", line=1)
    while True:
        try:
            fields = next(reader)
        except StopIteration:
            return
        except csv.Error as exc:
            raise ParseError(str(exc), line=reader.line_num) from None
        if not fields:
            continue
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", line=reader.line_num)
        row = RegistryRow(*fields)
        if not row.path.strip():
            raise ParseError("empty PATH", line=reader.line_num)
        yield row


def write_dump(rows: Iterable[RegistryRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(HEADER)
    for r in rows:
        writer.writerow([r.path, r.type, r.value, r.mtime])


def dump_bytes(rows: Iterable[RegistryRow]) -> bytes:
    buf = io.StringIO(newline="")
    write_dump(rows, buf)
    return buf.getvalue().encode("utf-8")


def read_dump(source: "str | Path | bytes | TextIO") -> list[RegistryRow]:
    return list(open_rows(source))


def open_rows(source) -> Iterator[RegistryRow]:
    if isinstance(source, (bytes, bytearray)):
        try:
            text = bytes(source).decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ParseError(f"dump is not UTF-8: {exc}") from None
        yield from iter_dump(io.StringIO(text, newline=""))
    elif isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8-sig") as fh:
            yield from iter_dump(fh)
    else:
        yield from iter_dump(source)


def _row_key(row: RegistryRow, include_mtime: bool) -> bytes:
    row = normalize_row(row)
    parts = [row.path, row.type, row.value] + ([row.mtime] if include_mtime else [])
    # digests keep memory per distinct row small on multi-million-row dumps
    return hashlib.blake2b("\x1f".join(parts).encode("utf-8"), digest_size=16).digest()


def row_keys(rows: Iterable[RegistryRow], include_mtime: bool = False) -> set[bytes]:
    return {_row_key(r, include_mtime) for r in rows}


def score_registry(
    ground_truth: "str | Path | bytes | Iterable[RegistryRow]",
    tool_dump: "str | Path | bytes | Iterable[RegistryRow]",
    include_mtime: bool = False,
) -> tuple[MatchCounts, Metrics]:
    """TP = rows in both dumps, FN = GT-only rows, FP = tool-only rows."""

    def keys(source):
        if isinstance(source, (str, Path, bytes, bytearray)) or hasattr(source, "read"):
            source = open_rows(source)
        return row_keys(source, include_mtime)

    return score_registry_keys(keys(ground_truth), keys(tool_dump))


def score_registry_keys(gt_keys: set, tool_keys: set) -> tuple[MatchCounts, Metrics]:
    tp = len(gt_keys & tool_keys)
    counts = MatchCounts(tp=tp, fp=len(tool_keys) - tp, fn=len(gt_keys) - tp)
    return counts, compute_metrics(counts)
