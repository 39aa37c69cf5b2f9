"""Ground-truth ingestion from per-suite manifests.

A manifest is a small TOML file::

    suite = "deleted_file_recovery"
    sources = ["dfr.csv"]

    [geometry]
    partition_start_sector = 2048
    sector_size = 512
    sectors_per_block = 1

    [expected]
    records = 8147

Source CSV columns per suite are documented on each ``ingest_*`` function.
Relative paths resolve against the manifest's directory.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
import sqlite3
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterator, Optional

from .config import load_toml
from .errors import GroundTruthUnavailable, OutOfPartition, ParseError
from .metrics import Suite
from .records import (
    GroundTruthRecord,
    blocks_to_ranges,
    format_block_ranges,
    parse_block_ranges,
    ranges_to_blocks,
    sqlite_case,
)
from .scorers.dfr import DfrGeometry, blocks_for_file
from .scorers.registry import iter_dump
from .scorers.sqlite import read_sqlite_header
from .store import Store

log = logging.getLogger(__name__)

# full NIST-derived corpus sizes, per suite
NIST_RECORD_COUNTS = {
    Suite.STRING_SEARCH: 1844,
    Suite.DELETED_FILE_RECOVERY: 8147,
    Suite.FILE_CARVING: 108,
    Suite.WINDOWS_REGISTRY: 49,
    Suite.SQLITE: 820,
}

_CARVE_TYPE_ALIASES = {"conti": "contig", "contig": "contig", "non": "non", "frag": "frag"}


@dataclass
class IngestManifest:
    suite: Suite
    sources: list
    root: Path
    geometry: DfrGeometry = field(default_factory=DfrGeometry)
    expected: Optional[int] = None


def load_manifest(path: "str | Path") -> IngestManifest:
    path = Path(path)
    data = load_toml(path)
    root = path.parent
    sources = []
    for src in data.get("sources", []):
        p = Path(src)
        sources.append(p if p.is_absolute() else root / p)
    geometry = DfrGeometry(**data.get("geometry", {}))
    return IngestManifest(
        suite=Suite.parse(data["suite"]),
        sources=sources,
        root=root,
        geometry=geometry,
        expected=data.get("expected", {}).get("records"),
    )


def _rows(path: Path) -> Iterator[tuple[int, dict]]:
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise GroundTruthUnavailable(f"cannot read manifest source {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        for row in reader:
            yield reader.line_num, {k.strip(): (v.strip() if isinstance(v, str) else v) for k, v in row.items() if k}


def _opt(row: dict, key: str) -> Optional[str]:
    value = row.get(key)
    return value if value not in (None, "") else None


def _resolve(root: Path, text: str) -> Path:
    p = Path(text)
    return p if p.is_absolute() else root / p


def fss_records(manifest: IngestManifest) -> list[GroundTruthRecord]:
    """Columns: test_case, identifier, line_text, os, file_status."""
    out = []
    for src in manifest.sources:
        for line, row in _rows(src):
            ident = row.get("identifier", "")
            if not re.fullmatch(r"\d{4}", ident):
                raise ParseError(f"{src}: identifier must be four digits, got {ident!r}", line)
            out.append(
                GroundTruthRecord(
                    test_case=row["test_case"],
                    cftt_task=Suite.STRING_SEARCH,
                    type=_opt(row, "file_status"),
                    os=_opt(row, "os"),
                    payload=f"{ident}|{row.get('line_text', '')}",
                )
            )
    return out


def dfr_records(manifest: IngestManifest) -> list[GroundTruthRecord]:
    """Columns: test_case, file_name, size, type, os, the four timestamps,
    and block information as one of ``start_sector`` (with ``size``),
    ``fragments`` (``sector:bytes;sector:bytes``) or explicit ``dfr_blocks``.
    ``partition_start_sector``, ``sector_size`` and ``sectors_per_block``
    columns override the manifest geometry per row.
    """
    out = []
    for src in manifest.sources:
        for line, row in _rows(src):
            g = manifest.geometry
            geometry = DfrGeometry(
                partition_start_sector=int(_opt(row, "partition_start_sector") or g.partition_start_sector),
                sector_size=int(_opt(row, "sector_size") or g.sector_size),
                sectors_per_block=int(_opt(row, "sectors_per_block") or g.sectors_per_block),
            )
            size = int(_opt(row, "size")) if _opt(row, "size") else None
            try:
                if _opt(row, "fragments"):
                    blocks = set()
                    for frag in row["fragments"].split(";"):
                        sector, _, nbytes = frag.partition(":")
                        blocks |= ranges_to_blocks([blocks_for_file(int(sector), int(nbytes), geometry)])
                    dfr_blocks = blocks_to_ranges(blocks)
                elif _opt(row, "start_sector") and size:
                    dfr_blocks = (blocks_for_file(int(row["start_sector"]), size, geometry),)
                elif _opt(row, "dfr_blocks"):
                    dfr_blocks = parse_block_ranges(row["dfr_blocks"])
                else:
                    dfr_blocks = None
            except OutOfPartition as exc:
                raise OutOfPartition(f"{src} line {line}: {exc}") from None
            out.append(
                GroundTruthRecord(
                    test_case=row["test_case"],
                    cftt_task=Suite.DELETED_FILE_RECOVERY,
                    type=_opt(row, "type"),
                    os=_opt(row, "os"),
                    file_name=_opt(row, "file_name"),
                    size=size,
                    access_time_stamp=_opt(row, "access_time_stamp"),
                    modify_time_stamp=_opt(row, "modify_time_stamp"),
                    change_time_stamp=_opt(row, "change_time_stamp"),
                    deleted_time_stamp=_opt(row, "deleted_time_stamp"),
                    dfr_blocks=dfr_blocks,
                )
            )
    return out


def carving_records(manifest: IngestManifest) -> list[GroundTruthRecord]:
    """Columns: test_case (``carve-<type>-<format>``), path, optional carve_type."""
    out = []
    for src in manifest.sources:
        for line, row in _rows(src):
            test_case = row["test_case"]
            carve_type = _opt(row, "carve_type")
            if carve_type is None:
                m = re.match(r"^carve-([a-z]+)-", test_case, re.IGNORECASE)
                carve_type = m.group(1) if m else ""
            carve_type = _CARVE_TYPE_ALIASES.get(carve_type.lower(), carve_type.lower())
            path = _resolve(manifest.root, row.get("path", ""))
            if not row.get("path") or not path.is_file():
                raise GroundTruthUnavailable(f"{src} line {line}: image {path} is not readable")
            try:
                path.open("rb").close()
            except OSError as exc:
                raise GroundTruthUnavailable(f"{src} line {line}: {exc}") from exc
            out.append(
                GroundTruthRecord(
                    test_case=test_case,
                    cftt_task=Suite.FILE_CARVING,
                    carve_type=carve_type,
                    payload=str(path.resolve()),
                )
            )
    return out


def registry_records(manifest: IngestManifest) -> list[GroundTruthRecord]:
    """Columns: test_case, path (a PATH,TYPE,VALUE,MTIME dump CSV)."""
    out = []
    for src in manifest.sources:
        for line, row in _rows(src):
            path = _resolve(manifest.root, row.get("path", ""))
            try:
                with open(path, newline="", encoding="utf-8-sig") as fh:
                    # header check only; rows are read at scoring time
                    next(iter_dump(fh), None)
            except OSError as exc:
                raise GroundTruthUnavailable(f"{src} line {line}: {exc}") from exc
            out.append(
                GroundTruthRecord(
                    test_case=row["test_case"],
                    cftt_task=Suite.WINDOWS_REGISTRY,
                    payload=str(path.resolve()),
                )
            )
    return out


def sqlite_parameters(path: Path, journal_mode: Optional[str] = None) -> dict:
    """SFT-01 parameters of a database file, read without opening it in SQLite."""
    data = path.read_bytes()
    header = read_sqlite_header(data)
    wal_companion = path.with_name(path.name + "-wal").exists()
    if header.journal_hint == "wal" or wal_companion:
        mode = "wal"
    else:
        mode = (journal_mode or "delete").lower()
    return {
        "database_name": path.name,
        "page_size": header.page_size,
        "journal_mode": mode,
        "page_count": header.page_count,
        "file_hash": hashlib.sha256(data).hexdigest(),
        "text_encoding": header.text_encoding,
    }


def sqlite_schema(path: Path) -> list[dict]:
    """Tables, ordered columns and row counts, read through an immutable URI."""
    uri = f"file:{path.resolve()}?mode=ro&immutable=1"
    conn = sqlite3.connect(uri, uri=True)
    try:
        names = [
            r[0]
            for r in conn.execute(
                "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name"
            )
        ]
        tables = []
        for name in names:
            quoted = '"' + name.replace('"', '""') + '"'
            columns = [r[1] for r in conn.execute(f"PRAGMA table_info({quoted})")]
            (count,) = conn.execute(f"SELECT COUNT(*) FROM {quoted}").fetchone()
            tables.append({"name": name, "columns": columns, "row_count": count})
        return tables
    finally:
        conn.close()


def _ids(text: Optional[str]) -> list[int]:
    return sorted(int(x) for x in re.split(r"[;,\s]+", text or "") if x)


def sqlite_records(manifest: IngestManifest) -> list[GroundTruthRecord]:
    """Columns: test_case, database_name, database_path, journal_mode,
    table, columns (``a|b|c``), row_count, deleted_row_ids, updated_row_ids
    (``1;2;3``) and source_file. SFT-02 rows sharing a database are merged
    into one record; an SFT-02 row with a database_path and no table reads
    the schema from the file.
    """
    payloads: dict[tuple[str, str], dict] = {}
    for src in manifest.sources:
        for line, row in _rows(src):
            test_case = row["test_case"]
            case = sqlite_case(test_case)
            db_path = _resolve(manifest.root, row["database_path"]) if _opt(row, "database_path") else None
            name = _opt(row, "database_name") or (db_path.name if db_path else None)
            if name is None:
                raise ParseError(f"{src}: database_name or database_path required", line)
            key = (test_case, name)
            if case == "SFT-01":
                if db_path is None:
                    raise ParseError(f"{src}: SFT-01 rows need database_path", line)
                params = sqlite_parameters(db_path, _opt(row, "journal_mode"))
                params["database_name"] = name
                payloads[key] = params
            elif case == "SFT-02":
                entry = payloads.setdefault(key, {"database_name": name, "tables": []})
                if _opt(row, "table"):
                    entry["tables"].append(
                        {
                            "name": row["table"],
                            "columns": [c for c in row.get("columns", "").split("|") if c],
                            "row_count": int(row.get("row_count") or 0),
                        }
                    )
                elif db_path is not None:
                    entry["tables"].extend(sqlite_schema(db_path))
            elif case == "SFT-03":
                payloads[key] = {
                    "database_name": name,
                    "deleted_row_ids": _ids(row.get("deleted_row_ids")),
                    "updated_row_ids": _ids(row.get("updated_row_ids")),
                }
            else:
                payloads[key] = {"database_name": name, "source_file": row.get("source_file", "")}
    return [
        GroundTruthRecord(
            test_case=test_case,
            cftt_task=Suite.SQLITE,
            payload=json.dumps(body, sort_keys=True, ensure_ascii=False),
        )
        for (test_case, _), body in payloads.items()
    ]


_BUILDERS = {
    Suite.STRING_SEARCH: fss_records,
    Suite.DELETED_FILE_RECOVERY: dfr_records,
    Suite.FILE_CARVING: carving_records,
    Suite.WINDOWS_REGISTRY: registry_records,
    Suite.SQLITE: sqlite_records,
}


def ingest(store: Store, manifest: "IngestManifest | str | Path", suite: "Suite | str | None" = None) -> int:
    """Insert every record described by ``manifest``; returns the count.

    All-or-nothing: a duplicate of anything already stored aborts the whole
    ingest with ``DuplicateGroundTruth``.
    """
    if not isinstance(manifest, IngestManifest):
        manifest = load_manifest(manifest)
    if suite is not None and Suite.parse(suite) is not manifest.suite:
        raise ValueError(f"manifest is for {manifest.suite.value}, not {Suite.parse(suite).value}")
    records = _BUILDERS[manifest.suite](manifest)
    ids = store.insert_many(records)
    if manifest.expected is not None and len(ids) != manifest.expected:
        log.warning("%s: ingested %d records, manifest expected %d", manifest.suite.value, len(ids), manifest.expected)
    return len(ids)


def ingest_fss(store, manifest):
    return ingest(store, manifest, Suite.STRING_SEARCH)


def ingest_dfr(store, manifest):
    return ingest(store, manifest, Suite.DELETED_FILE_RECOVERY)


def ingest_carving(store, manifest):
    return ingest(store, manifest, Suite.FILE_CARVING)


def ingest_registry(store, manifest):
    return ingest(store, manifest, Suite.WINDOWS_REGISTRY)


def ingest_sqlite(store, manifest):
    return ingest(store, manifest, Suite.SQLITE)


# ground-truth interchange CSV: one record per row, columns named after the fields

RECORD_COLUMNS = [f.name for f in fields(GroundTruthRecord) if f.name != "id"]


def import_records_csv(store: Store, path: "str | Path") -> int:
    records = []
    for line, row in _rows(Path(path)):
        missing = [c for c in ("test_case", "cftt_task") if not _opt(row, c)]
        if missing:
            raise ParseError(f"missing {missing}", line)
        values = {c: _opt(row, c) for c in RECORD_COLUMNS}
        values["cftt_task"] = Suite.parse(values["cftt_task"])
        if values["size"] is not None:
            values["size"] = int(values["size"])
        if values["dfr_blocks"] is not None:
            values["dfr_blocks"] = parse_block_ranges(values["dfr_blocks"])
        records.append(GroundTruthRecord(**values))
    return len(store.insert_many(records))


def export_records_csv(records, path: "str | Path") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            row = []
            for c in RECORD_COLUMNS:
                v = getattr(r, c)
                if c == "cftt_task":
                    v = v.value
                elif c == "dfr_blocks" and v is not None:
                    v = format_block_ranges(v)
                row.append("" if v is None else v)
            writer.writerow(row)
