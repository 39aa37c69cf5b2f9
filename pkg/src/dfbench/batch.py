"""Offline batch evaluation from CSV files.

A batch CSV holds one claimed finding per row for a single suite. Rows are
grouped by test case (and tool, and database for SQLite) in order of first
appearance; each group is scored once. The report is a CSV with a fixed
column order, six-decimal scores and a trailing suite summary row, so the
same input and ground truth always produce the same bytes.

Suite columns (``test_case`` and ``tool`` are common to all):

* string search: ``os, line``
* deleted file recovery: ``file_name, size, accessed, modified, created, blocks``
* file carving: ``path, format``
* windows registry: ``path``
* sqlite: ``database_name, parameter, value, table, columns, row_count,
  row_id, row_kind, source_file``

A row whose payload columns are all blank declares its test case with no
findings. ``path`` columns resolve against the batch file's directory.
"""

from __future__ import annotations

import csv
import io
import logging
import sys
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    DFBenchError,
    EmptySuite,
    GroundTruthUnavailable,
    InvalidReport,
    ParseError,
    UnknownTestCase,
)
from .evaluate import Evaluation, Evaluator
from .metrics import (
    MatchCounts,
    Metrics,
    Suite,
    aggregate_suite,
    average_sub_cases,
    format_score,
    main_test_case,
    suite_for_test_case,
)
from .records import blocks_to_ranges, format_block_ranges, parse_block_ranges, sqlite_case
from .scorers.carving import CarvedFile
from .scorers.dfr import DfrRecoveredFile
from .scorers.registry import dump_bytes, open_rows
from .scorers.sqlite import (
    SqliteConfigReport,
    SqliteRowRecoveryReport,
    SqliteSchemaReport,
    SqliteSourceReport,
    TableReport,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_GROUND_TRUTH = 2
EXIT_INTERNAL = 3

REPORT_COLUMNS = ["test_case", "tool", "tp", "fp", "fn", "precision", "recall", "f1"]

SUITE_COLUMNS = {
    Suite.STRING_SEARCH: ["os", "line"],
    Suite.DELETED_FILE_RECOVERY: ["file_name", "size", "accessed", "modified", "created", "blocks"],
    Suite.FILE_CARVING: ["path", "format"],
    Suite.WINDOWS_REGISTRY: ["path"],
    Suite.SQLITE: [
        "database_name", "parameter", "value", "table", "columns",
        "row_count", "row_id", "row_kind", "source_file",
    ],
}

SFT01_PARAMETERS = ("page_size", "journal_mode", "page_count", "file_hash", "text_encoding")


class BatchError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class _Group:
    test_case: str
    tool: str
    first_line: int
    database_name: Optional[str] = None
    rows: list = field(default_factory=list)


def _blank(row: dict, columns) -> bool:
    return all(not (row.get(c) or "").strip() for c in columns)


def read_groups(test_case_name: str, input_csv: "str | Path") -> tuple[Suite, list[_Group]]:
    suite = suite_for_test_case(test_case_name)
    columns = SUITE_COLUMNS[suite]
    try:
        fh = open(input_csv, newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise BatchError(EXIT_INPUT, f"cannot read {input_csv}: {exc}") from exc
    groups: "OrderedDict[tuple, _Group]" = OrderedDict()
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise BatchError(EXIT_INPUT, f"{input_csv}: line 1: missing header row")
        missing = [c for c in ["test_case", "tool", *columns] if c not in reader.fieldnames]
        if missing:
            raise BatchError(EXIT_INPUT, f"{input_csv}: line 1: header missing columns {missing}")
        try:
            for row in reader:
                line = reader.line_num
                if None in row:
                    raise BatchError(EXIT_INPUT, f"{input_csv}: line {line}: too many fields")
                test_case = (row.get("test_case") or "").strip() or test_case_name
                try:
                    row_suite = suite_for_test_case(test_case)
                except ValueError:
                    row_suite = None
                if row_suite is not suite:
                    raise BatchError(
                        EXIT_INPUT,
                        f"{input_csv}: line {line}: test case {test_case!r} is not a {suite.value} case",
                    )
                tool = (row.get("tool") or "").strip() or "unspecified"
                key = (test_case, tool)
                database_name = None
                if suite is Suite.SQLITE:
                    database_name = (row.get("database_name") or "").strip() or None
                    key += (database_name,)
                group = groups.setdefault(key, _Group(test_case, tool, line, database_name))
                if not _blank(row, [c for c in columns if c != "database_name"]):
                    group.rows.append((line, row))
        except csv.Error as exc:
            raise BatchError(EXIT_INPUT, f"{input_csv}: line {reader.line_num}: {exc}") from exc
    if not groups:
        raise BatchError(EXIT_INPUT, f"{input_csv}: no rows")
    return suite, list(groups.values())


def _fail(path, line, msg):
    raise BatchError(EXIT_INPUT, f"{path}: line {line}: {msg}")


def _payload(suite: Suite, group: _Group, base: Path, path):
    rows = group.rows
    if suite is Suite.STRING_SEARCH:
        oses = {r["os"].strip() for _, r in rows if r.get("os", "").strip()}
        if len(oses) > 1:
            _fail(path, group.first_line, f"conflicting os values {sorted(oses)}")
        lines = [r["line"] for _, r in rows if r.get("line", "")]
        return (oses.pop() if oses else ""), lines

    if suite is Suite.DELETED_FILE_RECOVERY:
        files = []
        for line, r in rows:
            try:
                size = int(r["size"]) if r.get("size", "").strip() else None
                blocks = (
                    frozenset(b for rng in parse_block_ranges(r["blocks"]) for b in rng.blocks())
                    if r.get("blocks", "").strip() else None
                )
            except ValueError as exc:
                _fail(path, line, exc)
            files.append(
                DfrRecoveredFile(
                    file_name=r.get("file_name") or None,
                    size=size,
                    accessed=r.get("accessed") or None,
                    modified=r.get("modified") or None,
                    created=r.get("created") or None,
                    blocks=blocks,
                )
            )
        return files

    if suite is Suite.FILE_CARVING:
        carved = []
        for line, r in rows:
            p = base / r["path"]
            try:
                data = p.read_bytes()
            except OSError as exc:
                _fail(path, line, f"cannot read carved file: {exc}")
            if not data:
                _fail(path, line, f"carved file {p} is empty")
            carved.append(CarvedFile(p.name, data, (r.get("format") or "").strip() or None))
        return carved

    if suite is Suite.WINDOWS_REGISTRY:
        dumps = []
        for line, r in rows:
            p = base / r["path"]
            if not p.is_file():
                _fail(path, line, f"dump {p} not found")
            dumps.append(p)

        def chained():
            for p in dumps:
                yield from open_rows(p)

        return chained()

    case = sqlite_case(group.test_case)
    db = group.database_name
    if case == "SFT-01":
        params = {}
        for line, r in rows:
            name = r.get("parameter", "").strip()
            if name not in SFT01_PARAMETERS:
                _fail(path, line, f"unknown SFT-01 parameter {name!r}")
            params[name] = r.get("value", "")
        return SqliteConfigReport(database_name=db, **params)
    if case == "SFT-02":
        tables = []
        for line, r in rows:
            try:
                tables.append(
                    TableReport(r["table"], tuple(c for c in r.get("columns", "").split("|") if c), int(r["row_count"]))
                )
            except (KeyError, ValueError) as exc:
                _fail(path, line, f"bad table row: {exc}")
        return SqliteSchemaReport(tables=tables, database_name=db)
    if case == "SFT-03":
        deleted, updated = set(), set()
        for line, r in rows:
            kind = r.get("row_kind", "").strip().lower()
            try:
                rid = int(r["row_id"])
            except (KeyError, ValueError):
                _fail(path, line, f"bad row_id {r.get('row_id')!r}")
            if kind == "deleted":
                deleted.add(rid)
            elif kind == "updated":
                updated.add(rid)
            else:
                _fail(path, line, f"row_kind must be deleted or updated, got {kind!r}")
        return SqliteRowRecoveryReport(db, frozenset(deleted), frozenset(updated))
    sources = [r.get("source_file", "") for _, r in rows]
    if len(sources) > 1:
        _fail(path, group.first_line, "SFT-04 takes one source_file per database")
    return SqliteSourceReport(source_file=sources[0] if sources else "", database_name=db)


def score_batch_file(
    evaluator: Evaluator, test_case_name: str, input_csv: "str | Path", job_id: Optional[str] = None
) -> tuple[Suite, list[Evaluation]]:
    """Score every group in a batch CSV; raises ``BatchError`` with an exit status."""
    input_csv = Path(input_csv)
    try:
        suite, groups = read_groups(test_case_name, input_csv)
    except ValueError as exc:
        raise BatchError(EXIT_INPUT, f"{input_csv}: {exc}") from exc
    results = []
    for group in groups:
        try:
            payload = _payload(suite, group, input_csv.parent, input_csv)
            if suite is Suite.STRING_SEARCH:
                os, lines = payload
                result = evaluator.string_search(group.test_case, os, lines, group.tool, job_id)
            else:
                result = evaluator.evaluate(group.test_case, payload, group.tool, job_id)
        except BatchError:
            raise
        except (UnknownTestCase, GroundTruthUnavailable) as exc:
            raise BatchError(EXIT_GROUND_TRUTH, f"{input_csv}: line {group.first_line}: {type(exc).__name__}: {exc}") from exc
        except ParseError as exc:
            raise BatchError(EXIT_INPUT, f"{input_csv}: test case {group.test_case}: {exc}") from exc
        except (InvalidReport, ValueError, DFBenchError) as exc:
            raise BatchError(EXIT_INPUT, f"{input_csv}: line {group.first_line}: {type(exc).__name__}: {exc}") from exc
        results.append(result)
    return suite, results


def _metric_row(test_case, tool, counts: MatchCounts, m: Metrics) -> list:
    return [
        test_case, tool, counts.tp, counts.fp, counts.fn,
        format_score(m.precision), format_score(m.recall), format_score(m.f1),
    ]


def render_report(suite: Suite, rows: list[tuple[str, str, MatchCounts, Metrics]]) -> bytes:
    score = aggregate_suite(suite, [(tc, m) for tc, _, _, m in rows]).score
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow(_metric_row(*row))
    writer.writerow([f"AutoDFBench-{suite.short_name}", "", "", "", "", "", "", format_score(score)])
    return buf.getvalue().encode("utf-8")


def _write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def _diagnose(message: str) -> None:
    print(message, file=sys.stderr)
    log.error(message)


def _batch_report(evaluator, test_case_name, input_csv_path, output_report_path, job_id):
    suite, results = score_batch_file(evaluator, test_case_name, input_csv_path, job_id)
    data = render_report(suite, [(r.test_case, r.tool, r.counts, r.metrics) for r in results])
    _write(Path(output_report_path), data)
    return results


def run_batch(
    evaluator: Evaluator, test_case_name: str, input_csv_path, output_report_path, job_id: Optional[str] = None
) -> int:
    """Score one batch CSV and write its report; returns an exit status."""
    try:
        _batch_report(evaluator, test_case_name, input_csv_path, output_report_path, job_id)
    except BatchError as exc:
        _diagnose(str(exc))
        return exc.status
    except Exception as exc:  # noqa: BLE001
        _diagnose(f"internal error: {type(exc).__name__}: {exc}")
        return EXIT_INTERNAL
    return EXIT_OK


def case_report_dir(output_report_path) -> Path:
    p = Path(output_report_path)
    return p.with_name(p.stem + "_cases")


def run_suite(evaluator: Evaluator, suite, input_dir, output_report_path, job_id: Optional[str] = None) -> int:
    """Score every ``<test case>.csv`` in ``input_dir``.

    Per-file reports go to ``<output stem>_cases/``. The suite report rolls
    sub-test cases into their main case (counts summed, scores averaged) and
    is written only when every file succeeds.
    """
    suite = Suite.parse(suite)
    files = sorted(Path(input_dir).glob("*.csv"))
    if not files:
        _diagnose(f"{EmptySuite.__name__}: no batch files in {input_dir}")
        return EXIT_INPUT
    case_dir = case_report_dir(output_report_path)
    status = EXIT_OK
    evaluations: list[Evaluation] = []
    for path in files:
        try:
            if suite_for_test_case(path.stem) is not suite:
                raise ValueError("file name is not a test case of this suite")
        except ValueError as exc:
            _diagnose(f"{path}: {exc}")
            status = max(status, EXIT_INPUT)
            continue
        try:
            evaluations.extend(_batch_report(evaluator, path.stem, path, case_dir / path.name, job_id))
        except BatchError as exc:
            _diagnose(str(exc))
            status = max(status, exc.status)
        except Exception as exc:  # noqa: BLE001
            _diagnose(f"{path}: internal error: {type(exc).__name__}: {exc}")
            status = EXIT_INTERNAL
    if status != EXIT_OK:
        return status

    grouped: "OrderedDict[tuple[str, str], list[Evaluation]]" = OrderedDict()
    for e in evaluations:
        grouped.setdefault((main_test_case(e.test_case), e.tool), []).append(e)
    rows = []
    for (case, tool), items in grouped.items():
        counts = sum((e.counts for e in items), MatchCounts())
        (_, averaged), = average_sub_cases((case, e.metrics) for e in items)
        rows.append((case, tool, counts, averaged))
    _write(Path(output_report_path), render_report(suite, rows))
    return EXIT_OK


def write_batch_csv(path: "str | Path", suite: "Suite | str", items) -> Path:
    """Write ``(test_case, tool, payload)`` items as a batch CSV.

    Payloads use the same shapes :meth:`Evaluator.evaluate` accepts. Carved
    files and registry rows are written next to the CSV and referenced by path.
    """
    suite = Suite.parse(suite)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    side = path.with_name(path.stem + "_files")
    columns = ["test_case", "tool", *SUITE_COLUMNS[suite]]
    out = []

    def emit(test_case, tool, **values):
        out.append([test_case, tool, *[values.get(c, "") for c in columns[2:]]])

    for n, (test_case, tool, payload) in enumerate(items):
        start = len(out)
        if suite is Suite.STRING_SEARCH:
            os, lines = payload
            for line in lines:
                emit(test_case, tool, os=os, line=line)
            if not lines:
                emit(test_case, tool, os=os)
        elif suite is Suite.DELETED_FILE_RECOVERY:
            for f in payload:
                emit(
                    test_case, tool,
                    file_name=f.file_name or "",
                    size="" if f.size is None else f.size,
                    accessed=_text(f.accessed), modified=_text(f.modified), created=_text(f.created),
                    blocks="" if f.blocks is None else _blocks_text(f.blocks),
                )
        elif suite is Suite.FILE_CARVING:
            folder = side / f"{n:04d}"
            folder.mkdir(parents=True, exist_ok=True)
            for c in payload:
                (folder / c.name).write_bytes(c.data)
                emit(test_case, tool, path=(folder / c.name).relative_to(path.parent).as_posix(),
                     format=c.claimed_format or "")
        elif suite is Suite.WINDOWS_REGISTRY:
            side.mkdir(parents=True, exist_ok=True)
            dump = side / f"{n:04d}.csv"
            dump.write_bytes(dump_bytes(payload))
            emit(test_case, tool, path=dump.relative_to(path.parent).as_posix())
        else:
            db = payload.database_name or ""
            if isinstance(payload, SqliteConfigReport):
                for name in SFT01_PARAMETERS:
                    value = getattr(payload, name)
                    if value is not None:
                        emit(test_case, tool, database_name=db, parameter=name, value=value)
            elif isinstance(payload, SqliteSchemaReport):
                for t in payload.tables:
                    emit(test_case, tool, database_name=db, table=t.name,
                         columns="|".join(t.columns), row_count=t.row_count)
            elif isinstance(payload, SqliteRowRecoveryReport):
                for rid in sorted(payload.deleted_row_ids):
                    emit(test_case, tool, database_name=db, row_id=rid, row_kind="deleted")
                for rid in sorted(payload.updated_row_ids):
                    emit(test_case, tool, database_name=db, row_id=rid, row_kind="updated")
            else:
                emit(test_case, tool, database_name=db, source_file=payload.source_file)
        if len(out) == start:
            extra = {"database_name": payload.database_name or ""} if suite is Suite.SQLITE else {}
            emit(test_case, tool, **extra)

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(out)
    return path


def _text(value) -> str:
    if value is None:
        return ""
    if hasattr(value, "isoformat"):
        return value.isoformat()
    return str(value)


def _blocks_text(blocks) -> str:
    return format_block_ranges(blocks_to_ranges(blocks))
