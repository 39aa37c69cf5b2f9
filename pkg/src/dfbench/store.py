"""Embedded relational store: config, ground truth and the results log.

``test_results`` is append-only. The store offers no update or delete for it
and SQLite triggers reject any attempt made through raw SQL.
"""

from __future__ import annotations

import sqlite3
import threading
from pathlib import Path
from typing import Iterable, Optional

from .errors import ConsistencyViolation, DuplicateGroundTruth
from .metrics import MatchCounts, Suite, compute_metrics
from .records import (
    GroundTruthRecord,
    TestResultRecord,
    format_block_ranges,
    normalize_record,
    parse_block_ranges,
)

_SCHEMA = """
CREATE TABLE IF NOT EXISTS config (
    suite TEXT NOT NULL DEFAULT 'global',
    key   TEXT NOT NULL,
    value TEXT,
    PRIMARY KEY (suite, key)
);
CREATE TABLE IF NOT EXISTS ground_truth (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    test_case TEXT NOT NULL,
    cftt_task TEXT NOT NULL,
    type TEXT,
    os TEXT,
    file_name TEXT,
    size INTEGER,
    access_time_stamp TEXT,
    modify_time_stamp TEXT,
    change_time_stamp TEXT,
    deleted_time_stamp TEXT,
    dfr_blocks TEXT,
    carve_type TEXT,
    payload TEXT,
    natural_key TEXT NOT NULL,
    UNIQUE (cftt_task, test_case, natural_key)
);
CREATE INDEX IF NOT EXISTS ground_truth_case ON ground_truth (test_case, cftt_task);
CREATE TABLE IF NOT EXISTS test_results (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    test_case TEXT NOT NULL,
    tool TEXT NOT NULL,
    job_id TEXT NOT NULL,
    tp INTEGER NOT NULL,
    fp INTEGER NOT NULL,
    fn INTEGER NOT NULL,
    f1 REAL NOT NULL,
    created_at TEXT NOT NULL
);
CREATE TRIGGER IF NOT EXISTS test_results_no_update BEFORE UPDATE ON test_results
BEGIN SELECT RAISE(ABORT, 'test_results is append-only'); END;
CREATE TRIGGER IF NOT EXISTS test_results_no_delete BEFORE DELETE ON test_results
BEGIN SELECT RAISE(ABORT, 'test_results is append-only'); END;
"""

_GT_COLUMNS = (
    "test_case",
    "cftt_task",
    "type",
    "os",
    "file_name",
    "size",
    "access_time_stamp",
    "modify_time_stamp",
    "change_time_stamp",
    "deleted_time_stamp",
    "dfr_blocks",
    "carve_type",
    "payload",
)

F1_TOLERANCE = 1e-9


class Store:
    """Thread-safe wrapper over one SQLite connection.

    ``path`` may be ``":memory:"`` for a throwaway store.
    """

    def __init__(self, path: "str | Path" = ":memory:"):
        self.path = str(path)
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False, isolation_level=None)
        self._conn.row_factory = sqlite3.Row
        if self.path != ":memory:":
            self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # config

    def set_config(self, key: str, value: str, suite: str = "global") -> None:
        with self._lock:
            self._conn.execute(
                "INSERT INTO config (suite, key, value) VALUES (?, ?, ?) "
                "ON CONFLICT (suite, key) DO UPDATE SET value = excluded.value",
                (suite, key, value),
            )

    def get_config(self, key: str, suite: str = "global", default: Optional[str] = None):
        with self._lock:
            row = self._conn.execute(
                "SELECT value FROM config WHERE suite = ? AND key = ?", (suite, key)
            ).fetchone()
        return default if row is None else row["value"]

    # ground truth

    def insert_ground_truth(self, record: GroundTruthRecord) -> int:
        return self.insert_many([record])[0]

    def insert_many(self, records: Iterable[GroundTruthRecord]) -> list[int]:
        """Insert records atomically; on any duplicate nothing is inserted."""
        records = [normalize_record(r) for r in records]
        keyed = [(r, r.natural_key()) for r in records]
        with self._lock:
            duplicates = []
            seen = set()
            for r, key in keyed:
                ident = (r.cftt_task.value, r.test_case, key)
                exists = self._conn.execute(
                    "SELECT 1 FROM ground_truth WHERE cftt_task = ? AND test_case = ? AND natural_key = ?",
                    ident,
                ).fetchone()
                if exists or ident in seen:
                    duplicates.append((r.test_case, key))
                seen.add(ident)
            if duplicates:
                raise DuplicateGroundTruth(
                    f"{len(duplicates)} duplicate ground-truth record(s), first: {duplicates[0]}",
                    duplicates,
                )
            ids = []
            self._conn.execute("BEGIN")
            try:
                for r, key in keyed:
                    values = [getattr(r, c) for c in _GT_COLUMNS]
                    values[1] = r.cftt_task.value
                    values[10] = format_block_ranges(r.dfr_blocks) if r.dfr_blocks is not None else None
                    cur = self._conn.execute(
                        f"INSERT INTO ground_truth ({', '.join(_GT_COLUMNS)}, natural_key) "
                        f"VALUES ({', '.join('?' * (len(_GT_COLUMNS) + 1))})",
                        (*values, key),
                    )
                    ids.append(cur.lastrowid)
                self._conn.execute("COMMIT")
            except BaseException:
                self._conn.execute("ROLLBACK")
                raise
        return ids

    def query_ground_truth(self, test_case: str, cftt_task: "Suite | str") -> list[GroundTruthRecord]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM ground_truth WHERE test_case = ? AND cftt_task = ? ORDER BY id",
                (test_case, Suite.parse(cftt_task).value),
            ).fetchall()
        return [_row_to_record(r) for r in rows]

    def test_cases(self, cftt_task: "Suite | str") -> list[str]:
        """Distinct test-case ids of one suite in first-insertion order."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT test_case FROM ground_truth WHERE cftt_task = ? GROUP BY test_case ORDER BY MIN(id)",
                (Suite.parse(cftt_task).value,),
            ).fetchall()
        return [r["test_case"] for r in rows]

    def count_ground_truth(self, cftt_task: "Suite | str | None" = None) -> int:
        with self._lock:
            if cftt_task is None:
                return self._conn.execute("SELECT COUNT(*) FROM ground_truth").fetchone()[0]
            return self._conn.execute(
                "SELECT COUNT(*) FROM ground_truth WHERE cftt_task = ?", (Suite.parse(cftt_task).value,)
            ).fetchone()[0]

    # results log

    def record_result(self, result: TestResultRecord) -> int:
        expected = compute_metrics(result.counts).f1
        if abs(expected - result.f1) > F1_TOLERANCE:
            raise ConsistencyViolation(
                f"f1 {result.f1} inconsistent with counts {result.counts} (expected {expected})"
            )
        with self._lock:
            cur = self._conn.execute(
                "INSERT INTO test_results (test_case, tool, job_id, tp, fp, fn, f1, created_at) "
                "VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    result.test_case,
                    result.tool or "unspecified",
                    result.job_id,
                    result.counts.tp,
                    result.counts.fp,
                    result.counts.fn,
                    result.f1,
                    result.created_at,
                ),
            )
        return cur.lastrowid

    def list_results(
        self,
        test_case: Optional[str] = None,
        tool: Optional[str] = None,
        job_id: Optional[str] = None,
    ) -> list[TestResultRecord]:
        clauses, params = [], []
        for column, value in (("test_case", test_case), ("tool", tool), ("job_id", job_id)):
            if value is not None:
                clauses.append(f"{column} = ?")
                params.append(value)
        where = f"WHERE {' AND '.join(clauses)}" if clauses else ""
        with self._lock:
            rows = self._conn.execute(f"SELECT * FROM test_results {where} ORDER BY id", params).fetchall()
        return [
            TestResultRecord(
                test_case=r["test_case"],
                counts=MatchCounts(r["tp"], r["fp"], r["fn"]),
                f1=r["f1"],
                tool=r["tool"],
                job_id=r["job_id"],
                created_at=r["created_at"],
                id=r["id"],
            )
            for r in rows
        ]

    def execute(self, sql: str, params=()):
        """Raw SQL escape hatch, used by tests to probe the triggers."""
        with self._lock:
            return self._conn.execute(sql, params).fetchall()


def _row_to_record(row: sqlite3.Row) -> GroundTruthRecord:
    values = {c: row[c] for c in _GT_COLUMNS}
    values["cftt_task"] = Suite(values["cftt_task"])
    if values["dfr_blocks"] is not None:
        values["dfr_blocks"] = parse_block_ranges(values["dfr_blocks"])
    return GroundTruthRecord(id=row["id"], **values)
