"""Reports derived directly from ground truth.

Feeding these back through the scorers should score F1 = 1 on every
supported test case; they are also the seeds for perturbation tests.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from .errors import UnknownTestCase
from .metrics import Suite, suite_for_test_case
from .records import dfr_variant, sqlite_case
from .scorers.carving import CarvedFile, load_ground_truth_images
from .scorers.dfr import DfrRecoveredFile
from .scorers.registry import open_rows
from .scorers.sqlite import (
    SqliteConfigReport,
    SqliteRowRecoveryReport,
    SqliteSchemaReport,
    SqliteSourceReport,
    table_reports,
)
from .store import Store


def fss_line(identifier: str, text: str) -> str:
    return f"{identifier} {text}"


def reference_payloads(store: Store, test_case: str, base_dir: Optional[Path] = None) -> list:
    """Payloads (in :meth:`Evaluator.evaluate` form) that reproduce the GT.

    Most cases yield one payload. String search yields one per OS and SQLite
    one per database variation.
    """
    suite = suite_for_test_case(test_case)
    records = store.query_ground_truth(test_case, suite)
    if not records:
        raise UnknownTestCase(test_case)

    if suite is Suite.STRING_SEARCH:
        by_os: dict[str, list[str]] = {}
        for r in records:
            by_os.setdefault(r.os or "", []).append(fss_line(r.fss_identifier, r.fss_line))
        return [(os, lines) for os, lines in by_os.items()]

    if suite is Suite.DELETED_FILE_RECOVERY:
        variant = dfr_variant(test_case)
        if variant == "blocks":
            files = [DfrRecoveredFile(file_name=r.file_name, blocks=r.block_set()) for r in records if r.dfr_blocks]
            if not files:
                raise UnknownTestCase(f"{test_case} has no block ground truth")
        elif variant == "mac":
            files = [
                DfrRecoveredFile(
                    file_name=r.file_name,
                    accessed=r.access_time_stamp,
                    modified=r.modify_time_stamp,
                    created=r.change_time_stamp,
                )
                for r in records
            ]
        elif variant == "size":
            files = [DfrRecoveredFile(file_name=r.file_name, size=r.size) for r in records]
        else:
            files = [DfrRecoveredFile(file_name=r.file_name) for r in records]
        return [files]

    if suite is Suite.FILE_CARVING:
        images = load_ground_truth_images(records, base_dir)
        return [[CarvedFile(f"carved_{i:03d}_{g.name}", g.data, g.format) for i, g in enumerate(images)]]

    if suite is Suite.WINDOWS_REGISTRY:
        rows = []
        for r in records:
            path = Path(r.payload)
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            rows.extend(open_rows(path))
        return [rows]

    case = sqlite_case(test_case)
    payloads = []
    for r in records:
        body = r.payload_json()
        db = body.get("database_name")
        if case == "SFT-01":
            payloads.append(
                SqliteConfigReport(
                    page_size=body["page_size"],
                    journal_mode=body["journal_mode"],
                    page_count=body["page_count"],
                    file_hash=body["file_hash"],
                    text_encoding=body["text_encoding"],
                    database_name=db,
                )
            )
        elif case == "SFT-02":
            payloads.append(SqliteSchemaReport(table_reports(body["tables"]), db))
        elif case == "SFT-03":
            payloads.append(
                SqliteRowRecoveryReport(db, frozenset(body["deleted_row_ids"]), frozenset(body["updated_row_ids"]))
            )
        else:
            payloads.append(SqliteSourceReport(body["source_file"], db))
    return payloads
