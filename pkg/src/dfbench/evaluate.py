"""Binds the store to the pure scorers.

The HTTP service and the batch pipeline both go through :class:`Evaluator`,
so a payload scores identically whichever way it arrives.
"""

from __future__ import annotations

import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .errors import InvalidReport, UnknownTestCase
from .metrics import MatchCounts, Metrics, Suite, suite_for_test_case
from .records import TestResultRecord, dfr_variant, sqlite_case
from .scorers import carving, dfr, fss, registry, sqlite
from .store import Store


@dataclass
class Evaluation:
    test_case: str
    tool: str
    job_id: str
    counts: MatchCounts
    metrics: Metrics
    verdicts: list = field(default_factory=list)

    def as_dict(self) -> dict:
        body = {
            "test_case": self.test_case,
            "tool": self.tool,
            "job_id": self.job_id,
            "tp": self.counts.tp,
            "fp": self.counts.fp,
            "fn": self.counts.fn,
            "precision": self.metrics.precision,
            "recall": self.metrics.recall,
            "f1": self.metrics.f1,
        }
        if self.verdicts:
            body["verdicts"] = [asdict(v) for v in self.verdicts]
        return body


class Evaluator:
    """Scores tool reports against ground truth held in a :class:`Store`.

    ``base_dir`` anchors relative artefact paths (GT images, registry dumps).
    Every evaluation is appended to the results log unless ``record=False``.
    """

    def __init__(
        self,
        store: Store,
        base_dir: "str | Path | None" = None,
        carving_threshold: float = carving.DEFAULT_THRESHOLD,
        registry_include_mtime: bool = False,
        sft03_strict: bool = False,
        record: bool = True,
    ):
        self.store = store
        self.base_dir = Path(base_dir) if base_dir is not None else None
        self.carving_threshold = carving_threshold
        self.registry_include_mtime = registry_include_mtime
        self.sft03_strict = sft03_strict
        self.record = record

    def _ground_truth(self, test_case: str, suite: Suite):
        try:
            inferred = suite_for_test_case(test_case)
        except ValueError:
            inferred = None
        records = self.store.query_ground_truth(test_case, suite)
        if inferred is not suite or not records:
            raise UnknownTestCase(f"no {suite.value} ground truth for test case {test_case!r}")
        return records

    def _finish(self, test_case, tool, job_id, counts, metrics, verdicts=()) -> Evaluation:
        result = Evaluation(
            test_case=test_case,
            tool=tool or "unspecified",
            job_id=job_id or uuid.uuid4().hex,
            counts=counts,
            metrics=metrics,
            verdicts=list(verdicts),
        )
        if self.record:
            self.store.record_result(
                TestResultRecord(
                    test_case=result.test_case,
                    counts=counts,
                    f1=metrics.f1,
                    tool=result.tool,
                    job_id=result.job_id,
                )
            )
        return result

    def _path(self, text: str) -> Path:
        path = Path(text)
        if self.base_dir is not None and not path.is_absolute():
            path = self.base_dir / path
        return path

    def string_search(self, test_case, os, lines, tool=None, job_id=None) -> Evaluation:
        records = self._ground_truth(test_case, Suite.STRING_SEARCH)
        report = fss.FssReport(test_case, os, list(lines))
        counts, metrics = fss.score_string_search(report, records)
        return self._finish(test_case, tool, job_id, counts, metrics)

    def deleted_file_recovery(
        self, test_case, files: Sequence[dfr.DfrRecoveredFile], tool=None, job_id=None
    ) -> Evaluation:
        variant = dfr_variant(test_case)
        records = self._ground_truth(test_case, Suite.DELETED_FILE_RECOVERY)
        if variant == "blocks":
            if any(f.blocks is None for f in files):
                raise InvalidReport("block test cases need blocks for every recovered file")
            counts, metrics = dfr.score_blocks(records, [f.blocks for f in files], test_case)
        elif variant == "mac":
            counts, metrics = dfr.score_mac_times(records, list(files), test_case)
        elif variant == "size":
            if any(f.size is None for f in files):
                raise InvalidReport("file-size test cases need a size for every file")
            counts, metrics = dfr.score_file_size(records, list(files), test_case)
        else:
            if any(f.file_name is None for f in files):
                raise InvalidReport("file-name test cases need a file_name for every file")
            counts, metrics = dfr.score_file_name(records, [f.file_name for f in files], test_case)
        return self._finish(test_case, tool, job_id, counts, metrics)

    def file_carving(self, test_case, carved: Sequence[carving.CarvedFile], tool=None, job_id=None) -> Evaluation:
        records = self._ground_truth(test_case, Suite.FILE_CARVING)
        images = carving.load_ground_truth_images(records, self.base_dir)
        counts, metrics, verdicts = carving.score_carving(images, carved, self.carving_threshold)
        return self._finish(test_case, tool, job_id, counts, metrics, verdicts)

    def windows_registry(self, test_case, dump, tool=None, job_id=None) -> Evaluation:
        """``dump`` is CSV bytes, a path, or an iterable of ``RegistryRow``."""
        records = self._ground_truth(test_case, Suite.WINDOWS_REGISTRY)
        tool_keys = registry.row_keys(
            registry.open_rows(dump) if isinstance(dump, (bytes, bytearray, str, Path)) else dump,
            self.registry_include_mtime,
        )
        gt_keys: set = set()
        for record in records:
            path = self._path(record.payload)
            if not path.is_file():
                raise UnknownTestCase(f"{test_case}: ground-truth dump {path} is missing")
            gt_keys |= registry.row_keys(registry.open_rows(path), self.registry_include_mtime)
        counts, metrics = registry.score_registry_keys(gt_keys, tool_keys)
        return self._finish(test_case, tool, job_id, counts, metrics)

    def sqlite(self, test_case, report, tool=None, job_id=None) -> Evaluation:
        case = sqlite_case(test_case)
        records = self._ground_truth(test_case, Suite.SQLITE)
        expected_type, scorer = {
            "SFT-01": (sqlite.SqliteConfigReport, sqlite.score_sft01),
            "SFT-02": (sqlite.SqliteSchemaReport, sqlite.score_sft02),
            "SFT-03": (sqlite.SqliteRowRecoveryReport, sqlite.score_sft03),
            "SFT-04": (sqlite.SqliteSourceReport, sqlite.score_sft04),
        }[case]
        if not isinstance(report, expected_type):
            raise InvalidReport(f"{case} expects a {expected_type.__name__}, got {type(report).__name__}")
        expected = sqlite.select_record(records, report.database_name, test_case)
        if case == "SFT-03":
            counts, metrics = scorer(expected, report, strict=self.sft03_strict)
        else:
            counts, metrics = scorer(expected, report)
        return self._finish(test_case, tool, job_id, counts, metrics)

    def evaluate(self, test_case: str, payload, tool=None, job_id=None) -> Evaluation:
        """Dispatch on the suite inferred from ``test_case``."""
        suite = suite_for_test_case(test_case)
        if suite is Suite.STRING_SEARCH:
            os, lines = payload
            return self.string_search(test_case, os, lines, tool, job_id)
        method = {
            Suite.DELETED_FILE_RECOVERY: self.deleted_file_recovery,
            Suite.FILE_CARVING: self.file_carving,
            Suite.WINDOWS_REGISTRY: self.windows_registry,
            Suite.SQLITE: self.sqlite,
        }[suite]
        return method(test_case, payload, tool, job_id)


def evaluator_from_settings(store: Store, settings: Optional[dict] = None, **overrides) -> Evaluator:
    settings = dict(settings or {})
    settings.update(overrides)
    return Evaluator(
        store,
        base_dir=settings.get("base_dir"),
        carving_threshold=float(settings.get("carving_threshold", carving.DEFAULT_THRESHOLD)),
        registry_include_mtime=bool(settings.get("registry_include_mtime", False)),
        sft03_strict=bool(settings.get("sft03_strict", False)),
        record=bool(settings.get("record", True)),
    )
