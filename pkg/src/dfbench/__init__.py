"""Scoring engine for forensic tool output against CFTT-derived ground truth."""

from .errors import (
    ConsistencyViolation,
    DFBenchError,
    DuplicateGroundTruth,
    EmptySuite,
    GroundTruthUnavailable,
    IncompleteBench,
    InvalidReport,
    NotDecodable,
    NotSqlite,
    OutOfPartition,
    ParseError,
    SchemaViolation,
    Truncated,
    UnknownTestCase,
)
from .evaluate import Evaluation, Evaluator
from .metrics import (
    BenchScore,
    MatchCounts,
    Metrics,
    Suite,
    SuiteScore,
    aggregate_bench,
    aggregate_suite,
    compute_metrics,
)
from .records import BlockRange, GroundTruthRecord, TestResultRecord
from .store import Store

__version__ = "1.0.0"

__all__ = [
    "BenchScore",
    "BlockRange",
    "ConsistencyViolation",
    "DFBenchError",
    "DuplicateGroundTruth",
    "EmptySuite",
    "Evaluation",
    "Evaluator",
    "GroundTruthRecord",
    "GroundTruthUnavailable",
    "IncompleteBench",
    "InvalidReport",
    "MatchCounts",
    "Metrics",
    "NotDecodable",
    "NotSqlite",
    "OutOfPartition",
    "ParseError",
    "SchemaViolation",
    "Store",
    "Suite",
    "SuiteScore",
    "TestResultRecord",
    "Truncated",
    "UnknownTestCase",
    "aggregate_bench",
    "aggregate_suite",
    "compute_metrics",
]
