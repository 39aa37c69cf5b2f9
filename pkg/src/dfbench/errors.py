"""Exception hierarchy shared by the scorers, store, API and batch layers."""


class DFBenchError(Exception):
    """Base class for every error raised by this package."""


class EmptySuite(DFBenchError):
    """No test cases were evaluated, so a suite score cannot be formed."""


class IncompleteBench(DFBenchError):
    """The overall score needs exactly one score for each of the five suites."""


class SchemaViolation(DFBenchError):
    """A ground-truth record is missing fields its suite requires."""


class ConsistencyViolation(DFBenchError):
    """A result row claims an F1 that its own counts do not produce."""


class DuplicateGroundTruth(DFBenchError):
    def __init__(self, message, duplicates=()):
        super().__init__(message)
        self.duplicates = list(duplicates)


class UnknownTestCase(DFBenchError):
    """No scoreable ground truth exists for the requested test case."""


class GroundTruthUnavailable(DFBenchError):
    """A ground-truth artefact referenced by the store cannot be read."""


class OutOfPartition(DFBenchError):
    """A sector address lies before the partition start."""


class NotDecodable(DFBenchError):
    """Image bytes could not be decoded to pixels."""


class NotSqlite(DFBenchError):
    """Input does not start with the SQLite database magic string."""


class Truncated(DFBenchError):
    """Input is shorter than the structure being parsed."""


class ParseError(DFBenchError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidReport(DFBenchError):
    """A tool report does not have the shape its test case requires."""
