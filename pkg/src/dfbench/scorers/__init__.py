"""Per-suite scoring functions.

Every scorer is a pure function of a tool report and the ground-truth
records for one test case, returning ``(MatchCounts, Metrics)``.
"""

from .carving import byte_similarity, is_decodable, score_carving
from .dfr import (
    blocks_for_file,
    score_blocks,
    score_file_name,
    score_file_size,
    score_mac_times,
    sector_to_block,
)
from .fss import extract_identifier, score_string_search
from .phash import hamming, phash
from .registry import normalize_row, read_dump, score_registry
from .sqlite import (
    read_sqlite_header,
    score_sft01,
    score_sft02,
    score_sft03,
    score_sft04,
)

__all__ = [
    "blocks_for_file",
    "byte_similarity",
    "extract_identifier",
    "hamming",
    "is_decodable",
    "normalize_row",
    "phash",
    "read_dump",
    "read_sqlite_header",
    "score_blocks",
    "score_carving",
    "score_file_name",
    "score_file_size",
    "score_mac_times",
    "score_registry",
    "score_sft01",
    "score_sft02",
    "score_sft03",
    "score_sft04",
    "score_string_search",
    "sector_to_block",
]
