"""File carving scoring.

Ground-truth images are paired with carved files by perceptual-hash
distance; a pair counts when the carved file decodes and holds at least 20%
of the ground-truth bytes (sector-aligned chunk containment).
"""

from __future__ import annotations

import io
import struct
import zlib
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

from PIL import Image

from ..errors import GroundTruthUnavailable, NotDecodable
from ..metrics import MatchCounts, Metrics, compute_metrics
from ..records import GroundTruthRecord
from .phash import hamming, phash

CHUNK_SIZE = 512
DEFAULT_THRESHOLD = 0.20
FORMATS = ("bmp", "gif", "png", "heic", "tiff")
# distance assigned when either side has no pixel hash; ranks after any real one
NO_HASH_DISTANCE = 65

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_HEIF_BRANDS = {b"heic", b"heix", b"hevc", b"hevx", b"heim", b"heis", b"mif1", b"msf1"}


@dataclass(frozen=True)
class CarvedFile:
    name: str
    data: bytes
    claimed_format: Optional[str] = None


@dataclass(frozen=True)
class GroundTruthImage:
    name: str
    data: bytes
    format: Optional[str] = None


@dataclass(frozen=True)
class CarvingVerdict:
    gt_file: Optional[str]
    carved_file: Optional[str]
    distance: Optional[int]
    similarity: float
    decodable: bool
    outcome: str


def detect_format(data: bytes) -> Optional[str]:
    if data.startswith(b"BM"):
        return "bmp"
    if data.startswith((b"GIF87a", b"GIF89a")):
        return "gif"
    if data.startswith(_PNG_MAGIC):
        return "png"
    if data.startswith((b"II*\x00", b"MM\x00*")):
        return "tiff"
    if len(data) >= 12 and data[4:8] == b"ftyp" and data[8:12] in _HEIF_BRANDS:
        return "heic"
    return None


def _normalize_format(fmt: Optional[str]) -> Optional[str]:
    if fmt is None:
        return None
    fmt = fmt.strip().lower().lstrip(".")
    return {"tif": "tiff", "heif": "heic"}.get(fmt, fmt)


def _png_structure_ok(data: bytes) -> bool:
    pos = len(_PNG_MAGIC)
    while pos + 12 <= len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        ctype = data[pos + 4:pos + 8]
        end = pos + 12 + length
        if end > len(data):
            return False
        (crc,) = struct.unpack(">I", data[end - 4:end])
        if zlib.crc32(data[pos + 4:end - 4]) != crc:
            return False
        if ctype == b"IEND":
            return True
        pos = end
    return False


def _heic_structure_ok(data: bytes) -> bool:
    pos, boxes = 0, []
    while pos < len(data):
        if pos + 8 > len(data):
            return False
        size, btype = struct.unpack(">I4s", data[pos:pos + 8])
        header = 8
        if size == 1:
            if pos + 16 > len(data):
                return False
            (size,) = struct.unpack(">Q", data[pos + 8:pos + 16])
            header = 16
        elif size == 0:
            size = len(data) - pos
        if size < header or pos + size > len(data):
            return False
        boxes.append(btype)
        pos += size
    return bool(boxes) and boxes[0] == b"ftyp" and b"meta" in boxes


def _heif_decoder():
    try:
        import pillow_heif  # optional codec
    except ImportError:
        return False
    pillow_heif.register_heif_opener()
    return True


def _pillow_decodes(data: bytes) -> bool:
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
    except Exception:
        return False
    return True


@lru_cache(maxsize=4096)
def is_decodable(data: bytes, format: Optional[str] = None) -> bool:
    detected = detect_format(data)
    fmt = _normalize_format(format) or detected
    if fmt not in FORMATS or detected != fmt:
        return False
    if fmt == "png" and not _png_structure_ok(data):
        return False
    if fmt == "heic":
        if _heif_decoder():
            return _pillow_decodes(data)
        return _heic_structure_ok(data)
    return _pillow_decodes(data)


def _chunks(data: bytes) -> list[bytes]:
    return [data[i:i + CHUNK_SIZE] for i in range(0, len(data), CHUNK_SIZE)]


@lru_cache(maxsize=1024)
def _aligned_chunks(data: bytes) -> frozenset:
    return frozenset(_chunks(data))


def byte_similarity(carved: bytes, gt: bytes) -> float:
    """Fraction of the ground truth's 512-byte chunks found in the carved file.

    A chunk matches when its exact content sits at a 512-aligned offset of
    the carved file. The final partial chunk matches on prefix.
    """
    if not carved or not gt:
        raise ValueError("byte_similarity needs non-empty inputs")
    carved_chunks = _aligned_chunks(bytes(carved))
    gt_chunks = _chunks(gt)
    matched = 0
    for chunk in gt_chunks:
        if len(chunk) == CHUNK_SIZE:
            matched += chunk in carved_chunks
        else:
            matched += any(c[:len(chunk)] == chunk for c in carved_chunks if len(c) >= len(chunk))
    return matched / len(gt_chunks)


def _try_phash(data: bytes) -> Optional[int]:
    try:
        return phash(data)
    except NotDecodable:
        return None


def load_ground_truth_images(
    records: Sequence[GroundTruthRecord], base_dir: "str | Path | None" = None
) -> list[GroundTruthImage]:
    images = []
    for record in records:
        path = Path(record.payload)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise GroundTruthUnavailable(f"{record.test_case}: cannot read {path}: {exc}") from exc
        if not data:
            raise GroundTruthUnavailable(f"{record.test_case}: {path} is empty")
        fmt = record.test_case.rsplit("-", 1)[-1] if record.test_case.lower().startswith("carve-") else None
        images.append(GroundTruthImage(path.name, data, _normalize_format(fmt)))
    return images


def score_carving(
    ground_truth: Sequence[GroundTruthImage],
    carved: Sequence[CarvedFile],
    threshold: float = DEFAULT_THRESHOLD,
) -> tuple[MatchCounts, Metrics, list[CarvingVerdict]]:
    """Pair GT images with carved files, closest pHash first.

    Candidate pairs are taken greedily in ascending order of (distance,
    -similarity, carved name, GT position); each side is claimed at most once.
    """
    gt_hashes = [_try_phash(g.data) for g in ground_truth]
    carved = sorted(carved, key=lambda c: c.name)
    carved_hashes = [_try_phash(c.data) for c in carved]

    candidates = []
    for gi, g in enumerate(ground_truth):
        for ci, c in enumerate(carved):
            if gt_hashes[gi] is None or carved_hashes[ci] is None:
                dist = NO_HASH_DISTANCE
            else:
                dist = hamming(gt_hashes[gi], carved_hashes[ci])
            candidates.append((dist, -byte_similarity(c.data, g.data), c.name, gi, ci))
    candidates.sort()

    pairs: dict[int, tuple[int, int, float]] = {}
    used: set[int] = set()
    for dist, neg_sim, _, gi, ci in candidates:
        if gi in pairs or ci in used:
            continue
        pairs[gi] = (ci, dist, -neg_sim)
        used.add(ci)

    verdicts = []
    matched_carved = set()
    for gi, g in enumerate(ground_truth):
        if gi not in pairs:
            verdicts.append(CarvingVerdict(g.name, None, None, 0.0, False, "fn"))
            continue
        ci, dist, sim = pairs[gi]
        c = carved[ci]
        decodable = is_decodable(c.data, c.claimed_format or g.format)
        ok = sim >= threshold and decodable
        if ok:
            matched_carved.add(ci)
        verdicts.append(CarvingVerdict(g.name, c.name, dist, sim, decodable, "tp" if ok else "fn"))
    for ci, c in enumerate(carved):
        if ci not in matched_carved:
            verdicts.append(
                CarvingVerdict(None, c.name, None, 0.0, is_decodable(c.data, c.claimed_format), "fp")
            )

    tp = len(matched_carved)
    counts = MatchCounts(tp=tp, fp=len(carved) - tp, fn=len(ground_truth) - tp)
    return counts, compute_metrics(counts), verdicts
