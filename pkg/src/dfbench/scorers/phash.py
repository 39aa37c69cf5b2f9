"""64-bit DCT perceptual hash.

Pipeline: decode, convert to luminance, box-resample to 32x32, 2-D type-II
DCT, keep the 8x8 lowest-frequency block, replace its DC term with the block
median, then set each bit where the coefficient exceeds the median of the 64.
"""

from __future__ import annotations

import io
from functools import lru_cache

import numpy as np
from PIL import Image
from scipy.fft import dctn

from ..errors import NotDecodable

HASH_SIZE = 8
RESAMPLE_SIZE = 32


def luminance_grid(image_bytes: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(image_bytes)) as im:
            im.load()
            gray = im.convert("L").resize((RESAMPLE_SIZE, RESAMPLE_SIZE), Image.Resampling.BOX)
    except Exception as exc:
        raise NotDecodable(str(exc)) from exc
    return np.asarray(gray, dtype=np.float64)


def hash_from_grid(grid: np.ndarray) -> int:
    coeffs = dctn(grid, type=2, norm="ortho")[:HASH_SIZE, :HASH_SIZE].copy()
    coeffs[0, 0] = np.median(coeffs)
    bits = (coeffs > np.median(coeffs)).ravel()
    value = 0
    for bit in bits:
        value = (value << 1) | int(bit)
    return value


@lru_cache(maxsize=4096)
def phash(image_bytes: bytes) -> int:
    """Row-major 64-bit hash; bit 63 is coefficient (0, 0)."""
    return hash_from_grid(luminance_grid(bytes(image_bytes)))


def hamming(a: int, b: int) -> int:
    return bin(a ^ b).count("1")
