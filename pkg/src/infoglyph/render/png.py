"""A minimal deterministic PNG writer.

Output is always 8-bit RGBA, non-interlaced, every scanline using the Up
filter (type 2), compressed with zlib level 6 in a single IDAT chunk. The
same pixel buffer therefore always produces the same bytes.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from ..model import RasterImage

SIGNATURE = b"\x89PNG\r\n\x1a\n"
FILTER_UP = 2
LEVEL = 6


def _chunk(kind: bytes, data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + kind + data + struct.pack(">I", zlib.crc32(kind + data) & 0xFFFFFFFF)


def encode_png(image: RasterImage) -> bytes:
    rows = np.frombuffer(image.pixels, dtype=np.uint8).reshape(image.height, image.width * 4)
    up = rows.copy()
    up[1:] -= rows[:-1]  # uint8 arithmetic wraps mod 256, as the filter requires
    raw = np.hstack([np.full((image.height, 1), FILTER_UP, dtype=np.uint8), up]).tobytes()
    header = struct.pack(">IIBBBBB", image.width, image.height, 8, 6, 0, 0, 0)
    return SIGNATURE + _chunk(b"IHDR", header) + _chunk(b"IDAT", zlib.compress(raw, LEVEL)) + _chunk(b"IEND", b"")
