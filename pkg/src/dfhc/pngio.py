"""Minimal 8-bit PNG writer/reader for codec output.

Writes non-interlaced grayscale (color type 0) or truecolor (color type 2)
PNGs with filter 0 on every scanline, which keeps output bytes deterministic
for a given raster. The reader handles the same subset plus all five
standard scanline filters.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import DataError
from .fold import ImageRaster

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def quantize_u8(img: ImageRaster) -> np.ndarray:
    """Map [0, 1] reals to 8-bit with round-half-up (0.5 -> 128)."""
    return np.floor(img.data * 255.0 + 0.5).astype(np.uint8)


def _chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(payload, zlib.crc32(tag))
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def encode_png(img: ImageRaster) -> bytes:
    """Serialize a raster as PNG bytes (8-bit gray or RGB)."""
    pixels = quantize_u8(img)
    h, w, ch = pixels.shape
    color_type = 0 if ch == 1 else 2
    header = struct.pack(">IIBBBBB", w, h, 8, color_type, 0, 0, 0)
    raw = bytearray()
    for row in pixels:
        raw.append(0)  # filter type 0 (None)
        raw.extend(row.tobytes())
    return (
        _SIGNATURE
        + _chunk(b"IHDR", header)
        + _chunk(b"IDAT", zlib.compress(bytes(raw), 6))
        + _chunk(b"IEND", b"")
    )


def write_png(path, img: ImageRaster) -> None:
    path = Path(path)
    try:
        path.write_bytes(encode_png(img))
    except OSError as exc:
        raise DataError(f"cannot write PNG {path}: {exc}") from exc


def _unfilter(data: bytes, h: int, w: int, bpp: int) -> np.ndarray:
    stride = w * bpp
    out = np.zeros((h, stride), dtype=np.uint8)
    pos = 0
    for y in range(h):
        ftype = data[pos]
        pos += 1
        row = np.frombuffer(data[pos : pos + stride], dtype=np.uint8).astype(np.int32)
        pos += stride
        prev = out[y - 1].astype(np.int32) if y > 0 else np.zeros(stride, dtype=np.int32)
        cur = np.zeros(stride, dtype=np.int32)
        if ftype == 0:
            cur = row
        elif ftype == 2:  # Up
            cur = (row + prev) & 0xFF
        elif ftype in (1, 3, 4):  # Sub / Average / Paeth need a left-to-right scan
            for x in range(stride):
                a = cur[x - bpp] if x >= bpp else 0
                b = prev[x]
                c = prev[x - bpp] if x >= bpp else 0
                if ftype == 1:
                    pred = a
                elif ftype == 3:
                    pred = (a + b) // 2
                else:
                    p = a + b - c
                    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                    pred = a if pa <= pb and pa <= pc else (b if pb <= pc else c)
                cur[x] = (row[x] + pred) & 0xFF
        else:
            raise DataError(f"unsupported PNG filter type {ftype}")
        out[y] = cur.astype(np.uint8)
    return out


def decode_png_u8(blob: bytes, context: str = "<bytes>") -> np.ndarray:
    """Decode 8-bit gray/RGB non-interlaced PNG bytes to a (H, W, C) uint8 array."""
    if blob[:8] != _SIGNATURE:
        raise DataError(f"{context}: not a PNG file")
    pos = 8
    meta = None
    idat = bytearray()
    while pos < len(blob):
        (length,) = struct.unpack(">I", blob[pos : pos + 4])
        tag = blob[pos + 4 : pos + 8]
        payload = blob[pos + 8 : pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            meta = struct.unpack(">IIBBBBB", payload)
        elif tag == b"IDAT":
            idat.extend(payload)
        elif tag == b"IEND":
            break
    if meta is None:
        raise DataError(f"{context}: missing IHDR")
    w, h, depth, color_type, _, _, interlace = meta
    if depth != 8 or interlace != 0 or color_type not in (0, 2):
        raise DataError(
            f"{context}: only 8-bit non-interlaced gray/RGB supported "
            f"(depth={depth}, color_type={color_type}, interlace={interlace})"
        )
    ch = 1 if color_type == 0 else 3
    raw = zlib.decompress(bytes(idat))
    expected = h * (w * ch + 1)
    if len(raw) != expected:
        raise DataError(f"{context}: corrupt pixel data ({len(raw)} != {expected} bytes)")
    return _unfilter(raw, h, w, ch).reshape(h, w, ch)


def read_png(path) -> ImageRaster:
    """Read a PNG written by this module back into a [0, 1] raster."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read PNG {path}: {exc}") from exc
    pixels = decode_png_u8(blob, context=str(path))
    return ImageRaster(pixels.astype(np.float64) / 255.0)
