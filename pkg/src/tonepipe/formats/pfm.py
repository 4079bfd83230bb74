"""Portable Float Map codec.

Header is three whitespace-delimited tokens after the magic ("PF" color /
"Pf" grayscale): width, height, and a nonzero scale whose sign encodes
endianness (negative = little-endian). Exactly one whitespace byte
separates the scale token from the raw float32 payload, which is stored
bottom-to-top.
"""

from __future__ import annotations

import numpy as np

from ..errors import CodecError
from ..image import RadianceImage

_WHITESPACE = b" \t\n\r\f\v"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n and data[pos : pos + 1] in _WHITESPACE:
        pos += 1
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE:
        pos += 1
    if start == pos:
        raise CodecError("malformed PFM header: unexpected end of data")
    return data[start:pos], pos


def read_pfm(data: bytes) -> RadianceImage:
    """Decode PFM bytes; grayscale is replicated to three channels."""
    magic, pos = _next_token(data, 0)
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise CodecError(f"not a PFM: bad magic {magic!r}")
    wtok, pos = _next_token(data, pos)
    htok, pos = _next_token(data, pos)
    stok, pos = _next_token(data, pos)
    try:
        width, height = int(wtok), int(htok)
        scale = float(stok)
    except ValueError:
        raise CodecError("malformed PFM header: non-numeric dimension or scale") from None
    if width < 1 or height < 1:
        raise CodecError(f"malformed PFM header: bad dimensions {width}x{height}")
    if scale == 0 or not np.isfinite(scale):
        raise CodecError(f"malformed PFM header: bad scale {scale}")
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise CodecError("malformed PFM header: missing payload separator")
    pos += 1

    expected = width * height * channels * 4
    payload = data[pos:]
    if len(payload) != expected:
        raise CodecError(
            f"PFM payload size mismatch: expected {expected} bytes, got {len(payload)}"
        )
    dtype = "<f4" if scale < 0 else ">f4"
    pixels = np.frombuffer(payload, dtype=dtype).reshape(height, width, channels)
    pixels = np.flipud(pixels).astype(np.float32)  # stored bottom-to-top
    if np.isnan(pixels).any():
        raise CodecError("PFM payload contains NaN samples")
    if not np.isfinite(pixels).all():
        raise CodecError("PFM payload contains infinite samples")
    if abs(scale) != 1.0:
        pixels = pixels * np.float32(abs(scale))
        if not np.isfinite(pixels).all():
            raise CodecError("PFM scale overflows samples")
    if (pixels < 0).any():
        raise CodecError("PFM payload contains negative radiance")
    if channels == 1:
        pixels = np.repeat(pixels, 3, axis=2)
    return RadianceImage(pixels)


def write_pfm(image) -> bytes:
    """Encode as color PFM, scale -1.0 (little-endian), bottom-to-top.

    Accepts any container with float32 (h, w, 3) pixel data; the encoding
    is deterministic, so equal images produce identical bytes.
    """
    data = image.data
    header = f"PF\n{data.shape[1]} {data.shape[0]}\n-1.0\n".encode()
    payload = np.flipud(data).astype("<f4").tobytes()
    return header + payload
