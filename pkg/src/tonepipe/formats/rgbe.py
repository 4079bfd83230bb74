"""Radiance RGBE (.hdr) codec.

Pixels are stored as an 8-bit mantissa triple sharing one exponent byte,
so a decode(encode(x)) round trip is lossy: about 0.4% relative error on
the dominant channel, growing as a channel falls further below the pixel
maximum. Decoding handles both flat scanlines and adaptive RLE; encoding
emits adaptive RLE whenever the width allows it (8..32767 pixels).
"""

from __future__ import annotations

import re

import numpy as np

from .._backend import kernels
from ..errors import CodecError, UnsupportedFormatError, ValidationError
from ..image import RadianceImage

FORMAT_TOKEN = b"32-bit_rle_rgbe"
_RESOLUTION_RE = re.compile(rb"^-Y (\d+) \+X (\d+)$")
_RLE_MIN_WIDTH = 8
_RLE_MAX_WIDTH = 32767
# shared exponent byte is e+128, so |values| must stay below 2**127
_MAX_ENCODABLE = float(np.ldexp(1.0, 127))


def _parse_header(data: bytes) -> tuple[int, int, int]:
    """Returns (width, height, payload offset)."""
    pos = 0
    n = len(data)
    format_seen = False
    while True:
        end = data.find(b"\n", pos)
        if end < 0:
            raise CodecError("truncated Radiance header")
        line = data[pos:end]
        pos = end + 1
        if line == b"":
            break
        if line.startswith(b"#"):
            continue
        if line.startswith(b"FORMAT="):
            token = line[len(b"FORMAT=") :].strip()
            if token != FORMAT_TOKEN:
                raise UnsupportedFormatError(f"unknown Radiance format token {token!r}")
            format_seen = True
        # other header variables (EXPOSURE, etc.) are ignored
    if not format_seen:
        raise CodecError("Radiance header missing FORMAT line")
    end = data.find(b"\n", pos)
    if end < 0:
        raise CodecError("truncated Radiance header: missing resolution line")
    m = _RESOLUTION_RE.match(data[pos:end])
    if not m:
        raise CodecError(f"bad resolution line {data[pos:end]!r} (only -Y h +X w supported)")
    height, width = int(m.group(1)), int(m.group(2))
    if width < 1 or height < 1:
        raise CodecError(f"bad resolution {width}x{height}")
    return width, height, end + 1


def read_rgbe(data: bytes) -> RadianceImage:
    width, height, pos = _parse_header(data)
    # cheapest possible body: RLE header plus maximal runs per component
    floor_bytes = height * (4 + 8 * ((width + 126) // 127))
    if not _RLE_MIN_WIDTH <= width <= _RLE_MAX_WIDTH:
        floor_bytes = height * width * 4
    if floor_bytes > len(data) - pos:
        raise CodecError(
            f"truncated payload: {width}x{height} needs at least {floor_bytes} bytes, "
            f"got {len(data) - pos}"
        )
    rows = np.empty((height, width, 4), dtype=np.uint8)
    for y in range(height):
        head = data[pos : pos + 4]
        if (
            len(head) == 4
            and head[0] == 2
            and head[1] == 2
            and ((head[2] << 8) | head[3]) == width
            and _RLE_MIN_WIDTH <= width <= _RLE_MAX_WIDTH
        ):
            comps, pos = kernels.rle_decode_components(
                np.frombuffer(data, dtype=np.uint8), pos + 4, width
            )
            rows[y] = comps.T
        else:
            end = pos + width * 4
            if end > len(data):
                raise CodecError(
                    f"truncated flat scanline {y}: expected {width * 4} bytes, "
                    f"got {len(data) - pos}"
                )
            rows[y] = np.frombuffer(data[pos:end], dtype=np.uint8).reshape(width, 4)
            pos = end
    rgb = kernels.rgbe_decode_pixels(np.ascontiguousarray(rows.reshape(-1, 4)))
    return RadianceImage(rgb.reshape(height, width, 3).astype(np.float32))


def write_rgbe(image: RadianceImage) -> bytes:
    data = image.data
    if float(data.max()) >= _MAX_ENCODABLE:
        raise ValidationError("radiance too large for the shared-exponent encoding")
    height, width = data.shape[:2]
    out = bytearray()
    out += b"#?RADIANCE\n"
    out += b"FORMAT=" + FORMAT_TOKEN + b"\n\n"
    out += f"-Y {height} +X {width}\n".encode()
    rle = _RLE_MIN_WIDTH <= width <= _RLE_MAX_WIDTH
    for y in range(height):
        row = np.ascontiguousarray(data[y].astype(np.float64))
        rgbe = kernels.rgbe_encode_pixels(row)
        if rle:
            out += bytes((2, 2, width >> 8, width & 0xFF))
            out += kernels.rle_encode_scanline(np.ascontiguousarray(rgbe.T))
        else:
            out += rgbe.tobytes()
    return bytes(out)
