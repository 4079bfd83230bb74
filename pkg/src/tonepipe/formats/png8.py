"""8-bit RGB PNG interchange via Pillow.

The bit-exact contract covers the decoded pixel payload, not the
compressed byte stream: write(read(x)) preserves every sample bitwise.
"""

from __future__ import annotations

import io
import struct

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import CodecError, UnsupportedFormatError
from ..image import DisplayImage


def read_png8(data: bytes) -> DisplayImage:
    """Decode an 8-bit RGB PNG; samples come out as k/255 on the 8-bit grid."""
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError, struct.error) as exc:
        raise CodecError(f"cannot decode PNG: {exc}") from None
    if img.format != "PNG":
        raise UnsupportedFormatError(f"expected PNG, got {img.format}")
    if img.mode != "RGB":
        raise UnsupportedFormatError(f"unsupported PNG mode {img.mode!r}; need 8-bit RGB")
    arr = np.asarray(img, dtype=np.uint8)
    pixels = (arr.astype(np.float64) / 255.0).astype(np.float32)
    return DisplayImage(pixels, bit_depth=8)


def write_png8(image: DisplayImage) -> bytes:
    if not isinstance(image, DisplayImage) or image.bit_depth != 8:
        raise UnsupportedFormatError("write_png8 requires a DisplayImage with bit_depth=8")
    codes = np.rint(image.data.astype(np.float64) * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(codes, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
