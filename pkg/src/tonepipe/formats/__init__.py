"""Bit-exact codecs for HDR/LDR interchange.

PFM is the lossless reference format for ground-truth HDR (exact float32
payloads); Radiance RGBE is supported for ecosystem compatibility but its
shared exponent is inherently lossy. LDR interchange uses 8-bit RGB PNG.
"""

import os
import tempfile

from .curvecsv import format_curve_csv, write_curve_csv
from .pfm import read_pfm, write_pfm
from .png8 import read_png8, write_png8
from .rgbe import read_rgbe, write_rgbe

__all__ = [
    "atomic_write_bytes",
    "format_curve_csv",
    "read_pfm",
    "read_png8",
    "read_rgbe",
    "write_curve_csv",
    "write_pfm",
    "write_png8",
    "write_rgbe",
]


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
