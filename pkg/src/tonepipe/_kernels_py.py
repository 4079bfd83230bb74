"""Pure-numpy implementations of the per-sample hot kernels.

This module mirrors the native extension ``tonepipe._kernels``; the active
backend is chosen in ``tonepipe._backend`` at import time. Elementwise
arithmetic is ordered exactly like the native loops, so the rational
kernels (Horner evaluation, quantization, RGBE packing, RLE coding) match
the extension bitwise. The transcendental kernels may differ from libm by
a few ulps because numpy ships its own log/pow loops.

Array contracts (shared with the extension):
  - curve kernels take/return 1-D C-contiguous float64
  - horner_maps takes maps (K, P) and x (P, C), both float64
  - RGBE kernels take float64 (P, 3) / uint8 (P, 4)
"""

from __future__ import annotations

import numpy as np

from .errors import CodecError

NATIVE = False

_RLE_MIN_RUN = 4
_RLE_MAX_RUN = 127
_RLE_MAX_LITERAL = 128


def mu_law_forward(values, mu):
    return np.log1p(mu * values) / np.log1p(mu)


def gamma_forward(values, gamma, b):
    if gamma == 1.0 and b == 1.0:
        return values.copy()
    return b * np.power(values, gamma)


def polynomial_eval(coeffs, values):
    """Horner evaluation of sum_n coeffs[n] * values**n."""
    acc = np.full_like(values, coeffs[-1])
    for k in range(len(coeffs) - 2, -1, -1):
        acc = acc * values + coeffs[k]
    return acc


def horner_maps(maps, x):
    """Per-pixel Horner evaluation of coefficient planes.

    maps has one row per coefficient plane (K, P); x holds the per-channel
    sample values (P, C). Negative results are clamped to zero and counted.
    Returns (out, clamped_count).
    """
    acc = maps[-1][:, None]
    for k in range(maps.shape[0] - 2, -1, -1):
        acc = acc * x + maps[k][:, None]
    neg = acc < 0.0
    count = int(neg.sum())
    if count:
        acc = np.where(neg, 0.0, acc)
    return np.ascontiguousarray(acc), count


def quantize_values(values, levels):
    """Snap to the uniform grid k/levels, rounding half away from zero
    (inputs are nonnegative, so half away from zero is half up)."""
    scaled = values * levels
    base = np.floor(scaled)
    k = base + (scaled - base >= 0.5)
    return k / levels


def rgbe_encode_pixels(rgb):
    """Pack float64 (P, 3) radiance into shared-exponent RGBE (P, 4)."""
    v = rgb.max(axis=1)
    out = np.zeros((rgb.shape[0], 4), dtype=np.uint8)
    live = v >= 1e-32
    if not live.any():
        return out
    _, e = np.frexp(v[live])
    # mantissa scale is 2**(8 - e), exact in binary floating point
    scale = np.ldexp(1.0, 8 - e)
    mant = np.floor(rgb[live] * scale[:, None])
    out[live, :3] = mant.astype(np.uint8)
    out[live, 3] = (e + 128).astype(np.uint8)
    return out


def rgbe_decode_pixels(rgbe):
    """Unpack RGBE (P, 4) into float64 (P, 3); exponent byte 0 means black."""
    e = rgbe[:, 3].astype(np.int32)
    f = np.ldexp(1.0, e - 136)
    rgb = (rgbe[:, :3].astype(np.float64) + 0.5) * f[:, None]
    rgb[e == 0] = 0.0
    return rgb


def rle_encode_scanline(comps):
    """Adaptive run-length encode the four (4, width) component rows."""
    out = bytearray()
    width = comps.shape[1]
    for c in range(4):
        comp = comps[c]
        pos = 0
        while pos < width:
            run = 1
            while run < _RLE_MAX_RUN and pos + run < width and comp[pos + run] == comp[pos]:
                run += 1
            if run >= _RLE_MIN_RUN:
                out.append(128 + run)
                out.append(comp[pos])
                pos += run
                continue
            start = pos
            pos += run
            while pos < width and pos - start < _RLE_MAX_LITERAL:
                run = 1
                while run < _RLE_MAX_RUN and pos + run < width and comp[pos + run] == comp[pos]:
                    run += 1
                if run >= _RLE_MIN_RUN:
                    break
                pos += run
            count = min(pos - start, _RLE_MAX_LITERAL)
            pos = start + count
            out.append(count)
            out.extend(comp[start:pos].tobytes())
    return bytes(out)


def rle_decode_components(data, pos, width):
    """Decode one adaptive-RLE scanline body starting at pos.

    Returns (components uint8 (4, width), new position). Raises CodecError
    on truncation or when a run crosses the scanline boundary.
    """
    if isinstance(data, (bytes, bytearray)):
        data = np.frombuffer(data, dtype=np.uint8)
    n = len(data)
    out = np.empty((4, width), dtype=np.uint8)
    for c in range(4):
        filled = 0
        while filled < width:
            if pos >= n:
                raise CodecError("truncated RLE scanline")
            code = int(data[pos])
            pos += 1
            if code > 128:
                count = code - 128
                if filled + count > width:
                    raise CodecError("RLE run overruns scanline")
                if pos >= n:
                    raise CodecError("truncated RLE run")
                out[c, filled : filled + count] = data[pos]
                pos += 1
            else:
                count = code
                if count == 0:
                    raise CodecError("zero-length RLE literal")
                if filled + count > width:
                    raise CodecError("RLE literal overruns scanline")
                if pos + count > n:
                    raise CodecError("truncated RLE literal")
                out[c, filled : filled + count] = data[pos : pos + count]
                pos += count
            filled += count
    return out, pos
