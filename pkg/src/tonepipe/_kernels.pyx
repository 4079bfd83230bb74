# cython: boundscheck=False, wraparound=False, cdivision=True
"""Native per-sample hot kernels.

Same contracts as tonepipe._kernels_py (the numpy fallback); see that
module for the shared array conventions. Loops are kept serial so results
never depend on a reduction order, and the build disables FP contraction
so Horner evaluation rounds exactly like the fallback.
"""

from libc.math cimport floor, frexp, ldexp, log1p, pow

import numpy as np

from .errors import CodecError

NATIVE = True

DEF RLE_MIN_RUN = 4
DEF RLE_MAX_RUN = 127
DEF RLE_MAX_LITERAL = 128


def mu_law_forward(const double[::1] values, double mu):
    cdef Py_ssize_t i, n = values.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double denom = log1p(mu)
    for i in range(n):
        out[i] = log1p(mu * values[i]) / denom
    return out_arr


def gamma_forward(const double[::1] values, double gamma, double b):
    cdef Py_ssize_t i, n = values.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    if gamma == 1.0 and b == 1.0:
        for i in range(n):
            out[i] = values[i]
        return out_arr
    for i in range(n):
        out[i] = b * pow(values[i], gamma)
    return out_arr


def polynomial_eval(const double[::1] coeffs, const double[::1] values):
    cdef Py_ssize_t i, k, n = values.shape[0], nc = coeffs.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc, x
    for i in range(n):
        x = values[i]
        acc = coeffs[nc - 1]
        for k in range(nc - 2, -1, -1):
            acc = acc * x + coeffs[k]
        out[i] = acc
    return out_arr


def horner_maps(const double[:, ::1] maps, const double[:, ::1] x):
    cdef Py_ssize_t p, c, k
    cdef Py_ssize_t nk = maps.shape[0], np_ = maps.shape[1], nc = x.shape[1]
    out_arr = np.empty((np_, nc), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double acc, xv
    cdef long clamped = 0
    for p in range(np_):
        for c in range(nc):
            xv = x[p, c]
            acc = maps[nk - 1, p]
            for k in range(nk - 2, -1, -1):
                acc = acc * xv + maps[k, p]
            if acc < 0.0:
                clamped += 1
                acc = 0.0
            out[p, c] = acc
    return out_arr, clamped


def quantize_values(const double[::1] values, double levels):
    cdef Py_ssize_t i, n = values.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double scaled, base
    for i in range(n):
        scaled = values[i] * levels
        base = floor(scaled)
        if scaled - base >= 0.5:
            base += 1.0
        out[i] = base / levels
    return out_arr


def rgbe_encode_pixels(const double[:, ::1] rgb):
    cdef Py_ssize_t p, n = rgb.shape[0]
    out_arr = np.zeros((n, 4), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef double v, scale
    cdef int e
    for p in range(n):
        v = rgb[p, 0]
        if rgb[p, 1] > v:
            v = rgb[p, 1]
        if rgb[p, 2] > v:
            v = rgb[p, 2]
        if v < 1e-32:
            continue
        frexp(v, &e)
        scale = ldexp(1.0, 8 - e)
        out[p, 0] = <unsigned char> floor(rgb[p, 0] * scale)
        out[p, 1] = <unsigned char> floor(rgb[p, 1] * scale)
        out[p, 2] = <unsigned char> floor(rgb[p, 2] * scale)
        out[p, 3] = <unsigned char> (e + 128)
    return out_arr


def rgbe_decode_pixels(const unsigned char[:, ::1] rgbe):
    cdef Py_ssize_t p, n = rgbe.shape[0]
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double f
    cdef int e
    for p in range(n):
        e = rgbe[p, 3]
        if e == 0:
            out[p, 0] = 0.0
            out[p, 1] = 0.0
            out[p, 2] = 0.0
            continue
        f = ldexp(1.0, e - 136)
        out[p, 0] = (rgbe[p, 0] + 0.5) * f
        out[p, 1] = (rgbe[p, 1] + 0.5) * f
        out[p, 2] = (rgbe[p, 2] + 0.5) * f
    return out_arr


def rle_encode_scanline(const unsigned char[:, ::1] comps):
    cdef Py_ssize_t c, pos, run, start, count, width = comps.shape[1]
    out = bytearray()
    for c in range(4):
        pos = 0
        while pos < width:
            run = 1
            while run < RLE_MAX_RUN and pos + run < width and comps[c, pos + run] == comps[c, pos]:
                run += 1
            if run >= RLE_MIN_RUN:
                out.append(128 + run)
                out.append(comps[c, pos])
                pos += run
                continue
            start = pos
            pos += run
            while pos < width and pos - start < RLE_MAX_LITERAL:
                run = 1
                while run < RLE_MAX_RUN and pos + run < width and comps[c, pos + run] == comps[c, pos]:
                    run += 1
                if run >= RLE_MIN_RUN:
                    break
                pos += run
            count = pos - start
            if count > RLE_MAX_LITERAL:
                count = RLE_MAX_LITERAL
            pos = start + count
            out.append(count)
            out.extend(bytes(comps[c, start:pos]))
    return bytes(out)


def rle_decode_components(const unsigned char[::1] data, Py_ssize_t pos, Py_ssize_t width):
    cdef Py_ssize_t c, filled, count, i, n = data.shape[0]
    cdef unsigned char code
    out_arr = np.empty((4, width), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    for c in range(4):
        filled = 0
        while filled < width:
            if pos >= n:
                raise CodecError("truncated RLE scanline")
            code = data[pos]
            pos += 1
            if code > 128:
                count = code - 128
                if filled + count > width:
                    raise CodecError("RLE run overruns scanline")
                if pos >= n:
                    raise CodecError("truncated RLE run")
                for i in range(count):
                    out[c, filled + i] = data[pos]
                pos += 1
            else:
                count = code
                if count == 0:
                    raise CodecError("zero-length RLE literal")
                if filled + count > width:
                    raise CodecError("RLE literal overruns scanline")
                if pos + count > n:
                    raise CodecError("truncated RLE literal")
                for i in range(count):
                    out[c, filled + i] = data[pos + i]
                pos += count
            filled += count
    return out_arr, pos
