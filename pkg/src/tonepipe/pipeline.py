"""Forward HDR->LDR model: a parametric tone curve followed by dynamic
range clipping and quantization.

Tone curves are defined on normalized radiance in [0, 1]; out-of-range
input is a hard error rather than a silent clamp so that pipeline ordering
bugs (tone mapping before normalization) surface immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DomainError, ValidationError
from .image import (
    DegradationSpec,
    DisplayImage,
    RadianceImage,
    SaturationMask,
)

# Range of mu produced by the dataset synthesizer; any mu > 0 is accepted
# for direct use.
MU_SYNTH_MIN = 1.0
MU_SYNTH_MAX = 2e6


class ToneCurve:
    """Base class of the parametric tone curve families."""


@dataclass(frozen=True)
class MuLaw(ToneCurve):
    """Logarithmic curve L = log(1 + mu*v) / log(1 + mu).

    The log base cancels in the ratio, so any base gives identical values;
    natural log is used here.
    """

    mu: float

    def __post_init__(self):
        mu = float(self.mu)
        if not math.isfinite(mu) or mu <= 0:
            raise ValidationError(f"mu must be finite and > 0, got {self.mu}")
        object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class Gamma(ToneCurve):
    """Power curve L = b * v**gamma with gamma in (0, 1] and b > 0."""

    gamma: float
    b: float = 1.0

    def __post_init__(self):
        g, b = float(self.gamma), float(self.b)
        if not math.isfinite(g) or not 0 < g <= 1:
            raise ValidationError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not math.isfinite(b) or b <= 0:
            raise ValidationError(f"b must be finite and > 0, got {self.b}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class Polynomial(ToneCurve):
    """Polynomial curve L = sum_n coeffs[n] * v**n."""

    coeffs: tuple

    def __post_init__(self):
        try:
            coeffs = tuple(float(c) for c in self.coeffs)
        except TypeError:
            raise ValidationError("coeffs must be a sequence of reals") from None
        if len(coeffs) < 2:
            raise ValidationError(f"need at least 2 coefficients, got {len(coeffs)}")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValidationError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)


def eval_curve(curve: ToneCurve, v: float) -> float:
    """Evaluate one tone curve at a scalar v in [0, 1]."""
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"curve input must lie in [0, 1], got {v}")
    if isinstance(curve, MuLaw):
        return math.log1p(curve.mu * v) / math.log1p(curve.mu)
    if isinstance(curve, Gamma):
        if curve.gamma == 1.0 and curve.b == 1.0:
            return v
        return curve.b * math.pow(v, curve.gamma)
    if isinstance(curve, Polynomial):
        acc = curve.coeffs[-1]
        for c in curve.coeffs[-2::-1]:
            acc = acc * v + c
        return acc
    raise ValidationError(f"unknown tone curve type {type(curve).__name__}")


def eval_curve_values(curve: ToneCurve, values: np.ndarray) -> np.ndarray:
    """Vectorized eval_curve over a 1-D float64 array already in [0, 1]."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if isinstance(curve, MuLaw):
        return kernels.mu_law_forward(values, curve.mu)
    if isinstance(curve, Gamma):
        return kernels.gamma_forward(values, curve.gamma, curve.b)
    if isinstance(curve, Polynomial):
        return kernels.polynomial_eval(np.asarray(curve.coeffs, dtype=np.float64), values)
    raise ValidationError(f"unknown tone curve type {type(curve).__name__}")


def _require_unit_range(data: np.ndarray) -> None:
    bad = (data < 0) | (data > 1)
    if bad.any():
        y, x, c = np.unravel_index(int(np.argmax(bad)), data.shape)
        raise DomainError(
            f"sample at (y={y}, x={x}, channel={c}) is {float(data[y, x, c])!r}, "
            "outside [0, 1]; normalize the image first"
        )


def tone_map_values(curve: ToneCurve, img: RadianceImage) -> np.ndarray:
    """Apply the curve per sample, returning raw float64 (h, w, 3) values.

    Polynomial curves may leave [0, 1]; clip() turns the raw values into a
    DisplayImage.
    """
    if not isinstance(img, RadianceImage):
        raise ValidationError("tone mapping expects a RadianceImage")
    _require_unit_range(img.data)
    flat = img.data.astype(np.float64).reshape(-1)
    return eval_curve_values(curve, flat).reshape(img.data.shape)


def tone_map(curve: ToneCurve, img: RadianceImage) -> DisplayImage:
    """Tone map an image whose samples lie in [0, 1]; output is unquantized.

    Raises ValidationError if the curve output leaves [0, 1] (possible for
    Polynomial curves; route those through degrade/clip instead).
    """
    return DisplayImage(tone_map_values(curve, img).astype(np.float32), bit_depth=0)


def clip(values, spec: DegradationSpec = DegradationSpec(quant_bits=0)):
    """Clamp to [clip_low, clip_high], rescale affinely onto [0, 1].

    Accepts a raw (h, w, 3) array or a DisplayImage. The mask flags pixels
    where any channel exceeded clip_high; values merely clamped at the low
    end (polynomial undershoot) are not flagged.
    Returns (DisplayImage with bit_depth=0, SaturationMask).
    """
    if isinstance(values, DisplayImage):
        values = values.data
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 3 or values.shape[2] != 3:
        raise ValidationError(f"expected (h, w, 3) values, got shape {values.shape}")
    clamped = np.clip(values, spec.clip_low, spec.clip_high)
    rescaled = (clamped - spec.clip_low) / (spec.clip_high - spec.clip_low)
    flags = (values > spec.clip_high).any(axis=2)
    return DisplayImage(rescaled.astype(np.float32), bit_depth=0), SaturationMask(flags)


def quantize(img: DisplayImage, bits: int) -> DisplayImage:
    """Snap samples to the k/(2**bits - 1) grid, rounding half away from
    zero (the dominant convention in 8-bit image encoders)."""
    if bits not in (8, 16):
        raise ValidationError(f"quantization bits must be 8 or 16, got {bits}")
    if not isinstance(img, DisplayImage):
        raise ValidationError("quantize expects a DisplayImage")
    levels = float(2**bits - 1)
    flat = img.data.astype(np.float64).reshape(-1)
    snapped = kernels.quantize_values(flat, levels)
    return DisplayImage(snapped.reshape(img.data.shape).astype(np.float32), bit_depth=bits)


def degrade(img: RadianceImage, curve: ToneCurve, spec: DegradationSpec):
    """Full forward model: tone curve, then clipping, then quantization.

    Returns (DisplayImage, SaturationMask). The input must already be
    normalized to [0, 1].
    """
    raw = tone_map_values(curve, img)
    display, mask = clip(raw, spec)
    if spec.quant_bits:
        display = quantize(display, spec.quant_bits)
    return display, mask
