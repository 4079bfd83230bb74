"""Inverse side of the pipeline: per-pixel polynomial reconstruction,
analytic curve inversion, and global least-squares curve estimation.

The degradation inverse is modeled as the identity on dequantized pixel
values plus a saturation mask that lets downstream consumers exclude
clipped pixels; recovering detail inside saturated regions is out of scope
here. The reconstruction map is a polynomial with one coefficient set per
pixel, shared across the three color channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .errors import DegenerateFitError, DomainError, ValidationError
from .image import DisplayImage, RadianceImage, SaturationMask, require_mask_match
from .pipeline import Gamma, MuLaw, ToneCurve, eval_curve_values

DEFAULT_DEGREE = 7
CONDITION_LIMIT = 1e12
MONOTONIC_TOL = 1e-9


@dataclass(frozen=True)
class CoefficientMaps:
    """Per-pixel polynomial coefficients: (degree+1) planes, each (h, w),
    float64, shared across color channels."""

    maps: np.ndarray

    def __post_init__(self):
        maps = np.ascontiguousarray(np.asarray(self.maps), dtype=np.float64)
        if maps.ndim != 3 or maps.shape[0] < 2:
            raise ValidationError(
                f"expected (degree+1, h, w) planes with degree >= 1, got shape {maps.shape}"
            )
        if maps.shape[1] < 1 or maps.shape[2] < 1:
            raise ValidationError(f"plane dimensions must be positive, got {maps.shape}")
        if not np.isfinite(maps).all():
            raise ValidationError("coefficient maps contain non-finite values")
        maps.setflags(write=False)
        object.__setattr__(self, "maps", maps)

    @property
    def degree(self) -> int:
        return self.maps.shape[0] - 1

    @property
    def width(self) -> int:
        return self.maps.shape[2]

    @property
    def height(self) -> int:
        return self.maps.shape[1]


@dataclass(frozen=True)
class FitReport:
    """Diagnostics of one global least-squares curve fit."""

    coeffs: np.ndarray
    rms_residual: float
    sample_count: int
    condition_estimate: float

    def to_dict(self) -> dict:
        return {
            "coeffs": [float(c) for c in self.coeffs],
            "rms_residual": self.rms_residual,
            "sample_count": self.sample_count,
            "condition_estimate": self.condition_estimate,
        }


class MonotonicityResult(NamedTuple):
    is_monotonic: bool
    first_violation_x: float | None


def invert_degradation(L: DisplayImage, mask: SaturationMask):
    """Identity model of the degradation inverse.

    Returns (float64 (h, w, 3) values, mask). Quantized inputs are already
    stored dequantized, so the values pass through unchanged; the mask is
    carried along so saturated pixels can be excluded downstream.
    """
    if not isinstance(L, DisplayImage):
        raise ValidationError("invert_degradation expects a DisplayImage")
    require_mask_match(mask, L)
    return L.data.astype(np.float64), mask


def constant_maps(coeffs, width: int, height: int) -> CoefficientMaps:
    """Lift one global coefficient vector into per-pixel planes."""
    coeffs = np.asarray(coeffs, dtype=np.float64).reshape(-1)
    if coeffs.size < 2:
        raise ValidationError(f"need at least 2 coefficients, got {coeffs.size}")
    if not np.isfinite(coeffs).all():
        raise ValidationError("coefficients must be finite")
    if width < 1 or height < 1:
        raise ValidationError(f"dimensions must be positive, got {width}x{height}")
    planes = np.empty((coeffs.size, height, width), dtype=np.float64)
    for n, c in enumerate(coeffs):
        planes[n].fill(c)
    return CoefficientMaps(planes)


def apply_coefficient_maps(M: CoefficientMaps, x: np.ndarray):
    """Evaluate H[p, c] = sum_n M_n[p] * x[p, c]**n by Horner's scheme.

    Negative results are clamped to zero (radiance must be nonnegative);
    the clamp count is reported rather than hidden so bad fits stay
    visible. Returns (RadianceImage, clamped_sample_count).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != 3:
        raise ValidationError(f"expected (h, w, 3) values, got shape {x.shape}")
    if x.shape[0] != M.height or x.shape[1] != M.width:
        raise ValidationError(
            f"maps are {M.width}x{M.height} but values are {x.shape[1]}x{x.shape[0]}"
        )
    npix = M.height * M.width
    planes = M.maps.reshape(M.maps.shape[0], npix)
    samples = np.ascontiguousarray(x.reshape(npix, 3))
    out, clamped = kernels.horner_maps(planes, samples)
    return RadianceImage(out.reshape(x.shape).astype(np.float32)), int(clamped)


def fit_polynomial_global(x, y, degree: int, exclude=None) -> FitReport:
    """Least-squares polynomial fit of y against x over [0, 1].

    Solves the Vandermonde system by SVD (an orthogonal decomposition;
    normal equations are unstable past degree ~5). Samples where exclude
    is True are dropped. Raises DegenerateFitError, carrying the report,
    when the design matrix condition estimate exceeds CONDITION_LIMIT.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise ValidationError(f"x has {x.size} samples but y has {y.size}")
    if not isinstance(degree, int) or degree < 1:
        raise ValidationError(f"degree must be an integer >= 1, got {degree}")
    if exclude is not None:
        exclude = np.asarray(exclude, dtype=bool).reshape(-1)
        if exclude.size != x.size:
            raise ValidationError("exclude mask length does not match sample count")
        keep = ~exclude
        x, y = x[keep], y[keep]
    if not np.isfinite(x).all() or not np.isfinite(y).all():
        raise ValidationError("fit samples must be finite")
    if x.size and ((x < 0).any() or (x > 1).any()):
        raise DomainError("fit abscissae must lie in [0, 1]")
    if x.size < degree + 1:
        raise ValidationError(
            f"need at least {degree + 1} non-excluded samples, got {x.size}"
        )

    design = np.vander(x, degree + 1, increasing=True)
    coeffs, _, rank, sv = np.linalg.lstsq(design, y, rcond=None)
    condition = math.inf if sv[-1] == 0 else float(sv[0] / sv[-1])
    residual = design @ coeffs - y
    rms = float(np.sqrt(np.mean(residual * residual)))
    report = FitReport(
        coeffs=coeffs,
        rms_residual=rms,
        sample_count=int(x.size),
        condition_estimate=condition,
    )
    if rank < degree + 1 or condition > CONDITION_LIMIT:
        raise DegenerateFitError(
            f"rank-deficient design matrix (condition estimate {condition:.3g})", report
        )
    return report


def derive_global_curve(
    L: DisplayImage,
    H_hat: RadianceImage,
    degree: int = DEFAULT_DEGREE,
    mask: SaturationMask | None = None,
) -> FitReport:
    """Fit the global LDR->HDR curve from an image pair.

    Flattens all unmasked (L, H_hat) sample pairs across pixels and
    channels and fits a degree-N polynomial to them.
    """
    if not isinstance(L, DisplayImage) or not isinstance(H_hat, RadianceImage):
        raise ValidationError("derive_global_curve expects (DisplayImage, RadianceImage)")
    if L.width != H_hat.width or L.height != H_hat.height:
        raise ValidationError(
            f"LDR is {L.width}x{L.height} but HDR is {H_hat.width}x{H_hat.height}"
        )
    exclude = None
    if mask is not None:
        require_mask_match(mask, L)
        exclude = np.repeat(mask.flags.reshape(-1), 3)
    x = L.data.astype(np.float64).reshape(-1)
    y = H_hat.data.astype(np.float64).reshape(-1)
    return fit_polynomial_global(x, y, degree, exclude=exclude)


def invert_curve_analytic(curve: ToneCurve, v: float) -> float:
    """Closed-form inverse of a MuLaw or Gamma curve at a scalar v.

    MuLaw: ((1 + mu)**v - 1) / mu, computed via expm1/log1p; Gamma:
    (v / b)**(1 / gamma), requiring v/b in [0, 1].
    """
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise DomainError(f"curve value must lie in [0, 1], got {v}")
    if isinstance(curve, MuLaw):
        if v == 0.0:
            return 0.0
        if v == 1.0:
            return 1.0
        return math.expm1(v * math.log1p(curve.mu)) / curve.mu
    if isinstance(curve, Gamma):
        u = v / curve.b
        if not 0.0 <= u <= 1.0:
            raise DomainError(f"v/b must lie in [0, 1], got {u}")
        if curve.gamma == 1.0:
            return u
        return math.pow(u, 1.0 / curve.gamma)
    raise ValidationError(
        f"no closed-form inverse for {type(curve).__name__}; only MuLaw and Gamma"
    )


def check_monotonic(coeffs, samples: int) -> MonotonicityResult:
    """Grid-scan a polynomial for monotonicity on [0, 1].

    Accepts a drop of -MONOTONIC_TOL between adjacent grid points (the
    curves only need to be semi-monotonic). Returns the x at the start of
    the first violating interval, if any.
    """
    if not isinstance(samples, int) or samples < 2:
        raise ValidationError(f"samples must be an integer >= 2, got {samples}")
    coeffs = np.asarray(coeffs, dtype=np.float64).reshape(-1)
    if coeffs.size < 2 or not np.isfinite(coeffs).all():
        raise ValidationError("need at least 2 finite coefficients")
    xs = np.linspace(0.0, 1.0, samples)
    ys = kernels.polynomial_eval(coeffs, xs)
    drops = np.diff(ys) < -MONOTONIC_TOL
    if drops.any():
        first = int(np.argmax(drops))
        return MonotonicityResult(False, float(xs[first]))
    return MonotonicityResult(True, None)


def sample_curve(curve_or_coeffs, n: int) -> np.ndarray:
    """Evaluate a curve at n uniformly spaced x in [0, 1].

    Accepts a ToneCurve or a coefficient sequence; returns an (n, 2) array
    of (x, y) pairs, ready for CSV export.
    """
    if not isinstance(n, int) or n < 2:
        raise ValidationError(f"n must be an integer >= 2, got {n}")
    xs = np.linspace(0.0, 1.0, n)
    if isinstance(curve_or_coeffs, ToneCurve):
        ys = eval_curve_values(curve_or_coeffs, xs)
    else:
        coeffs = np.asarray(curve_or_coeffs, dtype=np.float64).reshape(-1)
        if coeffs.size < 2 or not np.isfinite(coeffs).all():
            raise ValidationError("need a ToneCurve or at least 2 finite coefficients")
        ys = kernels.polynomial_eval(coeffs, xs)
    return np.column_stack([xs, ys])
