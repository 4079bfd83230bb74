"""Reconstruction quality metrics.

Quality is judged from two sides: the linear HDR values themselves (PSNR,
SSIM after peak normalization) and the values after a mu-law display
transform (mu-PSNR, mu-SSIM). AvgPSNR blends the two PSNR readings with
fixed weights 0.7 / 0.3. All accumulation happens in float64.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from ._backend import kernels
from .errors import DomainError, ValidationError
from .image import DisplayImage, RadianceImage

PSNR_CAP_DB = 99.0
DEFAULT_MU = 5000.0

AVG_WEIGHT_PSNR = 0.7
AVG_WEIGHT_MU_PSNR = 0.3

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_DYNAMIC_RANGE = 1.0


def _check_same_size(a, b) -> None:
    if a.data.shape != b.data.shape:
        raise ValidationError(f"image sizes differ: {a.data.shape} vs {b.data.shape}")


def psnr(a, b, peak: float) -> float:
    """Peak signal-to-noise ratio in dB: 10*log10(peak^2 / MSE).

    Identical images (MSE 0) report the 99 dB cap so results stay finite
    and aggregatable.
    """
    peak = float(peak)
    if not math.isfinite(peak) or peak <= 0:
        raise ValidationError(f"peak must be finite and > 0, got {peak}")
    _check_same_size(a, b)
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return 10.0 * math.log10(peak * peak / mse)


def mu_tonemap(img: RadianceImage, peak: float, mu: float = DEFAULT_MU) -> DisplayImage:
    """Normalize by peak, clamp to [0, 1], apply the mu-law curve.

    Args:
        img: linear HDR image.
        peak: normalization value (samples above it saturate to 1).
        mu: compression strength of the log curve.

    Returns:
        Unquantized DisplayImage of tone-mapped values in [0, 1].
    """
    peak = float(peak)
    mu = float(mu)
    if not math.isfinite(peak) or peak <= 0:
        raise ValidationError(f"peak must be finite and > 0, got {peak}")
    if not math.isfinite(mu) or mu <= 0:
        raise ValidationError(f"mu must be finite and > 0, got {mu}")
    if not isinstance(img, RadianceImage):
        raise ValidationError("mu_tonemap expects a RadianceImage")
    normalized = np.clip(img.data.astype(np.float64) / peak, 0.0, 1.0)
    mapped = kernels.mu_law_forward(np.ascontiguousarray(normalized.reshape(-1)), mu)
    return DisplayImage(mapped.reshape(normalized.shape).astype(np.float32), bit_depth=0)


def mu_psnr(a: RadianceImage, b: RadianceImage, peak: float, mu: float = DEFAULT_MU) -> float:
    """PSNR between the mu-law tone-mapped images, peak 1.0."""
    return psnr(mu_tonemap(a, peak, mu), mu_tonemap(b, peak, mu), peak=1.0)


_SSIM_TAPS = None


def _ssim_taps() -> np.ndarray:
    global _SSIM_TAPS
    if _SSIM_TAPS is None:
        offsets = np.arange(SSIM_WINDOW, dtype=np.float64) - (SSIM_WINDOW - 1) / 2.0
        taps = np.exp(-(offsets**2) / (2.0 * SSIM_SIGMA**2))
        _SSIM_TAPS = taps / taps.sum()
    return _SSIM_TAPS


def _ssim_filter(plane: np.ndarray) -> np.ndarray:
    taps = _ssim_taps()
    margin = SSIM_WINDOW // 2
    smoothed = correlate1d(plane, taps, axis=0, mode="constant")
    smoothed = correlate1d(smoothed, taps, axis=1, mode="constant")
    return smoothed[margin:-margin, margin:-margin]


def ssim(a, b) -> float:
    """Mean structural similarity over the valid-convolution interior.

    Uses an 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, dynamic
    range 1.0; computed per channel and averaged over channels and
    positions. Inputs must be normalized to [0, 1].
    """
    for img in (a, b):
        if not isinstance(img, (DisplayImage, RadianceImage)):
            raise ValidationError("ssim expects DisplayImage or normalized RadianceImage")
        if float(img.data.max()) > 1.0:
            raise DomainError("ssim inputs must be normalized to [0, 1]")
    _check_same_size(a, b)
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise ValidationError(
            f"image must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, "
            f"got {a.width}x{a.height}"
        )
    c1 = (SSIM_K1 * SSIM_DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_DYNAMIC_RANGE) ** 2
    total = 0.0
    for c in range(3):
        x = a.data[:, :, c].astype(np.float64)
        y = b.data[:, :, c].astype(np.float64)
        mx = _ssim_filter(x)
        my = _ssim_filter(y)
        vx = _ssim_filter(x * x) - mx * mx
        vy = _ssim_filter(y * y) - my * my
        cxy = _ssim_filter(x * y) - mx * my
        smap = ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / (
            (mx * mx + my * my + c1) * (vx + vy + c2)
        )
        total += float(smap.mean())
    return total / 3.0


def mu_ssim(a: RadianceImage, b: RadianceImage, peak: float, mu: float = DEFAULT_MU) -> float:
    """SSIM between the mu-law tone-mapped images."""
    return ssim(mu_tonemap(a, peak, mu), mu_tonemap(b, peak, mu))


def avg_psnr(psnr_val: float, mu_psnr_val: float) -> float:
    """Composite score: 0.7 * PSNR + 0.3 * mu-PSNR."""
    if not (math.isfinite(psnr_val) and math.isfinite(mu_psnr_val)):
        raise ValidationError("avg_psnr inputs must be finite")
    return AVG_WEIGHT_PSNR * psnr_val + AVG_WEIGHT_MU_PSNR * mu_psnr_val


@dataclass(frozen=True)
class MetricsReport:
    """All five metrics for one reconstruction, plus the normalization
    constants they were computed with."""

    psnr: float
    mu_psnr: float
    ssim: float
    mu_ssim: float
    avg_psnr: float
    peak_used: float
    mu_used: float

    def to_json_line(self, pair_id: str) -> str:
        return json.dumps(
            {
                "psnr": self.psnr,
                "mu_psnr": self.mu_psnr,
                "ssim": self.ssim,
                "mu_ssim": self.mu_ssim,
                "avg_psnr": self.avg_psnr,
                "peak_used": self.peak_used,
                "mu_used": self.mu_used,
                "pair_id": pair_id,
            }
        )


def _resolve_peak(H_gt: RadianceImage, peak_policy) -> float:
    if peak_policy == "gt-max":
        peak = float(H_gt.data.max())
        if peak <= 0:
            raise ValidationError(
                "ground truth is all zero; choose an explicit peak or 'one'"
            )
        return peak
    if peak_policy == "one":
        return 1.0
    peak = float(peak_policy)
    if not math.isfinite(peak) or peak <= 0:
        raise ValidationError(f"peak must be finite and > 0, got {peak_policy!r}")
    return peak


def evaluate(
    H_hat: RadianceImage,
    H_gt: RadianceImage,
    peak_policy="gt-max",
    mu: float = DEFAULT_MU,
) -> MetricsReport:
    """Compute the full metric suite for a reconstruction/ground-truth pair.

    peak_policy selects the HDR-domain normalization: "gt-max" (default),
    "one", or an explicit positive value. SSIM in the HDR domain is
    computed on peak-normalized, clamped copies because its stabilizing
    constants assume a known dynamic range.
    """
    _check_same_size(H_hat, H_gt)
    peak = _resolve_peak(H_gt, peak_policy)
    mu = float(mu)

    psnr_val = psnr(H_hat, H_gt, peak)
    mu_psnr_val = mu_psnr(H_hat, H_gt, peak, mu)

    def normalized(img):
        clipped = np.clip(img.data.astype(np.float64) / peak, 0.0, 1.0)
        return DisplayImage(clipped.astype(np.float32), bit_depth=0)

    ssim_val = ssim(normalized(H_hat), normalized(H_gt))
    mu_ssim_val = mu_ssim(H_hat, H_gt, peak, mu)
    return MetricsReport(
        psnr=psnr_val,
        mu_psnr=mu_psnr_val,
        ssim=ssim_val,
        mu_ssim=mu_ssim_val,
        avg_psnr=avg_psnr(psnr_val, mu_psnr_val),
        peak_used=peak,
        mu_used=mu,
    )
