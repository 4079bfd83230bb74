"""Core image containers shared by the whole pipeline.

Pixel storage is float32, shape (height, width, 3), C-contiguous, which is
exactly the row-major channel-interleaved buffer the file codecs read and
write. All containers are immutable after construction (the underlying
numpy buffers are marked read-only) and therefore safe to share across
threads. Fitting and metric accumulation happen in float64 elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

CHANNELS = 3


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _check_rgb_shape(data: np.ndarray, what: str) -> None:
    if data.ndim != 3 or data.shape[2] != CHANNELS:
        raise ValidationError(
            f"{what} data must have shape (height, width, {CHANNELS}), got {data.shape}"
        )
    if data.shape[0] < 1 or data.shape[1] < 1:
        raise ValidationError(f"{what} must be at least 1x1, got {data.shape[:2]}")


@dataclass(frozen=True)
class RadianceImage:
    """Linear, scene-referred HDR pixels: finite, nonnegative float32."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        _check_rgb_shape(data, "radiance image")
        data = data.astype(np.float32, copy=not data.flags.c_contiguous)
        if not np.isfinite(data).all():
            raise ValidationError("radiance image contains non-finite samples")
        if (data < 0).any():
            raise ValidationError("radiance samples must be >= 0")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return CHANNELS


@dataclass(frozen=True)
class DisplayImage:
    """Display-referred pixels in [0, 1].

    bit_depth records the quantization grid the samples lie on: 8 or 16 for
    quantized data (every sample is some k / (2**bits - 1), stored as the
    float32 rounding of that ratio), or 0 for continuous data.
    """

    data: np.ndarray
    bit_depth: int = 0

    def __post_init__(self):
        data = np.asarray(self.data)
        _check_rgb_shape(data, "display image")
        data = data.astype(np.float32, copy=not data.flags.c_contiguous)
        if not np.isfinite(data).all():
            raise ValidationError("display image contains non-finite samples")
        if (data < 0).any() or (data > 1).any():
            raise ValidationError("display samples must lie in [0, 1]")
        if self.bit_depth not in (0, 8, 16):
            raise ValidationError(f"bit_depth must be 0, 8 or 16, got {self.bit_depth}")
        if self.bit_depth:
            levels = float(2**self.bit_depth - 1)
            k = np.rint(data.astype(np.float64) * levels)
            on_grid = (k / levels).astype(np.float32)
            if not np.array_equal(on_grid, data):
                raise ValidationError(
                    f"samples do not lie on the {self.bit_depth}-bit quantization grid"
                )
        object.__setattr__(self, "data", _freeze(data))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return CHANNELS


@dataclass(frozen=True)
class SaturationMask:
    """Per-pixel flags: True where a channel was clamped at the top of the
    dynamic range during clipping."""

    flags: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.flags)
        if flags.ndim != 2 or flags.shape[0] < 1 or flags.shape[1] < 1:
            raise ValidationError(f"mask flags must be a 2-D array, got shape {flags.shape}")
        object.__setattr__(self, "flags", _freeze(flags.astype(bool)))

    @classmethod
    def empty(cls, width: int, height: int) -> "SaturationMask":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.flags.shape[1]

    @property
    def height(self) -> int:
        return self.flags.shape[0]

    def fraction(self) -> float:
        return float(self.flags.mean())


def require_mask_match(mask: SaturationMask, image) -> None:
    """Reject a mask whose dimensions differ from the image it annotates."""
    if mask.height != image.height or mask.width != image.width:
        raise ValidationError(
            f"mask is {mask.width}x{mask.height} but image is {image.width}x{image.height}"
        )


@dataclass(frozen=True)
class DegradationSpec:
    """Parameters of the information-losing half of the pipeline: dynamic
    range clipping bounds and the quantization bit depth (0 = none)."""

    clip_low: float = 0.0
    clip_high: float = 1.0
    quant_bits: int = 8

    def __post_init__(self):
        if not (np.isfinite(self.clip_low) and np.isfinite(self.clip_high)):
            raise ValidationError("clip bounds must be finite")
        if not self.clip_low < self.clip_high:
            raise ValidationError(
                f"clip_low must be < clip_high, got [{self.clip_low}, {self.clip_high}]"
            )
        if self.quant_bits not in (0, 8, 16):
            raise ValidationError(f"quant_bits must be 0, 8 or 16, got {self.quant_bits}")


def new_radiance_image(width: int, height: int, fill: float) -> RadianceImage:
    """Create a constant image of the given size."""
    if not isinstance(width, int) or not isinstance(height, int) or width < 1 or height < 1:
        raise ValidationError(f"width and height must be positive integers, got {width}x{height}")
    fill = float(fill)
    if not np.isfinite(fill) or fill < 0:
        raise ValidationError(f"fill must be finite and >= 0, got {fill}")
    return RadianceImage(np.full((height, width, CHANNELS), fill, dtype=np.float32))


def max_value(img: RadianceImage) -> float:
    """Maximum sample over all pixels and channels."""
    if not isinstance(img, RadianceImage):
        raise ValidationError("max_value expects a RadianceImage")
    return float(img.data.max())


def normalize_to_unit(img: RadianceImage, peak: float) -> RadianceImage:
    """Divide every sample by peak. Samples above peak end up above 1;
    clipping those is a separate pipeline step."""
    peak = float(peak)
    if not np.isfinite(peak) or peak <= 0:
        raise ValidationError(f"peak must be finite and > 0, got {peak}")
    scaled = img.data.astype(np.float64) / peak
    return RadianceImage(scaled.astype(np.float32))
