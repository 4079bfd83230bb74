"""tonepipe: an explicit tone-curve model of the camera pipeline.

Forward: HDR -> tone curve -> clip -> quantize -> LDR. Inverse: dequantize,
apply per-pixel polynomial coefficient maps, recover HDR. Plus global
least-squares curve estimation, dataset stack synthesis with manifests,
quality metrics, and PFM/RGBE/PNG codecs.
"""

from ._backend import backend_name
from .dataset import (
    CurveSchedule,
    Manifest,
    ManifestEntry,
    default_gamma_schedule,
    default_mu_schedule,
    load_manifest,
    make_synthetic_scene,
    synth_stack,
)
from .errors import (
    CodecError,
    DegenerateFitError,
    DomainError,
    UnsupportedFormatError,
    ValidationError,
)
from .image import (
    DegradationSpec,
    DisplayImage,
    RadianceImage,
    SaturationMask,
    max_value,
    new_radiance_image,
    normalize_to_unit,
)
from .metrics import (
    DEFAULT_MU,
    MetricsReport,
    avg_psnr,
    evaluate,
    mu_psnr,
    mu_ssim,
    mu_tonemap,
    psnr,
    ssim,
)
from .pipeline import (
    Gamma,
    MuLaw,
    Polynomial,
    ToneCurve,
    clip,
    degrade,
    eval_curve,
    quantize,
    tone_map,
)
from .reconstruct import (
    DEFAULT_DEGREE,
    CoefficientMaps,
    FitReport,
    MonotonicityResult,
    apply_coefficient_maps,
    check_monotonic,
    constant_maps,
    derive_global_curve,
    fit_polynomial_global,
    invert_curve_analytic,
    invert_degradation,
    sample_curve,
)

__version__ = "0.1.0"

__all__ = [
    "CodecError",
    "CoefficientMaps",
    "CurveSchedule",
    "DEFAULT_DEGREE",
    "DEFAULT_MU",
    "DegenerateFitError",
    "DegradationSpec",
    "DisplayImage",
    "DomainError",
    "FitReport",
    "Gamma",
    "Manifest",
    "ManifestEntry",
    "MetricsReport",
    "MonotonicityResult",
    "MuLaw",
    "Polynomial",
    "RadianceImage",
    "SaturationMask",
    "ToneCurve",
    "UnsupportedFormatError",
    "ValidationError",
    "apply_coefficient_maps",
    "avg_psnr",
    "backend_name",
    "check_monotonic",
    "clip",
    "constant_maps",
    "default_gamma_schedule",
    "default_mu_schedule",
    "degrade",
    "derive_global_curve",
    "eval_curve",
    "evaluate",
    "fit_polynomial_global",
    "invert_curve_analytic",
    "invert_degradation",
    "load_manifest",
    "make_synthetic_scene",
    "max_value",
    "mu_psnr",
    "mu_ssim",
    "mu_tonemap",
    "new_radiance_image",
    "normalize_to_unit",
    "psnr",
    "quantize",
    "sample_curve",
    "ssim",
    "synth_stack",
    "tone_map",
]
