"""Dataset construction: tone-curve schedules, LDR stack synthesis with
machine-readable manifests, and deterministic synthetic HDR scenes.

Each synthesized stack records exactly which curve produced which LDR
file, so the LDR <-> tone curve relationship is verifiable end to end:
re-degrading the stored HDR with a manifest entry's (family, parameter)
reproduces the stored LDR bit for bit.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import CodecError, ValidationError
from .image import DegradationSpec, DisplayImage, RadianceImage
from .pipeline import MU_SYNTH_MAX, MU_SYNTH_MIN, Gamma, MuLaw, ToneCurve, degrade
from .formats import atomic_write_bytes, write_pfm, write_png8

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.jsonl"
HDR_NAME = "hdr.pfm"

FAMILY_MU = "mu"
FAMILY_GAMMA = "gamma"

SCENE_KINDS = ("ramp", "radial", "checker-hdr")


@dataclass(frozen=True)
class CurveSchedule:
    """An ordered set of parameters within one tone curve family."""

    family: str
    parameters: tuple

    def __post_init__(self):
        if self.family not in (FAMILY_MU, FAMILY_GAMMA):
            raise ValidationError(f"family must be '{FAMILY_MU}' or '{FAMILY_GAMMA}'")
        params = tuple(float(p) for p in self.parameters)
        if not params:
            raise ValidationError("schedule must be nonempty")
        if any(not math.isfinite(p) for p in params):
            raise ValidationError("schedule parameters must be finite")
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ValidationError("schedule parameters must be strictly increasing")
        if self.family == FAMILY_MU:
            if params[0] < MU_SYNTH_MIN or params[-1] > MU_SYNTH_MAX:
                raise ValidationError(
                    f"mu values must lie in [{MU_SYNTH_MIN:g}, {MU_SYNTH_MAX:g}]"
                )
        else:
            if params[0] <= 0 or params[-1] > 1:
                raise ValidationError("gamma values must lie in (0, 1]")
        object.__setattr__(self, "parameters", params)

    def curve(self, parameter: float) -> ToneCurve:
        if self.family == FAMILY_MU:
            return MuLaw(mu=parameter)
        return Gamma(gamma=parameter)

    def __len__(self) -> int:
        return len(self.parameters)


@dataclass(frozen=True)
class ManifestEntry:
    ldr_path: str
    family: str
    parameter: float
    quant_bits: int
    saturation_fraction: float


@dataclass(frozen=True)
class Manifest:
    scene_id: str
    hdr_path: str
    entries: tuple

    def write(self, path: str) -> None:
        lines = [
            json.dumps(
                {
                    "scene_id": self.scene_id,
                    "hdr_path": self.hdr_path,
                    "schema_version": SCHEMA_VERSION,
                }
            )
        ]
        for e in self.entries:
            lines.append(
                json.dumps(
                    {
                        "ldr_path": e.ldr_path,
                        "family": e.family,
                        "parameter": e.parameter,
                        "quant_bits": e.quant_bits,
                        "saturation_fraction": e.saturation_fraction,
                    }
                )
            )
        atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def load_manifest(path: str) -> Manifest:
    """Parse a manifest.jsonl written by synth_stack."""
    with open(path, "rb") as f:
        lines = [ln for ln in f.read().decode().splitlines() if ln.strip()]
    if not lines:
        raise CodecError(f"empty manifest: {path}")
    try:
        header = json.loads(lines[0])
        records = [json.loads(ln) for ln in lines[1:]]
    except json.JSONDecodeError as exc:
        raise CodecError(f"malformed manifest line: {exc}") from None
    if header.get("schema_version") != SCHEMA_VERSION:
        raise CodecError(f"unsupported manifest schema: {header.get('schema_version')!r}")
    entries = tuple(
        ManifestEntry(
            ldr_path=r["ldr_path"],
            family=r["family"],
            parameter=float(r["parameter"]),
            quant_bits=int(r["quant_bits"]),
            saturation_fraction=float(r["saturation_fraction"]),
        )
        for r in records
    )
    return Manifest(scene_id=header["scene_id"], hdr_path=header["hdr_path"], entries=entries)


def default_mu_schedule() -> CurveSchedule:
    """20 mu values, logarithmically spaced over [1, 2e6] inclusive."""
    return CurveSchedule(FAMILY_MU, tuple(np.geomspace(MU_SYNTH_MIN, MU_SYNTH_MAX, 20)))


def default_gamma_schedule() -> CurveSchedule:
    """The eight-value gamma benchmark grid (0.9 is deliberately absent)."""
    return CurveSchedule(FAMILY_GAMMA, (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0))


def _ldr_filename(index: int, family: str, parameter: float, quant_bits: int) -> str:
    ext = "png" if quant_bits == 8 else "pfm"
    return f"ldr_{index:02d}_{family}_{parameter:g}.{ext}"


def _write_ldr(path: str, display: DisplayImage) -> None:
    if display.bit_depth == 8:
        atomic_write_bytes(path, write_png8(display))
    else:
        # 16-bit and continuous stacks are stored as exact floats
        atomic_write_bytes(path, write_pfm(display))


def synth_stack(
    H: RadianceImage,
    schedule: CurveSchedule,
    spec: DegradationSpec,
    out_dir: str,
    scene_id: str | None = None,
) -> Manifest:
    """Degrade one normalized HDR image through every curve in the schedule.

    Writes one LDR file per schedule entry plus the source HDR (as PFM) and
    a manifest.jsonl tying each LDR to its curve parameters. File writes
    are atomic (write-temp-then-rename). Paths in the manifest are relative
    to out_dir.
    """
    if (H.data > 1).any():
        # fail before touching the filesystem; degrade would also reject
        raise ValidationError("HDR input must be normalized to [0, 1] before synthesis")
    os.makedirs(out_dir, exist_ok=True)
    if scene_id is None:
        scene_id = os.path.basename(os.path.normpath(out_dir))
    atomic_write_bytes(os.path.join(out_dir, HDR_NAME), write_pfm(H))
    entries = []
    for i, parameter in enumerate(schedule.parameters):
        display, mask = degrade(H, schedule.curve(parameter), spec)
        name = _ldr_filename(i, schedule.family, parameter, spec.quant_bits)
        _write_ldr(os.path.join(out_dir, name), display)
        entries.append(
            ManifestEntry(
                ldr_path=name,
                family=schedule.family,
                parameter=parameter,
                quant_bits=spec.quant_bits,
                saturation_fraction=mask.fraction(),
            )
        )
    manifest = Manifest(scene_id=scene_id, hdr_path=HDR_NAME, entries=tuple(entries))
    manifest.write(os.path.join(out_dir, MANIFEST_NAME))
    return manifest


def make_synthetic_scene(
    kind: str, width: int, height: int, dynamic_range: float
) -> RadianceImage:
    """Deterministic procedural HDR content.

    The ratio between the largest and smallest positive sample equals
    dynamic_range (dynamic_range 1 gives a constant image). Kinds:

      ramp        horizontal, log-spaced from 1/dynamic_range up to 1
      radial      log falloff with radius; exact 4-fold rotational
                  symmetry on square dimensions
      checker-hdr two-level checkerboard alternating 1/dynamic_range and 1
    """
    if kind not in SCENE_KINDS:
        raise ValidationError(f"kind must be one of {SCENE_KINDS}, got {kind!r}")
    if not isinstance(width, int) or not isinstance(height, int) or width < 1 or height < 1:
        raise ValidationError(f"dimensions must be positive integers, got {width}x{height}")
    dr = float(dynamic_range)
    if not math.isfinite(dr) or dr < 1:
        raise ValidationError(f"dynamic_range must be finite and >= 1, got {dynamic_range}")

    if kind == "ramp":
        row = np.geomspace(1.0 / dr, 1.0, width)
        plane = np.broadcast_to(row, (height, width))
    elif kind == "radial":
        ys = np.arange(height, dtype=np.float64) - (height - 1) / 2.0
        xs = np.arange(width, dtype=np.float64) - (width - 1) / 2.0
        r = np.sqrt(ys[:, None] ** 2 + xs[None, :] ** 2)
        rmin, rmax = r.min(), r.max()
        if rmax == rmin:
            plane = np.ones((height, width))
        else:
            t = (r - rmin) / (rmax - rmin)
            plane = np.power(dr, -t)
    else:
        cell = max(1, min(width, height) // 8)
        iy = np.arange(height) // cell
        ix = np.arange(width) // cell
        parity = (iy[:, None] + ix[None, :]) % 2
        plane = np.where(parity == 0, 1.0 / dr, 1.0)

    data = np.repeat(plane.astype(np.float32)[:, :, None], 3, axis=2)
    return RadianceImage(data)
