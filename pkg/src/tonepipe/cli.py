"""Command-line entry point.

Subcommands wire the library into the end-to-end workflows: degrade an
HDR image, synthesize LDR stacks for a directory of scenes, fit a global
curve from an LDR/HDR pair, reconstruct HDR from an LDR, evaluate a
reconstruction, and export curve samples as CSV.

Every command prints one machine-readable JSON line on stdout; human
diagnostics go to stderr. Exit codes: 0 success, 1 validation/domain
error (including undecodable input data and usage errors), 2 I/O error.
The CLI performs no arithmetic of its own; all values come from library
calls.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dataset import (
    CurveSchedule,
    default_gamma_schedule,
    default_mu_schedule,
    synth_stack,
)
from .errors import CodecError, DegenerateFitError, DomainError, ValidationError
from .formats import (
    atomic_write_bytes,
    read_pfm,
    read_png8,
    read_rgbe,
    write_curve_csv,
    write_pfm,
    write_png8,
)
from .image import DegradationSpec, DisplayImage, RadianceImage, SaturationMask, max_value, normalize_to_unit
from .metrics import DEFAULT_MU, evaluate
from .pipeline import Gamma, MuLaw, Polynomial, degrade
from .reconstruct import (
    DEFAULT_DEGREE,
    apply_coefficient_maps,
    check_monotonic,
    constant_maps,
    derive_global_curve,
    invert_degradation,
    sample_curve,
)

OUT_DIR_ENV = "TONEPIPE_OUT_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _emit(payload: dict) -> None:
    print(json.dumps(payload))


def _load_radiance(path: str) -> RadianceImage:
    ext = os.path.splitext(path)[1].lower()
    with open(path, "rb") as f:
        data = f.read()
    if ext == ".pfm":
        return read_pfm(data)
    if ext in (".hdr", ".rgbe"):
        return read_rgbe(data)
    raise ValidationError(f"unsupported HDR input extension {ext!r} (use .pfm or .hdr)")


def _load_display(path: str) -> DisplayImage:
    ext = os.path.splitext(path)[1].lower()
    with open(path, "rb") as f:
        data = f.read()
    if ext == ".png":
        return read_png8(data)
    if ext == ".pfm":
        return DisplayImage(read_pfm(data).data, bit_depth=0)
    raise ValidationError(f"unsupported LDR input extension {ext!r} (use .png or .pfm)")


def _normalized(img: RadianceImage, peak: float | None) -> RadianceImage:
    if peak is None:
        peak = max_value(img)
        if peak == 0.0:
            return img  # all-black stays all-black
    return normalize_to_unit(img, peak)


def _curve_from_args(args):
    if args.mu is not None:
        return MuLaw(mu=args.mu)
    if args.gamma is not None:
        return Gamma(gamma=args.gamma, b=args.b)
    return Polynomial(coeffs=tuple(args.coeffs))


def _add_curve_flags(parser, with_coeffs=True):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--mu", type=float, help="mu-law curve parameter")
    group.add_argument("--gamma", type=float, help="gamma curve exponent, in (0, 1]")
    if with_coeffs:
        group.add_argument(
            "--coeffs", type=float, nargs="+", help="polynomial curve coefficients c0 c1 ..."
        )
    parser.add_argument("--b", type=float, default=1.0, help="gamma curve scale (default 1)")


def _saturation_from_display(L: DisplayImage) -> SaturationMask:
    return SaturationMask((L.data >= 1.0).any(axis=2))


def _write_display(path: str, display: DisplayImage) -> None:
    ext = os.path.splitext(path)[1].lower()
    if ext == ".png":
        if display.bit_depth != 8:
            raise ValidationError(".png output requires --bits 8")
        atomic_write_bytes(path, write_png8(display))
    elif ext == ".pfm":
        atomic_write_bytes(path, write_pfm(display))
    else:
        raise ValidationError(f"unsupported output extension {ext!r} (use .png or .pfm)")


def _mask_sidecar_path(out_path: str) -> str:
    root, _ = os.path.splitext(out_path)
    return root + ".mask.png"


def _write_mask(path: str, mask: SaturationMask) -> None:
    pixels = np.repeat(mask.flags.astype(np.float32)[:, :, None], 3, axis=2)
    atomic_write_bytes(path, write_png8(DisplayImage(pixels, bit_depth=8)))


def cmd_degrade(args) -> int:
    img = _normalized(_load_radiance(args.input), args.peak)
    curve = _curve_from_args(args)
    spec = DegradationSpec(
        clip_low=args.clip_low, clip_high=args.clip_high, quant_bits=args.bits
    )
    display, mask = degrade(img, curve, spec)
    _write_display(args.out, display)
    mask_path = _mask_sidecar_path(args.out)
    _write_mask(mask_path, mask)
    _emit(
        {
            "out": args.out,
            "mask": mask_path,
            "saturation_fraction": mask.fraction(),
            "quant_bits": spec.quant_bits,
        }
    )
    return 0


def _schedule_from_args(args) -> CurveSchedule:
    if args.params:
        values = tuple(float(p) for p in args.params.split(","))
        return CurveSchedule(args.family, values)
    return default_mu_schedule() if args.family == "mu" else default_gamma_schedule()


def _synth_scene(path, schedule, spec, out_root):
    scene_id = os.path.splitext(os.path.basename(path))[0]
    img = _normalized(_load_radiance(path), None)
    manifest = synth_stack(
        img, schedule, spec, os.path.join(out_root, scene_id), scene_id=scene_id
    )
    return scene_id, manifest


def cmd_synth(args) -> int:
    try:
        names = sorted(os.listdir(args.hdr_dir))
    except FileNotFoundError:
        print(f"i/o error: no such directory: {args.hdr_dir}", file=sys.stderr)
        return 2
    scenes = [
        os.path.join(args.hdr_dir, n)
        for n in names
        if os.path.splitext(n)[1].lower() in (".pfm", ".hdr", ".rgbe")
    ]
    if not scenes:
        print(f"error: no scenes found in {args.hdr_dir}", file=sys.stderr)
        return 1
    schedule = _schedule_from_args(args)
    spec = DegradationSpec(quant_bits=args.bits)
    out_root = args.out_dir or os.environ.get(OUT_DIR_ENV) or "."
    workers = args.workers or os.cpu_count() or 1

    failures = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_synth_scene, p, schedule, spec, out_root) for p in scenes]
        for path, future in zip(scenes, futures):
            try:
                scene_id, manifest = future.result()
            except Exception as exc:  # report per scene, keep going
                failures.append(exc)
                _emit({"scene": os.path.basename(path), "error": str(exc)})
                print(f"error in {path}: {exc}", file=sys.stderr)
                continue
            _emit(
                {
                    "scene": scene_id,
                    "entries": len(manifest.entries),
                    "out_dir": os.path.join(out_root, scene_id),
                }
            )
    if failures:
        return 2 if any(isinstance(f, OSError) for f in failures) else 1
    return 0


def _fit_pair(args):
    L = _load_display(args.ldr)
    H = _load_radiance(args.hdr)
    mask = _saturation_from_display(L) if args.exclude_saturated else None
    return derive_global_curve(L, H, degree=args.degree, mask=mask)


def _check_degree(degree: int) -> None:
    if degree < 1:
        raise ValidationError(f"--degree must be >= 1, got {degree}")


def cmd_fit(args) -> int:
    _check_degree(args.degree)
    try:
        report = _fit_pair(args)
    except DegenerateFitError as exc:
        if exc.report is not None:
            _emit({"error": "degenerate-fit", **exc.report.to_dict()})
        print(f"error: {exc}", file=sys.stderr)
        return 1
    verdict = check_monotonic(report.coeffs, 4096)
    if args.curve_csv:
        write_curve_csv(sample_curve(report.coeffs, args.samples), args.curve_csv)
    _emit(
        {
            **report.to_dict(),
            "monotonic": verdict.is_monotonic,
            "first_violation_x": verdict.first_violation_x,
        }
    )
    return 0


def cmd_reconstruct(args) -> int:
    L = _load_display(args.ldr)
    mask = _saturation_from_display(L)
    if args.coeffs is not None:
        coeffs = np.asarray(args.coeffs, dtype=np.float64)
    else:
        _check_degree(args.degree)
        fit_mask = mask if args.exclude_saturated else None
        H_ref = _load_radiance(args.from_fit)
        report = derive_global_curve(L, H_ref, degree=args.degree, mask=fit_mask)
        coeffs = report.coeffs
    values, _ = invert_degradation(L, mask)
    maps = constant_maps(coeffs, L.width, L.height)
    image, clamped = apply_coefficient_maps(maps, values)
    atomic_write_bytes(args.out, write_pfm(image))
    _emit(
        {
            "out": args.out,
            "clamped_samples": clamped,
            "coeffs": [float(c) for c in coeffs],
        }
    )
    return 0


def _parse_peak(text: str):
    if text in ("gt-max", "one"):
        return text
    try:
        return float(text)
    except ValueError:
        raise ValidationError(
            f"--peak must be 'gt-max', 'one', or a positive number, got {text!r}"
        ) from None


def cmd_eval(args) -> int:
    H_hat = _load_radiance(args.reconstructed)
    H_gt = _load_radiance(args.ground_truth)
    report = evaluate(H_hat, H_gt, peak_policy=_parse_peak(args.peak), mu=args.mu)
    pair_id = f"{os.path.basename(args.reconstructed)}:{os.path.basename(args.ground_truth)}"
    print(report.to_json_line(pair_id))
    return 0


def cmd_curve(args) -> int:
    source = _curve_from_args(args) if args.coeffs is None else list(args.coeffs)
    samples = sample_curve(source, args.samples)
    write_curve_csv(samples, args.out)
    _emit({"out": args.out, "samples": int(args.samples)})
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="tonepipe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="tone map + clip + quantize an HDR image")
    p.add_argument("input", help="HDR input (.pfm or .hdr)")
    _add_curve_flags(p)
    p.add_argument("--bits", type=int, default=8, choices=(0, 8, 16))
    p.add_argument("--clip-low", type=float, default=0.0)
    p.add_argument("--clip-high", type=float, default=1.0)
    p.add_argument("--peak", type=float, default=None, help="normalization peak (default: image max)")
    p.add_argument("-o", "--out", required=True, help="LDR output (.png or .pfm)")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("synth", help="synthesize LDR stacks for a directory of HDR scenes")
    p.add_argument("hdr_dir", help="directory of .pfm/.hdr scenes")
    p.add_argument("--family", required=True, choices=("mu", "gamma"))
    p.add_argument("--params", help="comma-separated schedule override")
    p.add_argument("--bits", type=int, default=8, choices=(0, 8, 16))
    p.add_argument("-o", "--out-dir", default=None, help=f"output root (default ${OUT_DIR_ENV} or .)")
    p.add_argument("--workers", type=int, default=None, help="scene worker pool size (default: CPU count)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="least-squares global curve from an LDR/HDR pair")
    p.add_argument("ldr", help="LDR input (.png or .pfm)")
    p.add_argument("hdr", help="HDR input (.pfm or .hdr)")
    p.add_argument("--degree", type=int, default=DEFAULT_DEGREE)
    p.add_argument("--exclude-saturated", action="store_true", help="drop pixels saturated in the LDR")
    p.add_argument("--curve-csv", default=None, help="also export the fitted curve as CSV")
    p.add_argument("--samples", type=int, default=256, help="CSV sample count")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reconstruct", help="apply a polynomial curve to an LDR image")
    p.add_argument("ldr", help="LDR input (.png or .pfm)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--coeffs", type=float, nargs="+", help="curve coefficients c0 c1 ...")
    src.add_argument("--from-fit", help="fit the curve against this ground-truth HDR first")
    p.add_argument("--degree", type=int, default=DEFAULT_DEGREE)
    p.add_argument("--exclude-saturated", action="store_true")
    p.add_argument("-o", "--out", required=True, help="HDR output (.pfm)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("eval", help="metric suite for a reconstruction vs ground truth")
    p.add_argument("reconstructed", help="HDR input (.pfm or .hdr)")
    p.add_argument("ground_truth", help="HDR input (.pfm or .hdr)")
    p.add_argument("--mu", type=float, default=DEFAULT_MU)
    p.add_argument("--peak", default="gt-max", help="'gt-max', 'one', or a positive number")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("curve", help="export curve samples as CSV")
    _add_curve_flags(p)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("-o", "--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_curve)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValidationError, DomainError, CodecError, DegenerateFitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
