import json
import os

import numpy as np
import pytest

from tonepipe import (
    DegradationSpec,
    Gamma,
    MuLaw,
    degrade,
    evaluate,
    make_synthetic_scene,
    max_value,
    normalize_to_unit,
)
from tonepipe.cli import main
from tonepipe.formats import read_pfm, read_png8, write_pfm

from conftest import radiance


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_scene(path, kind="ramp", width=64, height=16, dr=1e3):
    img = make_synthetic_scene(kind, width, height, dr)
    with open(path, "wb") as f:
        f.write(write_pfm(img))
    return img


def last_json(stdout):
    lines = [ln for ln in stdout.splitlines() if ln.strip()]
    return json.loads(lines[-1])


class TestDegradeCommand:
    def test_identity_pipeline_matches_normalized_input(self, tmp_path, capsys):
        src = tmp_path / "in.pfm"
        img = write_scene(str(src))
        out = tmp_path / "out.pfm"
        code, stdout, _ = run(
            capsys, "degrade", str(src), "--gamma", "1.0", "--bits", "0", "-o", str(out)
        )
        assert code == 0
        normalized = normalize_to_unit(img, max_value(img))
        with open(out, "rb") as f:
            result = read_pfm(f.read())
        assert np.array_equal(result.data, normalized.data)
        payload = last_json(stdout)
        assert payload["saturation_fraction"] == 0.0
        assert os.path.exists(payload["mask"])

    def test_gamma_above_one_rejected(self, tmp_path, capsys):
        src = tmp_path / "in.pfm"
        write_scene(str(src))
        code, _, err = run(
            capsys, "degrade", str(src), "--gamma", "1.5", "-o", str(tmp_path / "o.png")
        )
        assert code == 1
        assert "gamma" in err

    def test_mu_output_matches_library_and_compresses_highlights(self, tmp_path, capsys):
        src = tmp_path / "in.pfm"
        img = write_scene(str(src), width=256, height=4)
        out = tmp_path / "out.png"
        code, stdout, _ = run(capsys, "degrade", str(src), "--mu", "5000", "-o", str(out))
        assert code == 0
        # the CLI is a thin shell: byte-for-byte the library result
        normalized = normalize_to_unit(img, max_value(img))
        expected, mask = degrade(normalized, MuLaw(mu=5000.0), DegradationSpec(quant_bits=8))
        with open(out, "rb") as f:
            result = read_png8(f.read())
        assert np.array_equal(result.data, expected.data)
        assert last_json(stdout)["saturation_fraction"] == mask.fraction()
        # highlight compression: top-decile spread shrinks
        flat_in = np.sort(normalized.data.reshape(-1))
        flat_out = np.sort(result.data.astype(np.float64).reshape(-1))
        decile = flat_in.size // 10
        spread_in = flat_in[-1] - flat_in[-decile]
        spread_out = flat_out[-1] - flat_out[-decile]
        assert spread_out < spread_in

    def test_png_output_requires_8_bits(self, tmp_path, capsys):
        src = tmp_path / "in.pfm"
        write_scene(str(src))
        code, _, err = run(
            capsys, "degrade", str(src), "--gamma", "0.5", "--bits", "0",
            "-o", str(tmp_path / "out.png"),
        )
        assert code == 1 and "--bits 8" in err

    def test_missing_input_is_io_error(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "degrade", str(tmp_path / "nope.pfm"), "--gamma", "0.5",
            "-o", str(tmp_path / "o.png"),
        )
        assert code == 2

    def test_curve_source_required(self, tmp_path, capsys):
        src = tmp_path / "in.pfm"
        write_scene(str(src))
        code, _, err = run(capsys, "degrade", str(src), "-o", str(tmp_path / "o.png"))
        assert code == 1


class TestSynthCommand:
    def test_gamma_family_stack(self, tmp_path, capsys):
        hdr_dir = tmp_path / "scenes"
        hdr_dir.mkdir()
        write_scene(str(hdr_dir / "sceneA.pfm"))
        out_root = tmp_path / "stacks"
        code, stdout, _ = run(
            capsys, "synth", str(hdr_dir), "--family", "gamma", "-o", str(out_root)
        )
        assert code == 0
        payload = last_json(stdout)
        assert payload["entries"] == 8
        files = os.listdir(out_root / "sceneA")
        assert sum(name.endswith(".png") for name in files) == 8
        assert "manifest.jsonl" in files

    def test_mu_family_has_twenty_entries(self, tmp_path, capsys):
        hdr_dir = tmp_path / "scenes"
        hdr_dir.mkdir()
        write_scene(str(hdr_dir / "s.pfm"))
        code, stdout, _ = run(
            capsys, "synth", str(hdr_dir), "--family", "mu", "-o", str(tmp_path / "out")
        )
        assert code == 0
        assert last_json(stdout)["entries"] == 20

    def test_empty_directory(self, tmp_path, capsys):
        empty = tmp_path / "none"
        empty.mkdir()
        code, _, err = run(capsys, "synth", str(empty), "--family", "gamma")
        assert code == 1
        assert "no scenes found" in err

    def test_missing_directory_is_io_error(self, tmp_path, capsys):
        code, _, _ = run(capsys, "synth", str(tmp_path / "missing"), "--family", "mu")
        assert code == 2

    def test_out_dir_env_override(self, tmp_path, capsys, monkeypatch):
        hdr_dir = tmp_path / "scenes"
        hdr_dir.mkdir()
        write_scene(str(hdr_dir / "s.pfm"))
        target = tmp_path / "env-target"
        monkeypatch.setenv("TONEPIPE_OUT_DIR", str(target))
        code, _, _ = run(capsys, "synth", str(hdr_dir), "--family", "gamma")
        assert code == 0
        assert (target / "s" / "manifest.jsonl").exists()


def _write_pair(tmp_path, gamma=0.5, quant_bits=0):
    scene = make_synthetic_scene("ramp", 96, 32, 1e4)
    scene = normalize_to_unit(scene, max_value(scene))
    display, _ = degrade(scene, Gamma(gamma=gamma), DegradationSpec(quant_bits=quant_bits))
    hdr = tmp_path / "gt.pfm"
    ldr = tmp_path / ("ldr.png" if quant_bits == 8 else "ldr.pfm")
    with open(hdr, "wb") as f:
        f.write(write_pfm(scene))
    from tonepipe.formats import write_png8

    with open(ldr, "wb") as f:
        f.write(write_png8(display) if quant_bits == 8 else write_pfm(display))
    return ldr, hdr, scene


class TestFitCommand:
    def test_gamma_half_fit(self, tmp_path, capsys):
        ldr, hdr, _ = _write_pair(tmp_path, gamma=0.5)
        code, stdout, _ = run(capsys, "fit", str(ldr), str(hdr), "--degree", "7")
        assert code == 0
        payload = last_json(stdout)
        assert payload["rms_residual"] <= 1e-4
        assert payload["monotonic"] is True
        grid = np.linspace(0, 1, 257)
        fitted = sum(c * grid**n for n, c in enumerate(payload["coeffs"]))
        assert np.abs(fitted - grid**2).max() <= 1e-4

    def test_dimension_mismatch(self, tmp_path, capsys):
        ldr, _, _ = _write_pair(tmp_path)
        other = tmp_path / "small.pfm"
        write_scene(str(other), width=8, height=8)
        code, _, _ = run(capsys, "fit", str(ldr), str(other))
        assert code == 1

    def test_degree_zero_rejected(self, tmp_path, capsys):
        ldr, hdr, _ = _write_pair(tmp_path)
        code, _, _ = run(capsys, "fit", str(ldr), str(hdr), "--degree", "0")
        assert code == 1

    def test_degenerate_fit_reports(self, tmp_path, capsys):
        flat = radiance(np.full((16, 16, 3), 0.5, dtype=np.float32))
        ldr = tmp_path / "flat.pfm"
        hdr = tmp_path / "flat_gt.pfm"
        with open(ldr, "wb") as f:
            f.write(write_pfm(flat))
        with open(hdr, "wb") as f:
            f.write(write_pfm(flat))
        code, stdout, err = run(capsys, "fit", str(ldr), str(hdr), "--degree", "3")
        assert code == 1
        assert last_json(stdout)["error"] == "degenerate-fit"

    def test_curve_csv_export(self, tmp_path, capsys):
        ldr, hdr, _ = _write_pair(tmp_path)
        csv_path = tmp_path / "fit.csv"
        code, _, _ = run(
            capsys, "fit", str(ldr), str(hdr), "--curve-csv", str(csv_path), "--samples", "64"
        )
        assert code == 0
        parsed = np.loadtxt(str(csv_path), delimiter=",", skiprows=1)
        assert parsed.shape == (64, 2)


class TestReconstructCommand:
    def test_identity_coeffs_pass_values_through(self, tmp_path, capsys):
        ldr, _, _ = _write_pair(tmp_path, gamma=0.5, quant_bits=8)
        out = tmp_path / "recon.pfm"
        code, stdout, _ = run(
            capsys, "reconstruct", str(ldr), "--coeffs", "0", "1", "-o", str(out)
        )
        assert code == 0
        with open(ldr, "rb") as f:
            ldr_img = read_png8(f.read())
        with open(out, "rb") as f:
            recon = read_pfm(f.read())
        assert np.array_equal(recon.data, ldr_img.data)
        assert last_json(stdout)["clamped_samples"] == 0

    def test_from_fit_round_trip_psnr(self, tmp_path, capsys):
        ldr, hdr, scene = _write_pair(tmp_path, gamma=0.5, quant_bits=0)
        out = tmp_path / "recon.pfm"
        code, _, _ = run(
            capsys, "reconstruct", str(ldr), "--from-fit", str(hdr), "-o", str(out)
        )
        assert code == 0
        with open(out, "rb") as f:
            recon = read_pfm(f.read())
        diff = recon.data.astype(np.float64) - scene.data.astype(np.float64)
        mse = float(np.mean(diff * diff))
        assert 10 * np.log10(1.0 / mse) >= 50.0

    def test_missing_source_is_usage_error(self, tmp_path, capsys):
        ldr, _, _ = _write_pair(tmp_path)
        code, _, err = run(capsys, "reconstruct", str(ldr), "-o", str(tmp_path / "o.pfm"))
        assert code == 1


class TestEvalCommand:
    def test_identical_files(self, tmp_path, capsys):
        path = tmp_path / "img.pfm"
        write_scene(str(path))
        code, stdout, _ = run(capsys, "eval", str(path), str(path))
        assert code == 0
        payload = last_json(stdout)
        assert payload["psnr"] == 99.0 and payload["mu_psnr"] == 99.0
        assert payload["ssim"] == 1.0 and payload["mu_ssim"] == 1.0

    def test_fixture_mse_oracle(self, tmp_path, capsys):
        gt = tmp_path / "gt.pfm"
        hat = tmp_path / "hat.pfm"
        with open(gt, "wb") as f:
            f.write(write_pfm(radiance(np.full((16, 16, 3), 0.1, dtype=np.float32))))
        with open(hat, "wb") as f:
            f.write(write_pfm(radiance(np.zeros((16, 16, 3), dtype=np.float32))))
        code, stdout, _ = run(capsys, "eval", str(hat), str(gt), "--peak", "one")
        assert code == 0
        assert last_json(stdout)["psnr"] == pytest.approx(20.0, abs=1e-6)

    def test_avg_rederivable_from_line(self, tmp_path, capsys):
        a = tmp_path / "a.pfm"
        b = tmp_path / "b.pfm"
        write_scene(str(a), dr=1e2)
        write_scene(str(b), dr=1e3)
        code, stdout, _ = run(capsys, "eval", str(a), str(b))
        payload = last_json(stdout)
        assert payload["avg_psnr"] == 0.7 * payload["psnr"] + 0.3 * payload["mu_psnr"]

    def test_matches_library_exactly(self, tmp_path, capsys):
        a = tmp_path / "a.pfm"
        b = tmp_path / "b.pfm"
        img_a = write_scene(str(a), dr=1e2)
        img_b = write_scene(str(b), dr=1e4)
        code, stdout, _ = run(capsys, "eval", str(a), str(b), "--mu", "700")
        payload = last_json(stdout)
        report = evaluate(img_a, img_b, mu=700.0)
        assert payload["psnr"] == report.psnr
        assert payload["mu_psnr"] == report.mu_psnr
        assert payload["ssim"] == report.ssim
        assert payload["mu_ssim"] == report.mu_ssim
        assert payload["avg_psnr"] == report.avg_psnr


class TestCurveCommand:
    def test_identity_rows(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        code, _, _ = run(
            capsys, "curve", "--coeffs", "0", "1", "--samples", "3", "-o", str(out)
        )
        assert code == 0
        parsed = np.loadtxt(str(out), delimiter=",", skiprows=1)
        assert parsed.tolist() == [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]]

    def test_gamma_vs_fitted_curve_export(self, tmp_path, capsys):
        truth_csv = tmp_path / "truth.csv"
        code, _, _ = run(
            capsys, "curve", "--gamma", "0.5", "--samples", "257", "-o", str(truth_csv)
        )
        assert code == 0
        ldr, hdr, _ = _write_pair(tmp_path, gamma=0.5)
        fitted_csv = tmp_path / "fitted.csv"
        code, stdout, _ = run(
            capsys, "fit", str(ldr), str(hdr),
            "--curve-csv", str(fitted_csv), "--samples", "257",
        )
        assert code == 0
        truth = np.loadtxt(str(truth_csv), delimiter=",", skiprows=1)
        fitted = np.loadtxt(str(fitted_csv), delimiter=",", skiprows=1)
        # the fitted LDR->HDR curve inverts the forward gamma export:
        # same sample grid, y-roles swapped, so compare against x**2
        assert np.abs(fitted[:, 1] - fitted[:, 0] ** 2).max() <= 1e-3
        assert np.abs(truth[:, 1] - np.sqrt(truth[:, 0])).max() <= 1e-6

    def test_single_sample_rejected(self, tmp_path, capsys):
        code, _, _ = run(
            capsys, "curve", "--mu", "10", "--samples", "1", "-o", str(tmp_path / "c.csv")
        )
        assert code == 1

    def test_two_sources_rejected(self, tmp_path, capsys):
        code, _, _ = run(
            capsys, "curve", "--mu", "10", "--gamma", "0.5", "-o", str(tmp_path / "c.csv")
        )
        assert code == 1

    def test_no_source_rejected(self, tmp_path, capsys):
        code, _, _ = run(capsys, "curve", "-o", str(tmp_path / "c.csv"))
        assert code == 1
