import math

import numpy as np
import pytest

from tonepipe import (
    CoefficientMaps,
    DegenerateFitError,
    DegradationSpec,
    DomainError,
    Gamma,
    MuLaw,
    Polynomial,
    SaturationMask,
    ValidationError,
    apply_coefficient_maps,
    check_monotonic,
    constant_maps,
    degrade,
    derive_global_curve,
    eval_curve,
    fit_polynomial_global,
    invert_curve_analytic,
    invert_degradation,
    new_radiance_image,
    sample_curve,
)

from conftest import display, radiance


def powersum(coeffs, x):
    """Naive power-sum evaluation, independent of the Horner code path."""
    x = np.asarray(x, dtype=np.float64)
    total = np.zeros_like(x)
    for n, c in enumerate(coeffs):
        total += c * x**n
    return total


class TestInvertDegradation:
    def test_identity_on_values(self, rng):
        data = rng.random((4, 4, 3)).astype(np.float32)
        L = display(data)
        mask = SaturationMask.empty(4, 4)
        values, out_mask = invert_degradation(L, mask)
        assert values.dtype == np.float64
        assert np.array_equal(values, data.astype(np.float64))
        assert out_mask is mask

    def test_mask_carried_through(self):
        L = display(np.ones((2, 2, 3), dtype=np.float32))
        flags = np.zeros((2, 2), dtype=bool)
        flags[0, 1] = True
        _, mask = invert_degradation(L, SaturationMask(flags))
        assert mask.flags[0, 1] and mask.fraction() == 0.25

    def test_quantized_grid_preserved(self):
        grid = (np.arange(12, dtype=np.float64).reshape(2, 2, 3) / 255.0).astype(np.float32)
        values, _ = invert_degradation(
            display(grid, bit_depth=8), SaturationMask.empty(2, 2)
        )
        assert np.array_equal(values.astype(np.float32), grid)

    def test_mask_mismatch_rejected(self):
        L = display(np.zeros((2, 2, 3), dtype=np.float32))
        with pytest.raises(ValidationError):
            invert_degradation(L, SaturationMask.empty(3, 2))


class TestConstantMaps:
    def test_identity_maps(self):
        maps = constant_maps([0.0, 1.0], 4, 4)
        assert maps.degree == 1
        assert (maps.maps[0] == 0.0).all() and (maps.maps[1] == 1.0).all()

    def test_single_coeff_rejected(self):
        with pytest.raises(ValidationError):
            constant_maps([0.3], 4, 4)

    def test_three_planes(self):
        maps = constant_maps([0.0, 0.0, 1.0], 2, 2)
        assert maps.maps.shape == (3, 2, 2)
        assert (maps.maps[2] == 1.0).all()


class TestApplyCoefficientMaps:
    def test_identity_polynomial(self, rng):
        x = rng.random((3, 5, 3))
        img, clamped = apply_coefficient_maps(constant_maps([0.0, 1.0], 5, 3), x)
        assert np.array_equal(img.data, x.astype(np.float32))
        assert clamped == 0

    def test_constant_polynomial(self, rng):
        x = rng.random((2, 2, 3))
        img, _ = apply_coefficient_maps(constant_maps([0.3, 0.0], 2, 2), x)
        assert (img.data == np.float32(0.3)).all()

    def test_square_map_scalar_oracle(self):
        x = np.full((2, 2, 3), 0.5)
        img, _ = apply_coefficient_maps(constant_maps([0.0, 0.0, 1.0], 2, 2), x)
        assert (img.data == np.float32(0.5**2)).all()

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            apply_coefficient_maps(constant_maps([0.0, 1.0], 3, 3), np.zeros((2, 2, 3)))

    def test_negative_results_clamped_and_counted(self):
        x = np.full((2, 2, 3), 0.5)
        img, clamped = apply_coefficient_maps(constant_maps([-1.0, 1.0], 2, 2), x)
        assert (img.data == 0.0).all()
        assert clamped == 12

    def test_spatially_varying_maps(self):
        planes = np.zeros((2, 2, 2), dtype=np.float64)
        planes[1, :, 0] = 1.0  # left column: identity
        planes[0, :, 1] = 0.25  # right column: constant 0.25
        x = np.full((2, 2, 3), 0.5)
        img, _ = apply_coefficient_maps(CoefficientMaps(planes), x)
        assert (img.data[:, 0] == 0.5).all()
        assert (img.data[:, 1] == 0.25).all()

    def test_linear_in_maps(self, rng):
        # measured at the double-accumulation level, before float32 storage
        from tonepipe._backend import kernels

        a = rng.uniform(0, 1, (4, 9))
        b = rng.uniform(0, 1, (4, 9))
        x = rng.random((9, 3))
        both, _ = kernels.horner_maps(np.ascontiguousarray(a + b), x)
        only_a, _ = kernels.horner_maps(a, x)
        only_b, _ = kernels.horner_maps(b, x)
        np.testing.assert_allclose(both, only_a + only_b, rtol=1e-13, atol=1e-13)

    def test_horner_matches_power_sum(self, rng):
        from tonepipe._backend import kernels

        coeffs = rng.uniform(-1, 1, 8)
        x = rng.random(1000)
        horner = kernels.polynomial_eval(coeffs, x)
        naive = powersum(coeffs, x)
        # 4 ulps measured against the accumulated magnitude: where signed
        # terms cancel, the result itself carries no tighter bound
        scale = powersum(np.abs(coeffs), x)
        assert np.abs(horner - naive).max() <= 4 * np.finfo(np.float64).eps * scale.max()

    def test_image_level_matches_power_sum(self, rng):
        coeffs = rng.uniform(0, 1, 8)
        x = rng.random((4, 4, 3))
        expected = powersum(coeffs, x).astype(np.float32)
        img, _ = apply_coefficient_maps(constant_maps(coeffs, 4, 4), x)
        np.testing.assert_array_max_ulp(img.data, expected, maxulp=1)


class TestFitPolynomialGlobal:
    def test_exact_recovery(self):
        x = np.linspace(0, 1, 50)
        y = 0.2 + 0.5 * x + 0.3 * x**2  # literal power sum, no shared code path
        report = fit_polynomial_global(x, y, 2)
        np.testing.assert_allclose(report.coeffs, [0.2, 0.5, 0.3], atol=1e-8)
        assert report.sample_count == 50
        assert report.rms_residual < 1e-10

    def test_rank_deficient_design_raises(self):
        x = np.full(20, 0.5)
        y = np.linspace(0, 1, 20)
        with pytest.raises(DegenerateFitError) as excinfo:
            fit_polynomial_global(x, y, 1)
        assert excinfo.value.report is not None
        assert excinfo.value.report.condition_estimate > 1e12

    def test_gamma_inverse_is_exact_polynomial(self):
        # inverting gamma 0.5 gives y = x**2 exactly; a degree-7 fit of
        # 10^4 samples must sit on it
        curve = Gamma(gamma=0.5)
        x = np.linspace(0, 1, 10_000)
        y = np.array([invert_curve_analytic(curve, float(v)) for v in x])
        report = fit_polynomial_global(x, y, 7)
        assert report.rms_residual <= 1e-6

    def test_too_few_samples(self):
        with pytest.raises(ValidationError):
            fit_polynomial_global([0.1, 0.2], [0.1, 0.2], 2)

    def test_x_outside_unit_rejected(self):
        with pytest.raises(DomainError):
            fit_polynomial_global([0.0, 0.5, 1.5], [0.0, 0.5, 1.5], 1)

    def test_exclusion_mask(self):
        x = np.linspace(0, 1, 40)
        y = 2.0 * x
        y_corrupt = y.copy()
        y_corrupt[::2] = 5.0
        report = fit_polynomial_global(x, y_corrupt, 1, exclude=np.arange(40) % 2 == 0)
        np.testing.assert_allclose(report.coeffs, [0.0, 2.0], atol=1e-10)
        assert report.sample_count == 20

    def test_recovery_property_across_degrees(self, rng):
        for degree in range(1, 8):
            coeffs = rng.uniform(-1, 1, degree + 1)
            x = rng.random(4 * (degree + 1))
            y = powersum(coeffs, x)
            report = fit_polynomial_global(x, y, degree)
            assert np.abs(report.coeffs - coeffs).max() <= 1e-7


class TestDeriveGlobalCurve:
    def test_round_trip_through_constant_maps(self, rng):
        coeffs = [0.05, 0.7, 0.25]
        L = display(rng.random((8, 8, 3)).astype(np.float32))
        values, _ = invert_degradation(L, SaturationMask.empty(8, 8))
        H_hat, _ = apply_coefficient_maps(constant_maps(coeffs, 8, 8), values)
        report = derive_global_curve(L, H_hat, degree=2)
        np.testing.assert_allclose(report.coeffs, coeffs, atol=1e-6)

    def test_gamma_half_matches_square(self):
        data = np.tile(
            np.linspace(0, 1, 64, dtype=np.float32).reshape(1, 64, 1), (16, 1, 3)
        )
        H = radiance(data)
        L, mask = degrade(H, Gamma(gamma=0.5), DegradationSpec(quant_bits=0))
        report = derive_global_curve(L, H, degree=7, mask=mask)
        grid = np.linspace(0, 1, 501)
        fitted = powersum(report.coeffs, grid)
        np.testing.assert_allclose(fitted, grid**2, atol=1e-4)

    def test_fully_saturated_mask_rejected(self):
        L = display(np.ones((4, 4, 3), dtype=np.float32))
        H = new_radiance_image(4, 4, 1.0)
        full = SaturationMask(np.ones((4, 4), dtype=bool))
        with pytest.raises(ValidationError):
            derive_global_curve(L, H, degree=1, mask=full)

    def test_dimension_mismatch_rejected(self):
        L = display(np.zeros((2, 2, 3), dtype=np.float32))
        with pytest.raises(ValidationError):
            derive_global_curve(L, new_radiance_image(3, 3, 0.0), degree=1)


class TestInvertCurveAnalytic:
    def test_inverse_property_on_grid(self):
        grid = np.linspace(0, 1, 1024)
        curves = [MuLaw(mu=m) for m in np.geomspace(1, 2e6, 7)]
        curves += [Gamma(gamma=g) for g in (0.2, 0.4, 0.6, 0.8, 1.0)]
        for curve in curves:
            for x in grid:
                x = float(x)
                assert abs(invert_curve_analytic(curve, eval_curve(curve, x)) - x) <= 1e-12

    def test_mu_law_endpoint_exact(self):
        assert invert_curve_analytic(MuLaw(mu=5000.0), 1.0) == 1.0
        assert invert_curve_analytic(MuLaw(mu=5000.0), 0.0) == 0.0

    def test_gamma_scalar_oracle(self):
        assert invert_curve_analytic(Gamma(gamma=0.5), 0.5) == pytest.approx(0.25, abs=1e-15)

    def test_gamma_scale_window(self):
        curve = Gamma(gamma=0.5, b=2.0)
        assert invert_curve_analytic(curve, 1.0) == pytest.approx(0.25, abs=1e-15)

    def test_domain_violations(self):
        with pytest.raises(DomainError):
            invert_curve_analytic(MuLaw(mu=10.0), 1.5)
        with pytest.raises(DomainError):
            invert_curve_analytic(Gamma(gamma=0.5, b=0.5), 0.9)  # v/b > 1

    def test_polynomial_has_no_closed_form(self):
        with pytest.raises(ValidationError):
            invert_curve_analytic(Polynomial(coeffs=(0.0, 1.0)), 0.5)


class TestCheckMonotonic:
    def test_identity_is_monotonic(self):
        result = check_monotonic([0.0, 1.0], 64)
        assert result.is_monotonic and result.first_violation_x is None

    def test_decreasing_flagged_at_first_interval(self):
        result = check_monotonic([0.0, -1.0], 64)
        assert not result.is_monotonic
        assert result.first_violation_x == 0.0

    def test_fitted_gamma_03_inverse_is_monotonic(self):
        x = np.linspace(0, 1, 2000)
        y = x ** (1.0 / 0.3)
        report = fit_polynomial_global(x, y, 7)
        assert check_monotonic(report.coeffs, 4096).is_monotonic

    def test_tiny_dips_tolerated(self):
        # constant polynomial plus a dip smaller than the tolerance
        result = check_monotonic([0.5, -1e-10], 4096)
        assert result.is_monotonic

    def test_bad_sample_count(self):
        with pytest.raises(ValidationError):
            check_monotonic([0.0, 1.0], 1)


class TestSampleCurve:
    def test_identity_three_points(self):
        pairs = sample_curve([0.0, 1.0], 3)
        assert pairs.tolist() == [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]]

    def test_mu_law_endpoints(self):
        pairs = sample_curve(MuLaw(mu=1.0), 2)
        assert pairs.tolist() == [[0.0, 0.0], [1.0, 1.0]]

    def test_gamma_midpoint_oracle(self):
        pairs = sample_curve(Gamma(gamma=0.5), 5)
        assert pairs[2, 0] == 0.5
        assert pairs[2, 1] == pytest.approx(math.sqrt(0.5), abs=1e-15)

    def test_n_below_two_rejected(self):
        with pytest.raises(ValidationError):
            sample_curve([0.0, 1.0], 1)
