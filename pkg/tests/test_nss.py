"""Whitening, local normalization, and the distribution fits.

The fit tests lean on sampling oracles: draw a large seeded sample
from a known distribution, fit it, and require the estimate to land
inside a stated window around the true parameter.
"""

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from panoqa import (DegenerateDataError, MscnConfig, Raster, ValidationError,
                    ZcaConfig, downsample_half, extract_naturalness, fit_aggd,
                    fit_ggd, gaussian_window, mscn, paired_products,
                    zca_kernel, zca_whiten)


def noise_image(seed, shape=(256, 256), kind="uniform"):
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return rng.uniform(0, 255, shape)
    return rng.normal(128, 40, shape)


def sample_aggd(n, tau, sigma_l, sigma_r, seed):
    """Rejection-sample the asymmetric density with a uniform envelope."""
    scale_l = sigma_l * np.sqrt(gamma_fn(1 / tau) / gamma_fn(3 / tau))
    scale_r = sigma_r * np.sqrt(gamma_fn(1 / tau) / gamma_fn(3 / tau))
    rng = np.random.default_rng(seed)
    out = np.empty(0)
    while out.size < n:
        x = rng.uniform(-6 * scale_l, 6 * scale_r, 4 * n)
        scale = np.where(x < 0, scale_l, scale_r)
        keep = rng.uniform(0, 1, x.size) <= np.exp(-(np.abs(x) / scale) ** tau)
        out = np.concatenate([out, x[keep]])
    return out[:n]


class TestZca:
    def test_kernel_is_zero_phase(self):
        img = Raster(noise_image(0))
        kernel = zca_kernel(img, ZcaConfig())
        assert kernel.shape == (5, 5)
        np.testing.assert_allclose(kernel, kernel[::-1, ::-1], atol=1e-9)

    def test_kernel_zero_phase_on_structured_image(self):
        yy, xx = np.mgrid[0:64, 0:64]
        img = Raster(128 + 80 * np.sin(xx / 3.0) * np.cos(yy / 5.0)
                     + noise_image(1, (64, 64)) * 0.1)
        kernel = zca_kernel(img, ZcaConfig())
        np.testing.assert_allclose(kernel, kernel[::-1, ::-1], atol=1e-9)

    @staticmethod
    def _lag1(a):
        c = a - a.mean()
        return np.corrcoef(c[:, :-1].ravel(), c[:, 1:].ravel())[0, 1]

    def test_white_noise_stays_decorrelated(self):
        # the kernel is learned from ~2600 patches, so its taps carry a
        # few percent of sampling noise; the output correlation must
        # stay within that scale
        img = noise_image(2)
        out = zca_whiten(Raster(img), ZcaConfig()).data
        assert out.shape == img.shape
        assert abs(self._lag1(out)) <= 0.05

    def test_correlated_noise_is_decorrelated(self):
        from scipy import ndimage
        rng = np.random.default_rng(26)
        img = ndimage.gaussian_filter(rng.normal(0, 40, (256, 256)), 1.0) + 128
        before = self._lag1(img)
        after = self._lag1(zca_whiten(Raster(img), ZcaConfig()).data)
        assert abs(before) > 0.5
        assert abs(after) < 0.25 * abs(before)

    def test_constant_image_stays_constant(self):
        out = zca_whiten(Raster(np.full((32, 32), 77.0)), ZcaConfig()).data
        assert np.ptp(out) <= 1e-9

    def test_image_smaller_than_patch_rejected(self):
        with pytest.raises(ValidationError):
            zca_whiten(Raster(np.zeros((4, 4))), ZcaConfig())

    def test_patch_size_must_be_odd(self):
        with pytest.raises(ValidationError):
            ZcaConfig(patch_size=4)


class TestMscn:
    def test_window_is_normalized_and_symmetric(self):
        w = gaussian_window(radius=3, sigma=7.0 / 6.0)
        assert w.shape == (7, 7)
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(w, w.T, atol=1e-15)
        np.testing.assert_allclose(w, w[::-1, ::-1], atol=1e-15)

    def test_constant_image_maps_to_zero(self):
        out = mscn(Raster(np.full((16, 16), 200.0)), MscnConfig()).data
        np.testing.assert_array_equal(out, np.zeros((16, 16)))

    def test_gaussian_noise_becomes_near_gaussian(self):
        # Normalization runs on the whitened image in the full pipeline, so
        # the kurtosis oracle is measured on that path.  Normalizing the raw
        # noise directly gives a lower value (~2.34): each pixel sits inside
        # its own 7x7 estimation window, which caps studentized extremes.
        whitened = zca_whiten(Raster(noise_image(3, kind="gauss")), ZcaConfig())
        flat = mscn(whitened, MscnConfig()).data.ravel()
        kurtosis = np.mean((flat - flat.mean()) ** 4) / np.var(flat) ** 2
        assert 2.5 <= kurtosis <= 3.5

    def test_shift_invariance_exact(self):
        img = noise_image(4, (64, 64))
        base = mscn(Raster(img), MscnConfig()).data
        shifted = mscn(Raster(img + 50.0), MscnConfig()).data
        assert np.abs(shifted - base).max() <= 1e-9

    def test_positive_scale_near_invariance(self):
        img = noise_image(5)
        base = mscn(Raster(img), MscnConfig()).data
        for a in (0.5, 2.0):
            other = mscn(Raster(a * img), MscnConfig()).data
            assert np.abs(other - base).max() <= 0.05

    def test_image_smaller_than_window_rejected(self):
        with pytest.raises(ValidationError):
            mscn(Raster(np.zeros((5, 5))), MscnConfig())


class TestPairedProducts:
    def test_orientations_and_shapes(self):
        m = np.arange(12.0).reshape(3, 4)
        h, v, d1, d2 = paired_products(m)
        assert h.shape == (3, 3) and v.shape == (2, 4)
        assert d1.shape == (2, 3) and d2.shape == (2, 3)
        assert h[0, 0] == m[0, 0] * m[0, 1]
        assert v[0, 0] == m[0, 0] * m[1, 0]
        assert d1[0, 0] == m[0, 0] * m[1, 1]
        assert d2[0, 0] == m[0, 1] * m[1, 0]


class TestGgdFit:
    def test_gaussian_recovery(self):
        rng = np.random.default_rng(10)
        fit = fit_ggd(rng.normal(0.0, 1.0, 1_000_000))
        assert 1.94 <= fit.shape <= 2.06
        assert 0.97 <= fit.variance <= 1.03

    def test_laplace_recovery(self):
        rng = np.random.default_rng(11)
        fit = fit_ggd(rng.laplace(0.0, 1.0, 1_000_000))
        assert 0.95 <= fit.shape <= 1.05

    def test_alternating_pair_second_moment(self):
        c = 3.5
        samples = np.tile([-c, c], 100)
        assert fit_ggd(samples).variance == pytest.approx(c * c, abs=1e-12)

    def test_shape_stays_on_grid(self):
        rng = np.random.default_rng(12)
        fit = fit_ggd(rng.normal(0, 1, 5000) ** 5)
        assert 0.2 <= fit.shape <= 10.0

    def test_scaling_property(self):
        rng = np.random.default_rng(13)
        samples = rng.laplace(0, 2.0, 200_000)
        base = fit_ggd(samples)
        scaled = fit_ggd(3.0 * samples)
        assert scaled.shape == pytest.approx(base.shape, abs=0.01)
        assert scaled.variance == pytest.approx(9.0 * base.variance, rel=1e-9)

    def test_all_zero_is_degenerate(self):
        with pytest.raises(DegenerateDataError):
            fit_ggd(np.zeros(500))

    def test_too_few_samples(self):
        with pytest.raises(ValidationError):
            fit_ggd(np.ones(99))


class TestAggdFit:
    def test_symmetric_samples_have_zero_mean_term(self):
        rng = np.random.default_rng(14)
        half = rng.normal(0, 1, 5000)
        fit = fit_aggd(np.concatenate([half, -half]))
        assert abs(fit.mean) <= 1e-9
        assert abs(fit.left_variance - fit.right_variance) <= 1e-9

    def test_rejection_sampled_recovery(self):
        samples = sample_aggd(1_000_000, tau=2.0, sigma_l=1.0, sigma_r=2.0, seed=15)
        fit = fit_aggd(samples)
        assert abs(fit.shape - 2.0) <= 0.1
        assert abs(fit.left_variance - 1.0) <= 0.05
        assert abs(fit.right_variance - 4.0) <= 0.20
        assert fit.mean > 0

    def test_gaussian_samples_balance_sides(self):
        rng = np.random.default_rng(16)
        fit = fit_aggd(rng.normal(0, 1, 1_000_000))
        assert abs(fit.left_variance - fit.right_variance) \
            <= 0.03 * max(fit.left_variance, fit.right_variance)

    def test_mirror_negates_mean_and_swaps_sides(self):
        samples = sample_aggd(50_000, tau=1.5, sigma_l=0.7, sigma_r=1.8, seed=17)
        fit = fit_aggd(samples)
        mirrored = fit_aggd(-samples)
        assert mirrored.mean == pytest.approx(-fit.mean, abs=1e-9)
        assert mirrored.left_variance == pytest.approx(fit.right_variance, abs=1e-9)
        assert mirrored.right_variance == pytest.approx(fit.left_variance, abs=1e-9)
        assert mirrored.shape == pytest.approx(fit.shape, abs=1e-12)

    def test_mean_sign_follows_heavier_side(self):
        wide_right = sample_aggd(20_000, 2.0, 0.5, 2.0, seed=18)
        assert fit_aggd(wide_right).mean > 0
        wide_left = sample_aggd(20_000, 2.0, 2.0, 0.5, seed=19)
        assert fit_aggd(wide_left).mean < 0

    def test_one_sided_samples_rejected(self):
        with pytest.raises(ValidationError):
            fit_aggd(np.abs(np.random.default_rng(20).normal(0, 1, 500)) + 0.1)


class TestExtractNaturalness:
    def test_vector_length_and_finiteness(self):
        vec = extract_naturalness(Raster(noise_image(21, (128, 128))))
        assert vec.shape == (36,)
        assert np.all(np.isfinite(vec))

    def test_constant_image_is_degenerate(self):
        with pytest.raises(DegenerateDataError):
            extract_naturalness(Raster(np.full((64, 64), 128.0)))

    def test_noise_shape_near_gaussian_at_scale_one(self):
        # Normalized noise coefficients are close to Gaussian but slightly
        # short-tailed (kurtosis ~2.6 rather than 3, see the normalization
        # tests above), so the fitted shape lands a little above 2.  Measured
        # range across seeds is 2.39..2.53 at both scales.
        vec = extract_naturalness(Raster(noise_image(22, kind="gauss")))
        assert 2.2 <= vec[0] <= 2.8
        assert 2.2 <= vec[18] <= 2.8

    def test_deterministic(self):
        img = Raster(noise_image(23, (96, 96)))
        a = extract_naturalness(img)
        b = extract_naturalness(img)
        np.testing.assert_array_equal(a, b)

    def test_layout_scale_major_ggd_then_aggd(self):
        img = Raster(noise_image(24, (96, 96)))
        zca = ZcaConfig()
        cfg = MscnConfig()
        vec = extract_naturalness(img, zca, cfg)

        coeffs = mscn(zca_whiten(img, zca), cfg).data
        g = fit_ggd(coeffs)
        assert vec[0] == g.shape and vec[1] == g.variance
        first = fit_aggd(paired_products(coeffs)[0])
        np.testing.assert_array_equal(
            vec[2:6], [first.mean, first.shape,
                       first.left_variance, first.right_variance])

        half = downsample_half(img)
        coeffs2 = mscn(zca_whiten(half, zca), cfg).data
        g2 = fit_ggd(coeffs2)
        assert vec[18] == g2.shape and vec[19] == g2.variance

    def test_whitening_can_be_disabled(self):
        img = Raster(noise_image(25, (96, 96)))
        with_zca = extract_naturalness(img)
        without = extract_naturalness(img, None)
        assert without.shape == (36,)
        assert not np.array_equal(with_zca, without)


class TestFitInvariants:
    def test_fitted_parameters_stay_on_contract(self):
        rng = np.random.default_rng(30)
        for _ in range(5):
            raw = rng.normal(0, rng.uniform(0.5, 3.0), 2000)
            skew = np.where(raw < 0, raw * rng.uniform(0.4, 2.5), raw)
            g = fit_ggd(skew)
            assert 0.2 <= g.shape <= 10.0
            assert np.isfinite(g.variance) and g.variance > 0
            a = fit_aggd(skew)
            assert 0.2 <= a.shape <= 10.0
            assert all(np.isfinite(x) for x in
                       (a.mean, a.shape, a.left_variance, a.right_variance))
            assert np.sign(a.mean) == np.sign(
                np.sqrt(a.right_variance) - np.sqrt(a.left_variance))
