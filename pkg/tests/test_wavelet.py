"""Haar analysis/synthesis and the subband entropy features."""

import numpy as np
import pytest

from panoqa import (Raster, ValidationError, extract_multifrequency,
                    haar_decompose, haar_reconstruct, subband_entropy)

from synth import gaussian_blur, rect_scene


def random_raster(seed, h, w, lo=0.0, hi=255.0):
    rng = np.random.default_rng(seed)
    return Raster(rng.uniform(lo, hi, (h, w)))


class TestDecompose:
    def test_2x2_closed_form(self):
        a, b, c, d = 9.0, 5.0, 3.0, 1.0
        bands = haar_decompose(Raster(np.array([[a, b], [c, d]])))[0]
        assert bands.ll.data[0, 0] == (a + b + c + d) / 2
        assert bands.hl.data[0, 0] == (a - b + c - d) / 2
        assert bands.lh.data[0, 0] == (a + b - c - d) / 2
        assert bands.hh.data[0, 0] == (a - b - c + d) / 2

    def test_constant_input(self):
        bands = haar_decompose(Raster(np.full((4, 4), 100.0)))[0]
        assert np.all(bands.ll.data == 200.0)
        for band in (bands.hl, bands.lh, bands.hh):
            assert np.all(band.data == 0.0)

    def test_parseval_energy_equality(self):
        img = random_raster(1, 8, 8)
        bands = haar_decompose(img)[0]
        total = sum(np.sum(b.data ** 2) for b in bands.bands())
        original = np.sum(img.data ** 2)
        assert abs(total - original) <= 1e-9 * original

    def test_subband_dims_halve(self):
        bands = haar_decompose(random_raster(2, 32, 48))[0]
        for band in bands.bands():
            assert band.data.shape == (16, 24)

    def test_odd_trailing_edge_dropped(self):
        img = random_raster(3, 5, 7)
        cropped = Raster(img.data[:4, :6])
        full = haar_decompose(img)[0]
        crop = haar_decompose(cropped)[0]
        for got, want in zip(full.bands(), crop.bands()):
            np.testing.assert_array_equal(got.data, want.data)

    def test_levels_recurse_on_ll(self):
        img = random_raster(4, 16, 16)
        two = haar_decompose(img, levels=2)
        again = haar_decompose(two[0].ll)[0]
        for got, want in zip(two[1].bands(), again.bands()):
            np.testing.assert_array_equal(got.data, want.data)
        assert [s.level for s in two] == [1, 2]

    def test_depth_out_of_range(self):
        img = random_raster(5, 16, 16)
        for levels in (0, 4, -1):
            with pytest.raises(ValidationError):
                haar_decompose(img, levels)

    def test_image_too_small_for_depth(self):
        with pytest.raises(ValidationError):
            haar_decompose(random_raster(6, 4, 4), levels=3)


class TestReconstruct:
    def test_round_trip_identity(self):
        for seed, (h, w) in enumerate([(2, 2), (8, 8), (16, 30), (64, 128)]):
            img = random_raster(seed, h, w)
            back = haar_reconstruct(haar_decompose(img)[0])
            assert np.abs(back.data - img.data).max() <= 1e-9

    def test_zero_subbands_give_zero_raster(self):
        bands = haar_decompose(Raster(np.zeros((4, 4))))[0]
        assert np.all(haar_reconstruct(bands).data == 0.0)

    def test_ll_only_constant(self):
        from panoqa import SubbandSet
        const = haar_decompose(Raster(np.full((6, 6), 42.0)))[0]
        back = haar_reconstruct(SubbandSet(
            ll=const.ll, hl=Raster(np.zeros((3, 3))),
            lh=Raster(np.zeros((3, 3))), hh=Raster(np.zeros((3, 3))),
            level=1))
        assert np.abs(back.data - 42.0).max() <= 1e-9

    def test_mismatched_dims_rejected(self):
        from panoqa import SubbandSet
        with pytest.raises(ValidationError):
            SubbandSet(ll=Raster(np.zeros((2, 2))), hl=Raster(np.zeros((2, 3))),
                       lh=Raster(np.zeros((2, 2))), hh=Raster(np.zeros((2, 2))),
                       level=1)


class TestSubbandEntropy:
    def test_constant_band_zero_bits(self):
        assert subband_entropy(Raster(np.full((4, 4), 3.3))) == 0.0

    def test_uniform_256_bins_is_8_bits(self):
        values = np.tile(np.arange(256.0), 4).reshape(32, 32)
        assert subband_entropy(Raster(values)) == pytest.approx(8.0, abs=1e-12)

    def test_hand_computed_four_values(self):
        band = Raster(np.array([[0.0, 0.0], [127.5, 255.0]]))
        assert subband_entropy(band) == pytest.approx(1.5, abs=1e-12)

    def test_bounded_zero_to_eight(self):
        for seed in range(10):
            img = random_raster(seed, 16, 16, lo=-900.0, hi=900.0)
            assert 0.0 <= subband_entropy(img) <= 8.0

    def test_affine_rescale_invariance(self):
        band = random_raster(7, 12, 12, lo=-50.0, hi=50.0)
        base = subband_entropy(band)
        for a, b in [(2.0, 0.0), (0.3, 100.0), (7.5, -40.0)]:
            scaled = Raster(a * band.data + b)
            assert subband_entropy(scaled) == pytest.approx(base, abs=1e-12)


class TestMultifrequency:
    def test_constant_image_all_zero(self):
        np.testing.assert_array_equal(
            extract_multifrequency(Raster(np.full((8, 8), 50.0))), np.zeros(4))

    def test_vector_length_per_level(self):
        img = random_raster(8, 32, 32)
        for levels in (1, 2, 3):
            assert extract_multifrequency(img, levels).shape == (4 * levels,)

    def test_values_in_entropy_range(self):
        vec = extract_multifrequency(random_raster(9, 64, 64), levels=3)
        assert np.all(vec >= 0.0) and np.all(vec <= 8.0)

    def test_blur_lowers_diagonal_detail_entropy(self):
        img = rect_scene(seed=17)
        sharp = extract_multifrequency(Raster(img))
        soft = extract_multifrequency(Raster(gaussian_blur(img, 9 / 6.0)))
        assert soft[3] < sharp[3]

    def test_level_major_band_order(self):
        img = random_raster(10, 16, 16)
        vec = extract_multifrequency(img, levels=2)
        sets = haar_decompose(img, levels=2)
        expected = [subband_entropy(b) for s in sets for b in s.bands()]
        np.testing.assert_array_equal(vec, expected)
