import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from scipy import ndimage

import vesselseg as vs
from vesselseg.preprocess import _opening

from conftest import brute_white_top_hat

unit_grids = hnp.arrays(
    np.float64,
    hnp.array_shapes(min_dims=2, max_dims=2, min_side=13, max_side=24),
    elements=st.floats(0.0, 1.0, allow_nan=False),
)


def disc_mask(size: int, radius_frac: float = 0.4) -> np.ndarray:
    yy, xx = np.mgrid[:size, :size]
    c = (size - 1) / 2
    return (yy - c) ** 2 + (xx - c) ** 2 <= (radius_frac * size) ** 2


class TestInvertedGreen:
    def test_pure_green_inside_mask(self):
        img = vs.RgbImage(2, 1, red=[[0.0, 0.0]], green=[[1.0, 0.0]], blue=[[0.0, 0.0]])
        mask = vs.FovMask(2, 1, [[True, True]])
        out = vs.extract_inverted_green(img, mask)
        assert out.data[0, 0] == 0.0  # pure green -> 0
        assert out.data[0, 1] == 1.0  # black -> 1

    def test_outside_mask_is_zero(self):
        img = vs.RgbImage(2, 1, red=[[0.2, 0.2]], green=[[0.4, 0.4]], blue=[[0.1, 0.1]])
        mask = vs.FovMask(2, 1, [[True, False]])
        out = vs.extract_inverted_green(img, mask)
        assert out.data[0, 1] == 0.0

    def test_dimension_mismatch(self):
        img = vs.RgbImage.from_array(np.zeros((4, 4, 3)))
        with pytest.raises(ValueError, match="dimensions"):
            vs.extract_inverted_green(img, vs.FovMask.full(5, 4))


class TestDiscSe:
    def test_membership_matches_brute_force(self):
        # oracle: direct membership recount per pixel
        for d in (3, 5, 7, 9, 11, 13, 15):
            se = vs.disc_se(d)
            r = d // 2
            count = sum(
                1
                for y in range(-r, r + 1)
                for x in range(-r, r + 1)
                if x * x + y * y <= (d / 2.0) ** 2
            )
            assert se.data.sum() == count

    def test_diameter_11_has_97_members(self):
        assert vs.disc_se(11).data.sum() == 97  # frozen from the brute-force count

    def test_rotational_symmetry(self):
        for d in (3, 7, 11):
            se = vs.disc_se(d).data
            assert np.array_equal(se, se[::-1, ::-1])

    @pytest.mark.parametrize("d", [2, 4, 1, -3])
    def test_rejects_bad_diameters(self, d):
        with pytest.raises(ValueError, match="diameter"):
            vs.disc_se(d)


class TestWhiteTopHat:
    def test_constant_image_maps_to_zero(self):
        img = vs.GrayImage.from_array(np.full((32, 32), 0.42))
        out = vs.white_top_hat(img, vs.disc_se(11))
        assert np.array_equal(out.data, np.zeros((32, 32)))

    def test_thin_ridge_retained_at_full_amplitude(self):
        arr = np.zeros((40, 40))
        arr[:, 20] = 0.8
        out = vs.white_top_hat(vs.GrayImage.from_array(arr), vs.disc_se(11))
        assert np.array_equal(out.data, arr)

    def test_wide_disc_interior_suppressed(self):
        arr = np.where(disc_mask(64, radius_frac=21 / 128), 0.9, 0.0)
        out = vs.white_top_hat(vs.GrayImage.from_array(arr), vs.disc_se(11))
        assert np.abs(out.data[28:37, 28:37]).max() == 0.0
        # and the whole field agrees with the brute-force oracle
        ref = brute_white_top_hat(arr, vs.disc_se(11).data)
        assert np.array_equal(out.data, ref)

    @given(unit_grids)
    @settings(max_examples=25, deadline=None)
    def test_anti_extensive(self, arr):
        out = vs.white_top_hat(vs.GrayImage.from_array(arr), vs.disc_se(5))
        assert (out.data >= 0).all()
        assert (out.data <= arr + 1e-15).all()

    @given(unit_grids)
    @settings(max_examples=25, deadline=None)
    def test_opening_idempotent(self, arr):
        se = vs.disc_se(5).data
        once = _opening(arr, se)
        assert np.array_equal(_opening(once, se), once)

    def test_se_larger_than_image_rejected(self):
        with pytest.raises(ValueError, match="larger"):
            vs.white_top_hat(vs.GrayImage.from_array(np.zeros((8, 8))), vs.disc_se(11))


class TestRadialPad:
    def test_constant_disc_pads_constant_ring(self):
        fov = disc_mask(64)
        img = vs.GrayImage.from_array(np.where(fov, 0.6, 0.0))
        out = vs.radial_pad(img, vs.FovMask.from_array(fov), 10)
        ring = ~fov & (ndimage.distance_transform_edt(~fov) <= 10)
        assert np.array_equal(np.unique(out.data[ring]), [0.6])

    def test_adjacent_exterior_pixel_copies_boundary(self):
        # half-plane FOV: the pixel just outside the straight boundary must
        # take the adjacent interior pixel's value (ray length ~ 0)
        fov = np.zeros((16, 16), dtype=bool)
        fov[:, :8] = True
        rng = np.random.default_rng(5)
        arr = np.where(fov, rng.random((16, 16)), 0.0)
        out = vs.radial_pad(vs.GrayImage.from_array(arr), vs.FovMask.from_array(fov), 3)
        assert np.allclose(out.data[:, 8], arr[:, 7])

    def test_interior_never_modified(self):
        rng = np.random.default_rng(6)
        fov = disc_mask(48)
        arr = np.where(fov, rng.random((48, 48)), 0.0)
        out = vs.radial_pad(vs.GrayImage.from_array(arr), vs.FovMask.from_array(fov), 12)
        assert np.array_equal(out.data[fov], arr[fov])

    def test_far_exterior_untouched(self):
        fov = disc_mask(64, radius_frac=0.25)
        img = vs.GrayImage.from_array(np.where(fov, 0.5, 0.0))
        out = vs.radial_pad(img, vs.FovMask.from_array(fov), 4)
        far = ndimage.distance_transform_edt(~fov) > 4.0
        assert np.array_equal(out.data[far], np.zeros(far.sum()))

    def test_empty_mask_rejected(self):
        img = vs.GrayImage.from_array(np.zeros((8, 8)))
        with pytest.raises(ValueError, match="empty"):
            vs.radial_pad(img, vs.FovMask.from_array(np.zeros((8, 8), dtype=bool)), 4)

    def test_padding_suppresses_rim_response(self, default_bank):
        # textured disc: without padding the filter bank rings at the FOV rim
        rng = np.random.default_rng(7)
        size = 128
        fov = disc_mask(size)
        tex = np.clip(0.5 + ndimage.gaussian_filter(rng.normal(0, 1, (size, size)), 4) * 0.3, 0, 1)
        tex[~fov] = 0.0
        img = vs.GrayImage.from_array(tex)
        mask = vs.FovMask.from_array(fov)
        padded = vs.radial_pad(img, mask, 20)
        rim = fov & (ndimage.distance_transform_edt(fov) <= 5)
        h_raw = vs.scale_response(img, default_bank, 2).H.data
        h_pad = vs.scale_response(padded, default_bank, 2).H.data
        assert np.abs(h_pad[rim]).mean() < np.abs(h_raw[rim]).mean()


class TestClahe:
    def test_uniform_tiles_map_to_identity_within_one_bin(self):
        rng = np.random.default_rng(8)
        size, tile, bins = 128, 16, 256
        levels = np.linspace(0, 1, bins, endpoint=False)
        arr = np.empty((size, size))
        for i in range(0, size, tile):
            for j in range(0, size, tile):
                arr[i : i + tile, j : j + tile] = rng.permutation(levels).reshape(tile, tile)
        out = vs.clahe(vs.GrayImage.from_array(arr), vs.ClaheParams())
        assert np.abs(out.data - arr).max() <= 1.0 / bins + 1e-12

    def test_constant_image_stays_constant(self):
        out = vs.clahe(vs.GrayImage.from_array(np.full((64, 64), 0.37)), vs.ClaheParams())
        assert np.unique(out.data).size == 1

    def test_low_contrast_phantom_gains_contrast(self):
        x = np.arange(128)
        ph = 0.4 + 0.1 * np.exp(-((x[None, :] - 64) ** 2) / 32.0) * (
            0.5 + 0.5 * np.sin(x[:, None] / 9.0)
        )
        ph = np.clip(ph, 0.4, 0.5)
        out = vs.clahe(vs.GrayImage.from_array(ph), vs.ClaheParams())
        assert out.data.std() > ph.std()

    def test_equalization_mapping_monotone(self):
        # identical tiles make every tile mapping identical, so the output is
        # exactly mapping(bin(v)) and must be monotone in the input value
        rng = np.random.default_rng(9)
        tile = rng.random((16, 16))
        arr = np.tile(tile, (8, 8))
        out = vs.clahe(vs.GrayImage.from_array(arr), vs.ClaheParams()).data
        order = np.argsort(arr.ravel(), kind="stable")
        assert (np.diff(out.ravel()[order]) >= -1e-12).all()

    def test_output_in_unit_range(self):
        rng = np.random.default_rng(10)
        out = vs.clahe(vs.GrayImage.from_array(rng.random((100, 90))), vs.ClaheParams())
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0

    def test_tile_grid_larger_than_image_rejected(self):
        with pytest.raises(ValueError, match="tile grid"):
            vs.clahe(vs.GrayImage.from_array(np.zeros((4, 4))), vs.ClaheParams(tile_grid=(8, 8)))

    def test_masked_histograms_ignore_exterior(self):
        # exterior zeros must not drag the in-mask mapping down
        fov = disc_mask(64)
        rng = np.random.default_rng(11)
        arr = np.where(fov, 0.5 + 0.3 * rng.random((64, 64)), 0.0)
        img = vs.GrayImage.from_array(arr)
        masked = vs.clahe(img, vs.ClaheParams(tile_grid=(4, 4)), vs.FovMask.from_array(fov))
        unmasked = vs.clahe(img, vs.ClaheParams(tile_grid=(4, 4)))
        assert not np.allclose(masked.data[fov], unmasked.data[fov])
