"""Tests for the periodic grid, transforms and dealiased products."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkglorenz.errors import ConfigurationError, UsageError
from mkglorenz.grid import ScalarField, VectorField3, make_grid, pointwise_product, transform

from _fields import random_space


class TestMakeGrid:
    def test_wavenumber_table_n8(self):
        grid = make_grid(8)
        assert sorted(grid.mode_index.tolist()) == [-3, -2, -1, 0, 1, 2, 3, 4]
        np.testing.assert_allclose(grid.wavenumbers, grid.mode_index)

    def test_nyquist_never_kept(self):
        grid = make_grid(8)
        assert not grid.dealias_mask[4].any()
        assert grid.derivative_wavenumbers[4] == 0.0

    def test_mask_n16_keeps_five(self):
        grid = make_grid(16)
        kept = sorted(set(grid.mode_index[np.any(grid.dealias_mask, axis=(1, 2))].tolist()))
        assert kept == list(range(-5, 6))

    def test_mask_matches_threshold(self):
        # |xi_j| <= (2/3) pi n / L on every axis, checked on a non-default box
        grid = make_grid(24, L=3.0)
        limit = (2.0 / 3.0) * np.pi * grid.n / grid.L
        keep = np.abs(grid.wavenumbers) <= limit + 1e-12
        expected = keep[:, None, None] & keep[None, :, None] & keep[None, None, :]
        np.testing.assert_array_equal(grid.dealias_mask, expected)

    def test_wavenumbers_scale_with_L(self):
        grid = make_grid(8, L=np.pi)
        np.testing.assert_allclose(grid.wavenumbers, 2 * grid.mode_index)

    @pytest.mark.parametrize("n", [7, 6, 514, 9.5])
    def test_invalid_size(self, n):
        with pytest.raises(ConfigurationError):
            make_grid(n, L=1.0)

    def test_invalid_length(self):
        with pytest.raises(ConfigurationError, match="positive"):
            make_grid(8, L=0.0)

    def test_grid_is_hashable_and_frozen(self):
        grid = make_grid(8)
        assert grid == make_grid(8)
        assert hash(grid) == hash(make_grid(8))
        with pytest.raises(Exception):
            grid.n = 10


class TestTransform:
    def test_constant(self):
        grid = make_grid(8)
        f = ScalarField.from_space(grid, np.ones(grid.shape))
        hat = transform(f, "forward").values
        assert hat[0, 0, 0] == pytest.approx(1.0)
        hat[0, 0, 0] = 0
        assert np.max(np.abs(hat)) < 1e-15

    def test_single_mode(self):
        grid = make_grid(8)
        f = ScalarField.from_space(grid, np.exp(1j * grid.coordinates[0]) * np.ones(grid.shape))
        hat = transform(f, "forward").values
        assert hat[1, 0, 0] == pytest.approx(1.0)
        hat[1, 0, 0] = 0
        assert np.max(np.abs(hat)) < 1e-15

    def test_round_trip(self, rng):
        grid = make_grid(16)
        values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        f = ScalarField.from_space(grid, values)
        back = transform(transform(f, "forward"), "inverse").values
        assert np.linalg.norm(back - values) <= 1e-13 * np.linalg.norm(values)

    def test_parseval(self, rng):
        grid = make_grid(16, L=5.0)
        f = ScalarField.from_space(grid, rng.standard_normal(grid.shape))
        assert f.l2_norm() == pytest.approx(f.to_fourier().l2_norm(), rel=1e-12)

    def test_real_tag(self, rng):
        grid = make_grid(8)
        f = ScalarField.from_space(grid, rng.standard_normal(grid.shape))
        back = transform(transform(f, "forward"), "inverse")
        assert back.real and back.values.dtype == np.float64

    def test_representation_mismatch(self):
        grid = make_grid(8)
        f = ScalarField.zeros(grid)
        with pytest.raises(UsageError):
            transform(f, "inverse")
        with pytest.raises(UsageError):
            transform(f.to_fourier(), "forward")
        with pytest.raises(UsageError):
            transform(f, "sideways")

    def test_wrong_shape(self):
        grid = make_grid(8)
        with pytest.raises(UsageError):
            ScalarField.from_space(grid, np.zeros((8, 8)))


class TestPointwiseProduct:
    def test_identity(self, rng):
        grid = make_grid(16)
        g = ScalarField.from_space(grid, random_space(rng, grid))
        one = ScalarField.from_space(grid, np.ones(grid.shape))
        np.testing.assert_allclose(pointwise_product(one, g).values, g.values, atol=1e-13)

    def test_mode_doubling(self):
        grid = make_grid(8)
        e1 = ScalarField.from_space(grid, grid.mode((1, 0, 0)))
        hat = pointwise_product(e1, e1).hat
        assert hat[2, 0, 0] == pytest.approx(1.0)
        hat[2, 0, 0] = 0
        assert np.max(np.abs(hat)) < 1e-14

    def test_nyquist_annihilated(self):
        grid = make_grid(8)
        ny = ScalarField.from_space(grid, grid.mode((4, 0, 0)).real)
        assert np.max(np.abs(pointwise_product(ny, ny).values)) == 0.0

    def test_output_is_dealiased(self, rng):
        grid = make_grid(16)
        f = ScalarField.from_space(grid, rng.standard_normal(grid.shape))
        g = ScalarField.from_space(grid, rng.standard_normal(grid.shape))
        hat = pointwise_product(f, g).hat
        assert np.max(np.abs(hat[~grid.dealias_mask])) < 1e-15

    def test_matches_padded_oracle(self, rng):
        # Product of mask-supported fields equals the exact product computed
        # on a grid twice as fine, truncated back to the mask.
        grid = make_grid(16)
        fine = make_grid(32)
        f = random_space(rng, grid)
        g = random_space(rng, grid)

        def pad(values):
            hat = np.fft.fftn(values, norm="forward")
            big = np.zeros(fine.shape, dtype=complex)
            idx = grid.mode_index
            big[np.ix_(idx % 32, idx % 32, idx % 32)] = hat
            return np.fft.ifftn(big, norm="forward")

        exact = np.fft.fftn(pad(f) * pad(g), norm="forward")
        idx = grid.mode_index % 32
        oracle = exact[np.ix_(idx, idx, idx)] * grid.dealias_mask
        got = pointwise_product(ScalarField.from_space(grid, f), ScalarField.from_space(grid, g)).hat
        assert np.max(np.abs(got - oracle)) <= 1e-12 * np.max(np.abs(oracle))

    def test_grid_mismatch(self):
        with pytest.raises(UsageError):
            pointwise_product(ScalarField.zeros(make_grid(8)), ScalarField.zeros(make_grid(10)))

    @settings(max_examples=20, deadline=None)
    @given(k=st.tuples(*[st.integers(-2, 2)] * 3), q=st.tuples(*[st.integers(-2, 2)] * 3))
    def test_mode_products_add_wavenumbers(self, k, q):
        grid = make_grid(16)
        f = ScalarField.from_space(grid, grid.mode(k))
        g = ScalarField.from_space(grid, grid.mode(q))
        hat = pointwise_product(f, g).hat
        slot = grid.mode_slot(tuple(a + b for a, b in zip(k, q)))
        assert hat[slot] == pytest.approx(1.0)


class TestVectorField:
    def test_components_share_grid(self):
        with pytest.raises(UsageError):
            VectorField3((ScalarField.zeros(make_grid(8)),) * 2 + (ScalarField.zeros(make_grid(10)),))

    def test_norm(self, rng):
        grid = make_grid(8)
        values = rng.standard_normal((3,) + grid.shape)
        v = VectorField3.from_space(grid, values)
        assert v.l2_norm() == pytest.approx(np.sqrt(np.sum(values**2) * grid.cell_volume))
        assert v.real
