import numpy as np
import pytest

from flowedit.fields import (
    DegenerateField,
    InvalidField,
    Rect,
    RegionTooSmall,
    ScalarField,
    VectorField,
    curl2d,
    divergence,
    gradient,
    normalize_field,
    perpendicular_gradient,
)

from conftest import smooth_scalar, solid_rotation, radial_source


class TestInvariants:
    def test_minimum_size(self):
        with pytest.raises(InvalidField):
            VectorField(np.zeros((3, 8, 2)))
        with pytest.raises(InvalidField):
            ScalarField(np.zeros((8, 3)))

    def test_rejects_non_finite(self):
        data = np.zeros((8, 8, 2))
        data[3, 3, 0] = np.nan
        with pytest.raises(InvalidField):
            VectorField(data)
        data[3, 3, 0] = np.inf
        with pytest.raises(InvalidField):
            VectorField(data)

    def test_rejects_wrong_shape(self):
        with pytest.raises(InvalidField):
            VectorField(np.zeros((8, 8)))
        with pytest.raises(InvalidField):
            VectorField(np.zeros((8, 8, 3)))

    def test_data_is_immutable(self):
        f = VectorField.zeros(8, 8)
        with pytest.raises(ValueError):
            f.data[0, 0, 0] = 1.0

    def test_constructor_copies(self):
        data = np.zeros((8, 8, 2))
        f = VectorField(data)
        data[0, 0, 0] = 5.0
        assert f.data[0, 0, 0] == 0.0

    def test_components_and_dims(self):
        f = VectorField.from_components(np.ones((5, 9)), np.zeros((5, 9)))
        assert (f.width, f.height) == (9, 5)
        assert f.u.shape == (5, 9)
        assert float(f.magnitude().max()) == 1.0


class TestDivergence:
    def test_constant_field_is_divergence_free(self):
        f = VectorField(np.broadcast_to([1.0, 0.0], (8, 8, 2)).copy())
        assert np.all(divergence(f).data == 0.0)

    def test_linear_radial_field(self):
        # f = (x, y): analytic divergence 2, stencil exact on linear data
        X, Y = np.meshgrid(np.arange(16.0), np.arange(16.0))
        f = VectorField.from_components(X, Y)
        assert np.allclose(divergence(f).interior, 2.0, atol=1e-13)

    def test_solid_rotation_divergence_free(self):
        f = solid_rotation(16, 16)
        assert np.all(divergence(f).data == 0.0)


class TestCurl:
    def test_constant_field(self):
        f = VectorField(np.broadcast_to([0.3, -0.7], (8, 8, 2)).copy())
        assert np.all(curl2d(f).data == 0.0)

    def test_solid_rotation_has_vorticity_two(self):
        f = solid_rotation(16, 16)
        assert np.allclose(curl2d(f).data, 2.0, atol=1e-13)

    def test_curl_of_gradient_vanishes_on_interior(self):
        w = h = 32
        X, Y = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
        phi = ScalarField(np.sin(np.pi * X / w) * np.sin(np.pi * Y / h))
        residual = curl2d(gradient(phi)).interior
        assert np.abs(residual).max() <= 1e-12


class TestGradient:
    def test_constant_scalar(self):
        s = ScalarField(np.full((8, 8), 3.5))
        assert np.all(gradient(s).data == 0.0)

    def test_linear_ramp(self):
        X, _ = np.meshgrid(np.arange(12.0), np.arange(8.0))
        g = gradient(ScalarField(X))
        assert np.allclose(g.u, 1.0, atol=1e-14)
        assert np.all(g.v == 0.0)

    def test_bilinear_saddle(self):
        X, Y = np.meshgrid(np.arange(16.0), np.arange(16.0))
        g = gradient(ScalarField(X * Y))
        assert np.allclose(g.u[1:-1, 1:-1], Y[1:-1, 1:-1], atol=1e-12)
        assert np.allclose(g.v[1:-1, 1:-1], X[1:-1, 1:-1], atol=1e-12)


class TestDiscreteIdentities:
    @pytest.mark.parametrize("seed", range(8))
    def test_curl_grad_commutes(self, seed):
        s = ScalarField(smooth_scalar(seed, 24, 20))
        residual = curl2d(gradient(s)).interior
        assert np.abs(residual).max() <= 1e-12

    @pytest.mark.parametrize("seed", range(8))
    def test_div_perp_grad_commutes(self, seed):
        s = ScalarField(smooth_scalar(seed + 50, 20, 24))
        residual = divergence(perpendicular_gradient(s)).interior
        assert np.abs(residual).max() <= 1e-12


class TestNormalize:
    def test_max_norm(self):
        f = VectorField(4.0 * solid_rotation(16, 16).data)
        out = normalize_field(f, "max-norm")
        assert abs(float(out.magnitude().max()) - 1.0) <= 1e-15

    def test_zscore_moments(self):
        rng = np.random.default_rng(1)
        f = VectorField(rng.normal(2.0, 3.0, size=(16, 16, 2)))
        out = normalize_field(f, "z-score")
        assert np.abs(out.data.mean(axis=(0, 1))).max() <= 1e-12
        assert np.abs(out.data.std(axis=(0, 1)) - 1.0).max() <= 1e-12

    def test_zscore_idempotent(self):
        rng = np.random.default_rng(2)
        f = VectorField(rng.normal(-1.0, 0.5, size=(12, 12, 2)))
        once = normalize_field(f, "z-score")
        twice = normalize_field(once, "z-score")
        assert np.abs(twice.data - once.data).max() <= 1e-9

    def test_zero_field_degenerate(self):
        with pytest.raises(DegenerateField):
            normalize_field(VectorField.zeros(8, 8), "max-norm")

    def test_constant_channel_degenerate_for_zscore(self):
        f = VectorField(np.broadcast_to([1.0, 2.0], (8, 8, 2)).copy())
        with pytest.raises(DegenerateField):
            normalize_field(f, "z-score")

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            normalize_field(VectorField.zeros(8, 8), "l2")


class TestRect:
    def test_valid(self):
        Rect(0, 0, 8, 8).validate(16, 16)

    def test_out_of_bounds(self):
        with pytest.raises(InvalidField):
            Rect(0, 0, 17, 8).validate(16, 16)
        with pytest.raises(InvalidField):
            Rect(-1, 0, 8, 8).validate(16, 16)
        with pytest.raises(InvalidField):
            Rect(8, 0, 4, 8).validate(16, 16)

    def test_too_small(self):
        with pytest.raises(RegionTooSmall):
            Rect(0, 0, 3, 8).validate(16, 16)
        with pytest.raises(RegionTooSmall):
            Rect(0, 0, 8, 3).validate(16, 16)

    def test_whole(self):
        assert Rect(0, 0, 16, 12).is_whole(16, 12)
        assert not Rect(0, 0, 8, 12).is_whole(16, 12)


def test_radial_source_is_curl_free_everywhere():
    f = radial_source(16, 16)
    assert np.all(curl2d(f).data == 0.0)
