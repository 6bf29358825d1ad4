import numpy as np
import pytest

from flowedit.fields import (
    InvalidField,
    Rect,
    RegionTooSmall,
    ScalarField,
    VectorField,
    curl2d,
    divergence,
    gradient,
    interior_rms,
)
from flowedit.hhd import (
    ComponentMask,
    EditRequest,
    apply_edit_sequence,
    curl_free_part,
    decompose,
    divergence_free_part,
    edit_region,
    format_edit_script,
    parse_edit_script,
)
from flowedit.metrics import cme, cs

from conftest import radial_source, rough_field, smooth_field, solid_rotation

KEEP_DIV = ComponentMask(keep_div_free=True)
KEEP_CURL = ComponentMask(keep_curl_free=True)
KEEP_BOTH = ComponentMask(keep_curl_free=True, keep_div_free=True)
KEEP_ALL = ComponentMask(True, True, True)


class TestDivergenceFreePart:
    def test_solid_rotation_recovered_in_center(self):
        # zero-Dirichlet boundary mismatch concentrates near the edges, so
        # compare on the centered half-domain; bound frozen from measurement
        # (observed 0.090 at 64x64)
        n = 64
        f = solid_rotation(n, n)
        out, psi, report = divergence_free_part(f)
        assert report.converged
        q = slice(n // 4, 3 * n // 4)
        err = np.sqrt(np.mean((out.data[q, q] - f.data[q, q]) ** 2))
        ref = np.sqrt(np.mean(f.data[q, q] ** 2))
        assert err / ref <= 0.12

    def test_pure_gradient_yields_nothing(self):
        # grad(x*y) is affine, so its curl is exactly zero on every cell and
        # the stream function solve never leaves zero
        X, Y = np.meshgrid(np.arange(32.0), np.arange(32.0))
        f = gradient(ScalarField(X * Y))
        out, psi, _ = divergence_free_part(f)
        scale = np.abs(f.data).max()
        assert np.abs(out.data).max() <= 1e-8 * scale
        assert np.all(psi.data == 0.0)

    def test_zero_field(self):
        out, _, report = divergence_free_part(VectorField.zeros(8, 8))
        assert np.all(out.data == 0.0)
        assert report.iterations == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_interior_divergence_vanishes(self, seed):
        f = rough_field(seed, 32, 32)
        out, _, _ = divergence_free_part(f)
        assert interior_rms(divergence(out)) <= 1e-10

    def test_linearity(self):
        f = smooth_field(31, 32, 32)
        g = smooth_field(32, 32, 32)
        fa, _, _ = divergence_free_part(f)
        ga, _, _ = divergence_free_part(g)
        combo = VectorField(2.0 * f.data - 0.5 * g.data)
        ca, _, _ = divergence_free_part(combo)
        expect = 2.0 * fa.data - 0.5 * ga.data
        assert np.sqrt(np.mean((ca.data - expect) ** 2)) <= 1e-8


class TestCurlFreePart:
    def test_radial_source_interior_curl(self):
        f = radial_source(32, 32)
        out, _, _ = curl_free_part(f)
        assert interior_rms(curl2d(out)) <= 1e-10

    def test_solid_rotation_yields_nothing(self):
        # (-y, x) has exactly zero divergence on every cell
        f = solid_rotation(32, 32)
        out, phi, _ = curl_free_part(f)
        scale = np.abs(f.data).max()
        assert np.abs(out.data).max() <= 1e-8 * scale
        assert np.all(phi.data == 0.0)

    def test_zero_field(self):
        out, _, _ = curl_free_part(VectorField.zeros(8, 8))
        assert np.all(out.data == 0.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_interior_curl_vanishes(self, seed):
        f = rough_field(seed + 10, 32, 32)
        out, _, _ = curl_free_part(f)
        assert interior_rms(curl2d(out)) <= 1e-10


class TestDecompose:
    def test_constant_field_is_all_harmonic(self):
        f = VectorField(np.broadcast_to([1.0, 0.0], (16, 16, 2)).copy())
        result = decompose(f)
        assert np.abs(result.div_free.data).max() == 0.0
        assert np.abs(result.curl_free.data).max() == 0.0
        assert np.array_equal(result.harmonic.data, f.data)

    @pytest.mark.parametrize("seed,size", [(s, n) for s in range(4) for n in (16, 64)])
    def test_exact_recomposition(self, seed, size):
        f = smooth_field(seed, size, size) if seed % 2 else rough_field(seed, size, size)
        r = decompose(f)
        total = r.div_free.data + r.curl_free.data + r.harmonic.data
        assert np.abs(total - f.data).max() <= 1e-12

    def test_physical_property_guarantee(self):
        f = smooth_field(77, 48, 48)
        r = decompose(f)
        assert interior_rms(divergence(r.div_free)) <= 1e-10
        assert interior_rms(curl2d(r.curl_free)) <= 1e-10

    def test_reports_attached(self):
        r = decompose(smooth_field(5, 16, 16))
        assert r.div_free_report.converged
        assert r.curl_free_report.converged


class TestEditRegion:
    def test_identity_edit_is_bitwise_noop(self):
        f = smooth_field(8, 32, 32)
        out = edit_region(f, Rect(4, 4, 20, 20), KEEP_ALL)
        assert out.data is f.data

    def test_outside_region_untouched(self):
        f = smooth_field(9, 32, 32)
        rect = Rect(8, 4, 20, 24)
        out = edit_region(f, rect, KEEP_DIV)
        mask = np.ones((32, 32), dtype=bool)
        mask[rect.y0:rect.y1, rect.x0:rect.x1] = False
        assert np.array_equal(out.data[mask], f.data[mask])
        assert not np.array_equal(out.data[~mask], f.data[~mask])

    def test_whole_field_keep_div_free_kills_divergence(self):
        f = smooth_field(10, 32, 32)
        out = edit_region(f, Rect(0, 0, 32, 32), KEEP_DIV)
        assert cs(out) <= 1e-10

    def test_whole_field_keep_curl_free_kills_vorticity(self):
        f = smooth_field(11, 32, 32)
        out = edit_region(f, Rect(0, 0, 32, 32), KEEP_CURL)
        assert cme(out) <= 1e-10

    def test_region_metrics_on_subdomain(self):
        f = smooth_field(12, 48, 48)
        rect = Rect(8, 8, 32, 40)
        out = edit_region(f, rect, KEEP_DIV)
        region = VectorField(out.data[rect.y0:rect.y1, rect.x0:rect.x1])
        assert cs(region) <= 1e-10

    def test_too_small_region(self):
        f = smooth_field(13, 16, 16)
        with pytest.raises(RegionTooSmall):
            edit_region(f, Rect(0, 0, 3, 8), KEEP_DIV)

    def test_out_of_bounds_region(self):
        f = smooth_field(13, 16, 16)
        with pytest.raises(InvalidField):
            edit_region(f, Rect(0, 0, 32, 8), KEEP_DIV)

    def test_mask_needs_a_component(self):
        with pytest.raises(ValueError):
            ComponentMask()


class TestEditSequence:
    def test_empty_sequence_is_identity(self):
        f = smooth_field(14, 16, 16)
        assert apply_edit_sequence(f, []).data is f.data

    def test_harmonic_removal_near_idempotence(self):
        # re-decomposing a harmonic-free field re-derives slightly different
        # potentials near the boundary (one-sided closures vs ghost zeros);
        # the rel RMS drift shrinks O(h): measured 0.137 / 0.043 / 0.013 at
        # 32/64/128. Frozen as a regression envelope.
        drift = {}
        for n in (32, 64):
            f = smooth_field(15, n, n)
            whole = Rect(0, 0, n, n)
            once = edit_region(f, whole, KEEP_BOTH)
            twice = edit_region(once, whole, KEEP_BOTH)
            rel = (np.sqrt(np.mean((twice.data - once.data) ** 2))
                   / np.sqrt(np.mean(once.data ** 2)))
            drift[n] = rel
        assert drift[32] <= 0.20
        assert drift[64] <= 0.08
        assert drift[64] < drift[32]

    def test_multi_region_workflow(self):
        # whole-field harmonic removal, then a curl-free center, then
        # div-free corners: each region satisfies its metric on its interior
        n = 64
        f = smooth_field(16, n, n)
        center = Rect(24, 24, 40, 40)
        corner_a = Rect(0, 0, 16, 16)
        corner_b = Rect(48, 48, 64, 64)
        edits = [
            EditRequest(Rect(0, 0, n, n), KEEP_BOTH),
            EditRequest(center, KEEP_CURL),
            EditRequest(corner_a, KEEP_DIV),
            EditRequest(corner_b, KEEP_DIV),
        ]
        out = apply_edit_sequence(f, edits)
        center_field = VectorField(out.data[center.y0:center.y1, center.x0:center.x1])
        assert cme(center_field) <= 1e-10
        for corner in (corner_a, corner_b):
            corner_field = VectorField(out.data[corner.y0:corner.y1, corner.x0:corner.x1])
            assert cs(corner_field) <= 1e-10

    def test_sequence_is_deterministic(self):
        f = smooth_field(17, 32, 32)
        edits = [
            EditRequest(Rect(0, 0, 32, 32), KEEP_BOTH),
            EditRequest(Rect(4, 4, 20, 28), KEEP_DIV),
        ]
        a = apply_edit_sequence(f, edits)
        b = apply_edit_sequence(f, edits)
        assert np.array_equal(a.data, b.data)


class TestEditScript:
    def test_roundtrip(self):
        edits = [
            EditRequest(Rect(0, 0, 32, 32), KEEP_BOTH),
            EditRequest(Rect(4, 4, 20, 28), ComponentMask(keep_harmonic=True)),
        ]
        text = format_edit_script(edits)
        assert parse_edit_script(text) == edits

    def test_parse_with_comments(self):
        text = "# workflow\n\nrect 0 0 16 16 keep div_free\n"
        edits = parse_edit_script(text)
        assert edits == [EditRequest(Rect(0, 0, 16, 16), KEEP_DIV)]

    def test_parse_errors(self):
        with pytest.raises(InvalidField):
            parse_edit_script("rect 0 0 16 keep div_free")
        with pytest.raises(InvalidField):
            parse_edit_script("rect a 0 16 16 keep div_free")
        with pytest.raises(ValueError):
            parse_edit_script("rect 0 0 16 16 keep nothing")

    def test_mask_names_roundtrip(self):
        mask = ComponentMask.from_names(["div_free", "harmonic"])
        assert mask.names() == ("div_free", "harmonic")
        assert not mask.all_selected
        assert ComponentMask.from_names(["curl_free", "div_free", "harmonic"]).all_selected
