import numpy as np
import pytest
from scipy import stats

from polygen.manifolds import (
    ManifoldSpec,
    MANIFOLD_IDS,
    coverage,
    read_samples_csv,
    residual,
    residuals,
    sample,
    write_samples_csv,
)

NOISELESS = ["sin2d", "astroid", "sin3d", "gabriels_horn"]


class TestSample:
    def test_sin2d_lies_on_curve(self):
        pts = sample(ManifoldSpec("sin2d"), 100, seed=0)
        np.testing.assert_allclose(pts[:, 1], np.sin(pts[:, 0]), atol=1e-15)
        assert pts[:, 0].min() >= 0.0 and pts[:, 0].max() <= 2 * np.pi

    def test_astroid_t0_point(self):
        # t = 0 gives [alpha, 0]; check via the parametric form directly
        alpha = 1.0
        np.testing.assert_allclose([alpha * np.cos(0.0) ** 3, alpha * np.sin(0.0) ** 3], [1.0, 0.0])
        spec = ManifoldSpec("astroid")
        pts = sample(spec, 50, seed=1)
        assert np.all(np.abs(pts) <= 1.0 + 1e-12)

    def test_gabriels_horn_parametric_point(self):
        # t = 0, x = 2, alpha = 1 -> [2, 0.5, 0]
        x, t, alpha = 2.0, 0.0, 1.0
        np.testing.assert_allclose([x, alpha * np.cos(t) / x, alpha * np.sin(t) / x], [2.0, 0.5, 0.0])
        spec = ManifoldSpec("gabriels_horn")
        assert residual(spec, [2.0, 0.5, 0.0]) <= 1e-12

    def test_deterministic_per_seed(self):
        for mid in MANIFOLD_IDS:
            spec = ManifoldSpec(mid)
            np.testing.assert_array_equal(sample(spec, 64, seed=9), sample(spec, 64, seed=9))
            assert not np.array_equal(sample(spec, 64, seed=9), sample(spec, 64, seed=10))

    def test_dimensions(self):
        assert sample(ManifoldSpec("sin2d"), 5, 0).shape == (5, 2)
        assert sample(ManifoldSpec("swissroll"), 5, 0).shape == (5, 3)

    @pytest.mark.parametrize("mid", MANIFOLD_IDS)
    def test_parameter_marginal_roughly_uniform(self, mid):
        spec = ManifoldSpec(mid, noise=0.0)
        pts = sample(spec, 100_000, seed=42)
        lo, hi = spec.param_range
        from polygen.manifolds import _param_estimate

        params = np.clip(_param_estimate(spec, pts), lo, hi)
        counts, _ = np.histogram(params, bins=16, range=(lo, hi))
        assert stats.chisquare(counts).pvalue > 0.001


class TestResidual:
    @pytest.mark.parametrize("mid", NOISELESS)
    def test_zero_on_manifold(self, mid):
        spec = ManifoldSpec(mid)
        pts = sample(spec, 500, seed=3)
        assert np.max(residuals(spec, pts)) <= 1e-12

    def test_swissroll_within_noise(self):
        spec = ManifoldSpec("swissroll", noise=0.05)
        pts = sample(spec, 2000, seed=4)
        res = residuals(spec, pts)
        assert np.quantile(res, 0.99) <= 3 * spec.noise

    def test_sin2d_quarter_period(self):
        assert residual(ManifoldSpec("sin2d"), [np.pi / 2, 0.0]) == pytest.approx(1.0)

    def test_sin2d_out_of_range_is_infinite(self):
        spec = ManifoldSpec("sin2d", margin=1.0)
        assert np.isinf(residual(spec, [2 * np.pi + 1.5, 0.0]))
        assert np.isfinite(residual(spec, [2 * np.pi + 0.5, 0.0]))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            residual(ManifoldSpec("sin3d"), [0.0, 0.0])

    def test_swissroll_noiseless_exact(self):
        spec = ManifoldSpec("swissroll", noise=0.0)
        pts = sample(spec, 300, seed=5)
        # limited by the 2000-node grid resolution, not by noise
        assert np.max(residuals(spec, pts)) <= 1e-3


class TestCoverage:
    @pytest.mark.parametrize("mid", MANIFOLD_IDS)
    def test_uniform_manifold_samples_cover(self, mid):
        spec = ManifoldSpec(mid)
        pts = sample(spec, 4000, seed=6)
        assert coverage(spec, pts, bins=16) == 1.0

    def test_single_point_collapse(self):
        spec = ManifoldSpec("sin2d")
        pts = np.tile(sample(spec, 1, seed=7), (500, 1))
        assert coverage(spec, pts, bins=16) == pytest.approx(1 / 16)

    def test_half_range(self):
        rng = np.random.default_rng(8)
        x = rng.uniform(0.0, np.pi, 4000)  # half of [0, 2*pi]
        pts = np.column_stack([x, np.sin(x)])
        assert coverage(ManifoldSpec("sin2d"), pts, bins=16) == pytest.approx(0.5, abs=0.1)

    def test_bins_validation(self):
        with pytest.raises(ValueError):
            coverage(ManifoldSpec("sin2d"), np.zeros((4, 2)), bins=1)


class TestCSV:
    def test_roundtrip(self, tmp_path):
        pts = sample(ManifoldSpec("sin3d"), 10, seed=0)
        path = tmp_path / "pts.csv"
        write_samples_csv(path, pts)
        header = path.read_text().splitlines()[0]
        assert header == "x1,x2,x3"
        np.testing.assert_array_equal(read_samples_csv(path), pts)

    def test_empty_file_has_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_samples_csv(path, np.zeros((0, 2)))
        assert path.read_text() == "x1,x2\n"
        assert read_samples_csv(path).shape == (0, 2)

    def test_malformed_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2\n1.0,oops\n")
        with pytest.raises(ValueError):
            read_samples_csv(path)
        path.write_text("a,b\n1.0,2.0\n")
        with pytest.raises(ValueError):
            read_samples_csv(path)

    def test_unknown_manifold(self):
        with pytest.raises(ValueError):
            ManifoldSpec("torus")
