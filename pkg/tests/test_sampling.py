import numpy as np
import pytest

from pointaffinity import (
    BoundingBox,
    SamplerConfig,
    cell_contains,
    cell_from_box,
    estimate_whitening,
    hit_and_run_step,
    make_rng,
    mix_seed,
    sample_polytope,
)
from pointaffinity.cells import cell_from_box as _cfb
from pointaffinity.errors import OutsideCellError, ValidationError


def box_cell(lo, hi):
    return cell_from_box(BoundingBox(np.asarray(lo, float), np.asarray(hi, float)))


class TestWhitening:
    def test_long_box_rescaled(self):
        cell = box_cell([0.0, 0.0], [2.0, 200.0])
        t = estimate_whitening(cell, [1.0, 100.0], 1000, make_rng(4))
        # mapped edge lengths should come out comparable
        e1 = np.linalg.norm(t.forward @ np.array([2.0, 0.0]))
        e2 = np.linalg.norm(t.forward @ np.array([0.0, 200.0]))
        assert 0.5 < e2 / e1 < 2.0

    def test_unit_cube_near_isotropic(self):
        cell = box_cell([0.0] * 3, [1.0] * 3)
        t = estimate_whitening(cell, [0.5] * 3, 1000, make_rng(9))
        assert np.all(np.abs(t.shift - 0.5) < 0.15)
        # fresh uniform draws mapped through T have near-identity covariance
        rng = np.random.default_rng(1)
        fresh = rng.uniform(size=(20000, 3))
        mapped = (fresh - t.shift) @ t.forward.T
        cov = np.cov(mapped, rowvar=False)
        off = cov - np.diag(np.diag(cov))
        assert np.max(np.abs(off)) < 0.2

    def test_degenerate_fallback_translation_only(self):
        # flat cell: the walk cannot move, the pilot covariance is singular
        cell = box_cell([0.0, 0.25], [1.0, 0.25])
        t = estimate_whitening(cell, [0.5, 0.25], 300, make_rng(2))
        np.testing.assert_array_equal(t.forward, np.eye(2))
        np.testing.assert_allclose(t.shift, [0.5, 0.25], atol=1e-12)

    def test_transform_inverse_identity(self):
        cell = box_cell([0.0, 0.0], [2.0, 200.0])
        t = estimate_whitening(cell, [1.0, 100.0], 500, make_rng(0))
        np.testing.assert_allclose(t.forward @ t.inverse, np.eye(2), atol=1e-8)
        y = np.array([0.3, 17.0])
        np.testing.assert_allclose(t.invert(t.apply(y)), y, atol=1e-8)

    def test_start_outside_cell(self):
        cell = box_cell([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(OutsideCellError):
            estimate_whitening(cell, [2.0, 0.5], 100, make_rng(0))

    def test_pilot_zero_disables_whitening(self):
        cell = box_cell([0.0, 0.0], [1.0, 1.0])
        t = estimate_whitening(cell, [0.5, 0.5], 0, make_rng(0))
        np.testing.assert_array_equal(t.forward, np.eye(2))
        np.testing.assert_array_equal(t.shift, np.zeros(2))


class TestStep:
    def test_closure_and_determinism(self):
        cell = box_cell([0.0, 0.0], [1.0, 1.0])
        t = estimate_whitening(cell, [0.5, 0.5], 200, make_rng(1))
        z1 = hit_and_run_step(cell, t, [0.5, 0.5], make_rng(42))
        z2 = hit_and_run_step(cell, t, [0.5, 0.5], make_rng(42))
        assert cell_contains(cell, z1)
        np.testing.assert_array_equal(z1, z2)

    def test_1d_uniform_mean(self):
        cell = box_cell([0.0], [1.0])
        rng = make_rng(5)
        z = np.array([0.5])
        vals = np.empty(10000)
        for i in range(10000):
            z = hit_and_run_step(cell, None, z, rng)
            vals[i] = z[0]
        assert abs(vals.mean() - 0.5) < 0.02


class TestSamplePolytope:
    def test_unit_square_mean(self):
        cell = box_cell([0.0, 0.0], [1.0, 1.0])
        pts = sample_polytope(cell, [0.5, 0.5], SamplerConfig(m=1000, burn_in=1000, seed=3))
        assert np.all(np.abs(pts.mean(axis=0) - 0.5) < 0.05)

    def test_closure_all_samples(self):
        cell = box_cell([-1.0, 0.0, 2.0], [1.0, 3.0, 5.0])
        pts = sample_polytope(cell, [0.0, 1.0, 3.0], SamplerConfig(m=300, burn_in=50, seed=8))
        for p in pts:
            assert cell_contains(cell, p)

    def test_bit_identical_reruns(self):
        cell = box_cell([0.0, 0.0], [1.0, 2.0])
        cfg = SamplerConfig(m=200, burn_in=100, seed=77)
        a = sample_polytope(cell, [0.5, 1.0], cfg)
        b = sample_polytope(cell, [0.5, 1.0], cfg)
        np.testing.assert_array_equal(a, b)

    def test_whitening_off_still_closed(self):
        cell = box_cell([0.0, 0.0], [1.0, 50.0])
        cfg = SamplerConfig(m=200, burn_in=100, pilot_steps=0, seed=5)
        pts = sample_polytope(cell, [0.5, 25.0], cfg)
        for p in pts:
            assert cell_contains(cell, p)

    def test_quadrant_chi_square(self):
        from scipy.stats import chi2
        cell = box_cell([0.0, 0.0], [1.0, 1.0])
        cfg = SamplerConfig(m=10000, burn_in=1000, seed=12)
        pts = sample_polytope(cell, [0.5, 0.5], cfg)
        q = (pts[:, 0] >= 0.5).astype(int) * 2 + (pts[:, 1] >= 0.5).astype(int)
        counts = np.bincount(q, minlength=4)
        stat = float(np.sum((counts - 2500.0) ** 2 / 2500.0))
        assert stat < chi2.ppf(0.99, df=3)


class TestConfigAndSeeds:
    def test_config_validation(self):
        with pytest.raises(ValidationError):
            SamplerConfig(m=0)
        with pytest.raises(ValidationError):
            SamplerConfig(epsilon=1.5)
        with pytest.raises(ValidationError):
            SamplerConfig(delta=0.0)
        with pytest.raises(ValidationError):
            SamplerConfig(burn_in=-1)

    def test_mix_seed_spreads(self):
        seeds = {mix_seed(123, i) for i in range(1000)}
        assert len(seeds) == 1000
        assert all(0 <= s < 2 ** 64 for s in seeds)
        assert mix_seed(123, 7) == mix_seed(123, 7)
        assert mix_seed(123, 7) != mix_seed(124, 7)
