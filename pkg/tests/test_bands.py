import numpy as np
import pytest
from scipy import stats

from shapebg.bands import (UNDERSMOOTH, ConfidenceBand, band_from_deviations, bootstrap_band,
                           bootstrap_deviations)
from shapebg.density import (DensityGrid, Sample, gaussian_kde, reflected_kde,
                             select_bandwidth_lscv)

PTS = np.linspace(-4, 4, 161)


@pytest.fixture(scope="module")
def normal_sample():
    return Sample(np.random.default_rng(11).normal(size=400))


def test_contains_estimate(normal_sample):
    band = bootstrap_band(normal_sample, PTS, 0.05, 200, 0.3, seed=1)
    f_hat = band.f_hat.values
    assert np.all(band.lower.values <= f_hat) and np.all(f_hat <= band.upper.values)
    assert np.all(band.lower.values >= 0)
    assert band.level == pytest.approx(0.95)


def test_center_is_kde(normal_sample):
    band = bootstrap_band(normal_sample, PTS, 0.1, 100, 0.3, seed=1)
    np.testing.assert_allclose(band.f_hat.values,
                               gaussian_kde(normal_sample, 0.3, PTS).values, atol=1e-14)


def test_reflected_center():
    s = Sample(np.random.default_rng(2).exponential(size=300))
    pts = np.linspace(0, 8, 81)
    band = bootstrap_band(s, pts, 0.1, 100, 0.3, boundary=0.0, seed=3)
    np.testing.assert_allclose(band.f_hat.values, reflected_kde(s, 0.0, 0.3, pts).values,
                               atol=1e-14)


@pytest.mark.parametrize("kwargs", [{"B": 99}, {"alpha": 0.0}, {"alpha": 1.0}, {"alpha": -0.1}])
def test_invalid_arguments(normal_sample, kwargs):
    args = {"alpha": 0.05, "B": 100, "bandwidth": 0.3}
    args.update(kwargs)
    with pytest.raises(ValueError):
        bootstrap_band(normal_sample, PTS, **args)


def test_permutation_invariant(normal_sample):
    shuffled = Sample(np.random.default_rng(5).permutation(normal_sample.values))
    a = bootstrap_band(normal_sample, PTS, 0.05, 100, 0.3, seed=9)
    b = bootstrap_band(shuffled, PTS, 0.05, 100, 0.3, seed=9)
    assert a.q == b.q
    np.testing.assert_array_equal(a.lower.values, b.lower.values)


def test_deterministic_and_order_free(normal_sample):
    _, dev = bootstrap_deviations(normal_sample, PTS, 120, 0.3, seed=4)
    _, again = bootstrap_deviations(normal_sample, PTS, 120, 0.3, seed=4)
    np.testing.assert_array_equal(dev, again)
    # replicate b does not depend on how many replicates follow it (up to BLAS blocking)
    _, prefix = bootstrap_deviations(normal_sample, PTS, 60, 0.3, seed=4)
    np.testing.assert_allclose(dev[:60], prefix, rtol=1e-12)


def test_alpha_monotone(normal_sample):
    f_hat, dev = bootstrap_deviations(normal_sample, PTS, 300, 0.3, seed=8)
    wide = band_from_deviations(PTS, f_hat, dev, 0.01)
    narrow = band_from_deviations(PTS, f_hat, dev, 0.10)
    assert wide.q >= narrow.q > 0


def test_degenerate_sample_has_zero_width():
    band = bootstrap_band(Sample(np.full(30, 1.5)), PTS, 0.05, 100, 0.3, seed=0)
    assert band.q == pytest.approx(0.0, abs=1e-15)


def test_band_rejects_crossing_curves():
    g = DensityGrid([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        ConfidenceBand(g, g.with_values([0.5, 1.0]), 0.95)


def test_width_shrinks_with_n():
    spec_rng = np.random.default_rng(21)
    widths = {}
    for n in (1000, 4000):
        qs = []
        for r in range(5):
            s = Sample(spec_rng.normal(size=n))
            qs.append(bootstrap_band(s, PTS, 0.05, 100, 1.06 * n ** -0.2, seed=r).q)
        widths[n] = np.median(qs)
    assert widths[4000] < widths[1000]


@pytest.mark.slow
def test_coverage_normal():
    """True density inside the band on [-3, 3] in at least 90% of 200 replications."""
    pts = np.linspace(-5, 5, 201)
    central = np.abs(pts) <= 3
    truth = stats.norm.pdf(pts)
    hits = 0
    for r in range(200):
        rng = np.random.default_rng([77, r])
        s = Sample(rng.normal(size=1000))
        h = UNDERSMOOTH * select_bandwidth_lscv(s)
        band = bootstrap_band(s, pts, 0.05, 500, h, seed=r)
        inside = (band.lower.values <= truth + 1e-12) & (truth <= band.upper.values + 1e-12)
        hits += bool(np.all(inside[central]))
    assert hits >= 180
