import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapebg.bands import ConfidenceBand
from shapebg.density import DensityGrid, grid_from_mixture, integrate, mixture
from shapebg.monotone import extract_monotone, monotone_interval, search_support_start

M_GRID = (0.0, 12.0, 2401)


def test_decreasing_density_is_all_background():
    f = grid_from_mixture(mixture((1.0, "exponential", {"scale": 1.0})), 0.0, 12.0, 2401)
    dec = extract_monotone(f)
    assert dec.pi0 == pytest.approx(1.0, abs=1e-3)
    np.testing.assert_array_equal(dec.h0.values, f.values)


@pytest.mark.parametrize("name, expected", [("m1", 0.922), ("m2", 0.993)])
def test_oracle(models, name, expected):
    assert extract_monotone(grid_from_mixture(models[name], *M_GRID)).pi0 == pytest.approx(
        expected, abs=0.002)


def test_invariants(models):
    f = grid_from_mixture(models["m1"], *M_GRID)
    dec = extract_monotone(f)
    assert np.all(np.diff(dec.h0.values) <= 0)
    assert np.all(dec.h0.values <= f.values)
    assert integrate(dec.h0) == pytest.approx(dec.pi0, abs=1e-9)
    assert integrate(dec.g0) == pytest.approx(1.0, abs=1e-6)


def test_flat_over_bump(models):
    f = grid_from_mixture(models["m1"], *M_GRID)
    h0 = extract_monotone(f).h0
    above = f.values > h0.values
    assert np.any(above)
    # one excursion for this model, and the background is constant across it
    runs = np.flatnonzero(np.diff(above.astype(int)))
    assert runs.shape[0] == 2
    assert np.ptp(h0.values[runs[0]:runs[1] + 1]) == 0.0


def test_zero_at_origin():
    f = DensityGrid(np.linspace(0, 2, 5), [0.0, 1.0, 2.0, 1.0, 0.5])
    assert extract_monotone(f).pi0 == 0.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=2, max_size=40))
def test_idempotent(vals):
    f = DensityGrid(np.linspace(0, 1, len(vals)), vals)
    once = extract_monotone(f)
    twice = extract_monotone(once.h0)
    np.testing.assert_array_equal(twice.h0.values, once.h0.values)
    assert twice.pi0 == once.pi0
    assert (once.h0.values == f.values).all() == bool(np.all(np.diff(f.values) <= 0))


class TestInterval:
    def test_zero_width(self, models):
        f = grid_from_mixture(models["m1"], *M_GRID)
        pi_l, pi_u, _, _ = monotone_interval(ConfidenceBand.exact(f))
        assert pi_l == pi_u == extract_monotone(f).pi0

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
                    min_size=3, max_size=30))
    def test_sandwich(self, triples):
        lo, mid, hi = np.sort(np.array(triples), axis=1).T
        pts = np.linspace(0, 1, lo.shape[0])
        band = ConfidenceBand(DensityGrid(pts, lo), DensityGrid(pts, hi), 0.95)
        pi_l, pi_u, h_l, h_u = monotone_interval(band)
        h0 = extract_monotone(DensityGrid(pts, mid)).h0.values
        assert np.all(h_l.values <= h0) and np.all(h0 <= h_u.values)
        assert pi_l <= pi_u


class TestSupportStart:
    def test_finds_shifted_start(self):
        spec = mixture((1.0, "exponential", {"scale": 1.0}))
        pts = np.linspace(-1, 11, 2401)
        vals = np.where(pts >= 0.5, np.exp(-(pts - 0.5)), 0.0)
        f = DensityGrid(pts, vals)
        start, dec = search_support_start(f, [-1.0, 0.0, 0.5, 1.0])
        assert start == 0.5
        assert dec.pi0 == pytest.approx(1.0, abs=1e-3)
        assert spec.support_lower == 0.0

    def test_empty(self, models):
        with pytest.raises(ValueError):
            search_support_start(grid_from_mixture(models["m1"], *M_GRID), [])
