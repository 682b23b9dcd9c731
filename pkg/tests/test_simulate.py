import numpy as np
import pytest

from quakeresid import (Grid, GridRegion, IntensityField, RowIntervalRegion,
                        SeededStream, ValidationError, integrate,
                        serialize_catalog, simulate_catalog,
                        simulate_cox_complement, simulate_homogeneous,
                        simulated_counts)
from quakeresid.consistency import observed_counts


def _field():
    g = Grid.regular(0, 2, 0, 2, 0.5, 0.5)
    rates = np.linspace(0.5, 8.0, 16).reshape(4, 4)
    return IntensityField(g, rates)


def test_catalog_points_inside_active_pixels():
    fld = _field()
    cat = simulate_catalog(fld, SeededStream(1, 0))
    assert np.all(fld.grid.contains(cat.lons(), cat.lats()))
    times = [e.time for e in cat.events]
    assert times == sorted(times)


def test_counts_stage_shared_with_catalog():
    fld = _field()
    stream = SeededStream(11, 4)
    counts = simulated_counts(fld, stream)
    cat = simulate_catalog(fld, stream)
    assert np.array_equal(counts, observed_counts(fld, cat))


def test_mean_count_matches_integral():
    fld = _field()
    mu = integrate(fld)
    totals = [simulated_counts(fld, SeededStream(2, j)).sum()
              for j in range(400)]
    se = np.sqrt(mu / 400)
    assert abs(np.mean(totals) - mu) < 3 * se


def test_determinism_byte_identical():
    fld = _field()
    c1 = serialize_catalog(simulate_catalog(fld, SeededStream(3, 7)))
    c2 = serialize_catalog(simulate_catalog(fld, SeededStream(3, 7)))
    assert c1 == c2


def test_masked_pixels_get_no_points():
    mask = np.ones((4, 4), bool)
    mask[0, :] = False
    g = Grid.regular(0, 2, 0, 2, 0.5, 0.5, active_mask=mask)
    fld = IntensityField(g, np.full((4, 4), 50.0))
    cat = simulate_catalog(fld, SeededStream(4, 0))
    assert len(cat) > 0
    assert np.all(cat.lats() >= 0.5)


def test_cox_complement_superpose_level_check():
    fld = _field()
    with pytest.raises(ValidationError):
        simulate_cox_complement(fld, 1.0, "superpose", SeededStream(0, 0))
    xs, ys = simulate_cox_complement(fld, 8.0, "superpose", SeededStream(0, 0))
    assert len(xs) == len(ys)


def test_cox_complement_superthin_clips_negative():
    # level below some rates: those pixels contribute nothing
    g = Grid.regular(0, 1, 0, 1, 0.5, 0.5)
    rates = np.array([[10.0, 10.0], [0.0, 0.0]])
    fld = IntensityField(g, rates)
    xs, ys = simulate_cox_complement(fld, 2.0, "superthin", SeededStream(5, 0))
    assert np.all(ys >= 0.5)  # only the zero-rate row gets complement points


def test_cox_complement_mean_count():
    g = Grid.regular(0, 1, 0, 1, 0.5, 0.5)
    fld = IntensityField(g, np.zeros((2, 2)))
    m = 12.0  # expected complement count: level * area
    totals = [len(simulate_cox_complement(fld, m, "superpose",
                                          SeededStream(6, j))[0])
              for j in range(300)]
    se = np.sqrt(m / 300)
    assert abs(np.mean(totals) - m) < 3 * se


def test_homogeneous_sampler_stays_inside():
    region = RowIntervalRegion(np.array([0.0, 1.0, 2.0]),
                               np.array([2.0, 0.5]))
    xs, ys = simulate_homogeneous(region, 30.0, SeededStream(7, 0))
    assert np.all(region.contains(xs, ys))
    # lower band is 4x wider than the upper one
    assert xs[ys < 1.0].max() > 0.6


def test_homogeneous_zero_area_rejected():
    g = Grid.regular(0, 1, 0, 1, 1.0, 1.0,
                     active_mask=np.zeros((1, 1), bool))
    with pytest.raises(ValidationError):
        simulate_homogeneous(GridRegion(g), 1.0, SeededStream(0, 0))


def test_homogeneous_count_distribution():
    g = Grid.regular(0, 3, 0, 3, 1.0, 1.0)
    region = GridRegion(g)
    mu = 5.0 * region.area
    totals = [len(simulate_homogeneous(region, 5.0, SeededStream(8, j))[0])
              for j in range(300)]
    se = np.sqrt(mu / 300)
    assert abs(np.mean(totals) - mu) < 3 * se
