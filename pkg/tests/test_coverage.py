"""Coverage-probability analytics tests."""

import csv
import math

import numpy as np
import pytest

from aquaswipt.coverage import (
    ConeGeometry,
    SweepRow,
    clipped_cone_volume_mc,
    cone_volume,
    coverage_pmf,
    coverage_sweep,
    coverage_tail,
    points_in_cone,
    sweep_to_csv,
)
from aquaswipt.env3d import EnvConfig


def test_cone_volume_hand_value():
    geom = ConeGeometry(apex=(0, 0, 0), apex_angle_deg=143.13010235415598,
                        height_m=1.0, base_radius_m=None)
    # tan(71.565...) = 3, so r = 3 and V = 3*pi
    assert geom.base_radius_m == pytest.approx(3.0, rel=1e-9)
    assert cone_volume(geom) == pytest.approx(9.42477796076938, rel=1e-9)


def test_cone_volume_degenerate_height():
    geom = ConeGeometry(apex=(0, 0, 0), apex_angle_deg=60.0, height_m=0.0)
    assert cone_volume(geom) == 0.0


def test_cone_volume_quadratic_in_radius():
    # tan(45) = 2 * tan(26.565...), so these cones have r and 2r at equal h.
    narrow = ConeGeometry(apex=(0, 0, 0), apex_angle_deg=53.13010235415598, height_m=5.0)
    wide = ConeGeometry(apex=(0, 0, 0), apex_angle_deg=90.0, height_m=5.0)
    assert wide.base_radius_m == pytest.approx(2.0 * narrow.base_radius_m, rel=1e-9)
    assert cone_volume(wide) == pytest.approx(4.0 * cone_volume(narrow), rel=1e-9)


def test_cone_radius_consistency_validated():
    with pytest.raises(ValueError):
        ConeGeometry(apex=(0, 0, 0), apex_angle_deg=60.0, height_m=10.0,
                     base_radius_m=9.0)


def test_points_in_cone_membership():
    geom = ConeGeometry(apex=(5.0, 5.0, 0.0), apex_angle_deg=60.0, height_m=10.0)
    pts = np.array([
        [5.0, 5.0, 4.0],    # on axis
        [5.0, 5.0, -1.0],   # above apex
        [5.0, 5.0, 11.0],   # below base
        [5.0 + 10.0 * math.tan(math.radians(30.0)) - 1e-9, 5.0, 10.0],  # inside rim
        [9.0, 5.0, 2.0],    # outside the slant at shallow depth
    ])
    assert list(points_in_cone(geom, pts)) == [True, False, False, True, False]


def test_clipped_volume_matches_analytic_when_inside():
    geom = ConeGeometry(apex=(50.0, 50.0, 0.0), apex_angle_deg=60.0, height_m=50.0)
    est, err = clipped_cone_volume_mc(geom, (100.0, 100.0, 50.0), 200_000, seed=4)
    assert abs(est - cone_volume(geom)) <= 3.0 * err


def test_clipped_volume_empty_when_disjoint():
    geom = ConeGeometry(apex=(500.0, 500.0, 0.0), apex_angle_deg=60.0, height_m=10.0)
    est, err = clipped_cone_volume_mc(geom, (100.0, 100.0, 50.0), 10_000, seed=4)
    assert est == 0.0
    assert err == 0.0


def test_clipped_volume_never_exceeds_cube():
    geom = ConeGeometry(apex=(50.0, 50.0, 0.0), apex_angle_deg=179.0, height_m=50.0)
    est, _ = clipped_cone_volume_mc(geom, (100.0, 100.0, 50.0), 50_000, seed=4)
    assert est <= 100.0 * 100.0 * 50.0


def test_clipped_volume_rejects_small_samples():
    geom = ConeGeometry(apex=(0, 0, 0), apex_angle_deg=60.0, height_m=10.0)
    with pytest.raises(ValueError):
        clipped_cone_volume_mc(geom, (10, 10, 10), 999, seed=1)


def test_clipped_volume_error_scales_inverse_sqrt():
    geom = ConeGeometry(apex=(50.0, 50.0, 0.0), apex_angle_deg=60.0, height_m=50.0)
    cube = (100.0, 100.0, 50.0)
    small = [clipped_cone_volume_mc(geom, cube, 4_000, seed=s).volume_m3 for s in range(30)]
    large = [clipped_cone_volume_mc(geom, cube, 16_000, seed=1000 + s).volume_m3 for s in range(30)]
    ratio = np.std(large) / np.std(small)
    # Quadrupling samples should halve the spread, within statistical slop.
    assert 0.3 < ratio < 0.75


def test_coverage_pmf_certainty_cases():
    assert coverage_pmf(5, 0.0, 0) == 1.0
    assert coverage_pmf(5, 0.0, 3) == 0.0
    assert coverage_pmf(2, 0.5, 1) == pytest.approx(0.5)


def test_coverage_pmf_normalizes():
    rng = np.random.default_rng(8)
    for _ in range(25):
        n = int(rng.integers(1, 60))
        p = float(rng.uniform(0, 1))
        assert sum(coverage_pmf(n, p, k) for k in range(n + 1)) == pytest.approx(1.0)


def test_coverage_pmf_rejects_bad_k():
    with pytest.raises(ValueError):
        coverage_pmf(5, 0.5, 6)
    with pytest.raises(ValueError):
        coverage_pmf(5, 0.5, -1)


def test_coverage_tail_total_probability():
    assert coverage_tail(7, 0.3, 0) == pytest.approx(1.0)


def test_coverage_tail_pmf_consistency():
    rng = np.random.default_rng(15)
    for _ in range(25):
        n = int(rng.integers(2, 40))
        p = float(rng.uniform(0, 1))
        k = int(rng.integers(0, n))
        assert coverage_tail(n, p, k) - coverage_tail(n, p, k + 1) == pytest.approx(
            coverage_pmf(n, p, k), abs=1e-12
        )


def test_coverage_tail_monotonicity():
    for k in range(0, 10):
        assert coverage_tail(10, 0.3, k) >= coverage_tail(10, 0.3, k + 0) - 1e-15
    assert all(
        coverage_tail(10, 0.3, k) >= coverage_tail(10, 0.3, k + 1)
        for k in range(10)
    )
    assert all(
        coverage_tail(n, 0.3, 2) <= coverage_tail(n + 1, 0.3, 2)
        for n in range(2, 30)
    )
    assert all(
        coverage_tail(12, p, 3) <= coverage_tail(12, p + 0.05, 3)
        for p in np.linspace(0.05, 0.9, 15)
    )


def test_paper_scale_tail_claims():
    # 100x100x50 box, default 60-degree cone hanging from the centre.
    geom = ConeGeometry(apex=(50.0, 50.0, 0.0), apex_angle_deg=60.0, height_m=50.0)
    p = cone_volume(geom) / (100.0 * 100.0 * 50.0)
    assert coverage_tail(10, p, 1) > 0.5
    assert coverage_tail(50, p, 4) > 0.5


def test_coverage_sweep_analytic_vs_empirical():
    config = EnvConfig(dims=(100, 100, 50), node_count=25, rng_seed=0)
    rows = coverage_sweep(
        config,
        n_values=[10, 50],
        start_grid=[(50.0, 50.0), (0.0, 0.0)],
        trials=2000,
        k_values=(1, 4),
        volume_samples=100_000,
        seed=5,
    )
    assert len(rows) == 8
    for row in rows:
        stderr = max(row.stderr, 1e-3)
        assert abs(row.p_analytic - row.p_empirical) <= 4.0 * stderr, row


def test_coverage_sweep_centre_beats_corner():
    config = EnvConfig(dims=(100, 100, 50), node_count=25, rng_seed=0)
    rows = coverage_sweep(config, n_values=[10], start_grid=[(50.0, 50.0), (0.0, 0.0)],
                          trials=500, k_values=(1,), volume_samples=50_000, seed=2)
    centre = next(r for r in rows if r.start_x == 50.0)
    corner = next(r for r in rows if r.start_x == 0.0)
    assert centre.p_analytic > corner.p_analytic
    assert centre.p_empirical > corner.p_empirical


def test_coverage_sweep_requires_trials():
    config = EnvConfig(dims=(10, 10, 5), node_count=5, rng_seed=0)
    with pytest.raises(ValueError):
        coverage_sweep(config, [5], [(0.0, 0.0)], trials=10)


def test_coverage_sweep_empty_deployment_edge():
    config = EnvConfig(dims=(10, 10, 5), node_count=5, rng_seed=0)
    rows = coverage_sweep(config, n_values=[0], start_grid=[(5.0, 5.0)],
                          trials=100, k_values=(0, 1, 2), volume_samples=1000,
                          seed=1)
    by_k = {r.k: r for r in rows}
    assert by_k[0].p_analytic == 1.0 and by_k[0].p_empirical == 1.0
    for k in (1, 2):
        assert by_k[k].p_analytic == 0.0
        assert by_k[k].p_empirical == 0.0


def test_sweep_csv_columns(tmp_path):
    rows = [SweepRow(0.0, 0.0, 10, 1, 0.5, 0.49, 0.01)]
    path = tmp_path / "sweep.csv"
    sweep_to_csv(rows, path)
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = next(reader)
    assert header == ["start_x", "start_y", "n", "k", "p_analytic", "p_empirical", "stderr"]
    assert float(data[4]) == 0.5
