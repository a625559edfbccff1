"""Coverage probability analytics for the downward-looking cone.

Cross-checks two routes to the node-coverage distribution: the analytic
binomial model with p = V_cone / V_cube, and seeded Monte-Carlo frequency
over random node placements. The cone volume itself is clipped to the
deployment cube by rejection sampling, since the closed form overestimates
p whenever the cone pokes out of the box.
"""

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .env3d import EnvConfig


@dataclass(frozen=True)
class ConeGeometry:
    """Right circular cone with a downward axis (+z grows with depth)."""

    apex: tuple[float, float, float]
    apex_angle_deg: float
    height_m: float
    base_radius_m: float | None = None

    def __post_init__(self):
        if not 0.0 < self.apex_angle_deg < 180.0:
            raise ValueError(
                f"apex_angle_deg must be in (0, 180), got {self.apex_angle_deg}"
            )
        if self.height_m < 0:
            raise ValueError(f"height_m must be >= 0, got {self.height_m}")
        derived = self.height_m * math.tan(math.radians(self.apex_angle_deg / 2.0))
        if self.base_radius_m is None:
            object.__setattr__(self, "base_radius_m", derived)
        elif not math.isclose(self.base_radius_m, derived, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(
                f"base_radius_m {self.base_radius_m} inconsistent with "
                f"angle/height (expected {derived})"
            )


class VolumeEstimate(NamedTuple):
    volume_m3: float
    stderr_m3: float


class SweepRow(NamedTuple):
    start_x: float
    start_y: float
    n: int
    k: int
    p_analytic: float
    p_empirical: float
    stderr: float


def cone_volume(geom: ConeGeometry) -> float:
    """Unclipped cone volume pi * r^2 * h / 3 in cubic metres."""
    return math.pi * geom.base_radius_m**2 * geom.height_m / 3.0


def points_in_cone(geom: ConeGeometry, points: np.ndarray) -> np.ndarray:
    """Boolean mask of points (N, 3) inside the cone, boundary inclusive."""
    d = np.asarray(points, dtype=float) - np.asarray(geom.apex, dtype=float)
    dz = d[:, 2]
    horiz2 = d[:, 0] ** 2 + d[:, 1] ** 2
    tan_half = math.tan(math.radians(geom.apex_angle_deg / 2.0))
    return (dz >= 0) & (dz <= geom.height_m) & (horiz2 <= (dz * tan_half) ** 2)


def clipped_cone_volume_mc(
    geom: ConeGeometry,
    cube: tuple[float, float, float],
    samples: int,
    seed: int,
) -> VolumeEstimate:
    """Volume of cone-intersect-cube by uniform sampling of the cube.

    Unbiased; the standard error follows the binomial hit fraction and
    shrinks as 1/sqrt(samples).
    """
    if samples < 1000:
        raise ValueError(f"samples must be >= 1000, got {samples}")
    l, w, h = cube
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, [l, w, h], size=(samples, 3))
    hits = points_in_cone(geom, pts)
    p_hat = float(np.count_nonzero(hits)) / samples
    cube_volume = l * w * h
    stderr = cube_volume * math.sqrt(p_hat * (1.0 - p_hat) / samples)
    return VolumeEstimate(cube_volume * p_hat, stderr)


def coverage_pmf(n: int, p: float, k: int) -> float:
    """Binomial probability of covering exactly k of n nodes."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if not 0 <= k <= n:
        raise ValueError(f"k must be in [0, n], got k={k}, n={n}")
    return math.comb(n, k) * p**k * (1.0 - p) ** (n - k)


def coverage_tail(n: int, p: float, k: int) -> float:
    """Probability of covering k or more of n nodes."""
    if not 0 <= k <= n:
        raise ValueError(f"k must be in [0, n], got k={k}, n={n}")
    return float(sum(coverage_pmf(n, p, i) for i in range(k, n + 1)))


def coverage_sweep(
    config: EnvConfig,
    n_values: list[int],
    start_grid: list[tuple[float, float]],
    trials: int,
    k_values: tuple[int, ...] = (1, 2, 4),
    volume_samples: int = 200_000,
    seed: int = 0,
) -> list[SweepRow]:
    """Analytic vs empirical P(cover >= k) per start position and node count.

    The cone hangs from each start at the surface (z = 0) down to the
    bottom of the box; node placements are drawn uniformly over the
    continuous cube, matching the binomial model's assumptions.
    """
    if trials < 100:
        raise ValueError(f"trials must be >= 100, got {trials}")
    l, w, h = (float(d) for d in config.dims)
    cube_volume = l * w * h
    rows = []
    for si, (sx, sy) in enumerate(start_grid):
        geom = ConeGeometry(
            apex=(float(sx), float(sy), 0.0),
            apex_angle_deg=config.auv.cone_apex_angle_deg,
            height_m=h,
        )
        vol, _ = clipped_cone_volume_mc(
            geom, (l, w, h), volume_samples, seed=seed * 7919 + si
        )
        p = min(1.0, vol / cube_volume)
        for ni, n in enumerate(n_values):
            rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, si, ni])
            pts = rng.uniform(0.0, [l, w, h], size=(trials, n, 3))
            counts = points_in_cone(geom, pts.reshape(-1, 3)).reshape(trials, n).sum(axis=1)
            for k in k_values:
                p_emp = float(np.count_nonzero(counts >= k)) / trials
                if k > n:
                    # Covering more nodes than exist is impossible; this
                    # also handles the empty-deployment edge.
                    p_ana = 0.0
                elif n == 0:
                    p_ana = 1.0  # k == 0: covering none of nobody is certain
                else:
                    p_ana = coverage_tail(n, p, k)
                stderr = math.sqrt(p_emp * (1.0 - p_emp) / trials)
                rows.append(
                    SweepRow(
                        start_x=float(sx),
                        start_y=float(sy),
                        n=int(n),
                        k=int(k),
                        p_analytic=p_ana,
                        p_empirical=p_emp,
                        stderr=stderr,
                    )
                )
    return rows


def sweep_to_csv(rows: list[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["start_x", "start_y", "n", "k", "p_analytic", "p_empirical", "stderr"]
        )
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
