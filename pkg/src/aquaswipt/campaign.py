"""Monte-Carlo experiment campaign: orchestration, metrics, CSV emission.

A campaign crosses algorithms with network sizes, trains each cell on its
own seeded deployment, evaluates the converged policy with one rollout,
and aggregates the results into per-figure CSV datasets plus a manifest
that pins every seed. A separate sweep varies the throughput/harvest
weighting, and a geometric sweep produces the coverage-probability table.

Cells are independent; AQUASWIPT_THREADS > 1 runs them in a process pool.
Results are aggregated in a canonical order so output bytes do not depend
on completion order.
"""

import csv
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .agents import (
    Algorithm,
    EpisodeMetrics,
    LearnConfig,
    greedy_rollout,
    random_rollout,
    train,
)
from .auv import AuvSpec, move_energy
from .coverage import SweepRow, coverage_sweep, sweep_to_csv
from .env3d import Environment, EnvConfig, env_config_from_dict, env_config_to_dict

DATASET_FILES = (
    "fig_coverage.csv",
    "fig_gamma.csv",
    "fig_throughput.csv",
    "fig_actions_throughput.csv",
    "fig_ee.csv",
    "fig_harvest.csv",
    "fig_actions_harvest.csv",
)


@dataclass(frozen=True)
class CampaignConfig:
    """Everything one campaign needs; JSON-serializable via the dict helpers.

    The main grid (algorithms x node_counts x runs) uses ``env.reward_gamma``
    and the configured power split. The gamma sweep re-runs Q-learning at
    ``gamma_node_count`` nodes with both the reward weighting and the power
    split set to each swept value, since they alias the same knob.
    """

    env: EnvConfig = field(default_factory=EnvConfig)
    learn: LearnConfig = field(default_factory=LearnConfig)
    algorithms: tuple[str, ...] = ("q_learning", "sarsa", "random")
    node_counts: tuple[int, ...] = (10, 25, 50)
    gamma_sweep: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    mc_runs: int = 20
    output_dir: str = "results"
    targets_throughput_bits: tuple[float, ...] = ()
    targets_harvest_j: tuple[float, ...] = ()
    gamma_node_count: int = 25
    gamma_mc_runs: int | None = None
    coverage_dims: tuple[int, int, int] | None = None
    coverage_n_values: tuple[int, ...] = (10, 25, 50)
    coverage_starts: tuple[tuple[float, float], ...] | None = None
    coverage_trials: int = 2000
    coverage_k_values: tuple[int, ...] = (1, 2, 4)
    coverage_volume_samples: int = 200_000

    def __post_init__(self):
        if not self.algorithms:
            raise ValueError("algorithms must be non-empty")
        for name in self.algorithms:
            Algorithm(name)  # raises on unknown names
        if not self.node_counts:
            raise ValueError("node_counts must be non-empty")
        if any(n < 1 for n in self.node_counts):
            raise ValueError(f"node_counts must be positive, got {self.node_counts}")
        if self.mc_runs < 1:
            raise ValueError(f"mc_runs must be >= 1, got {self.mc_runs}")
        if any(not 0.0 <= g <= 1.0 for g in self.gamma_sweep):
            raise ValueError(f"gamma_sweep values must be in [0, 1], got {self.gamma_sweep}")
        for name in ("targets_throughput_bits", "targets_harvest_j"):
            if any(t <= 0 for t in getattr(self, name)):
                raise ValueError(f"{name} entries must be > 0")
        if self.gamma_mc_runs is not None and self.gamma_mc_runs < 1:
            raise ValueError(f"gamma_mc_runs must be >= 1, got {self.gamma_mc_runs}")


def desk_campaign_config(**overrides) -> CampaignConfig:
    """Campaign defaults sized for a workstation: minutes, not hours.

    A 20 x 20 x 10 m box with a 30-degree footprint keeps coverage scarce
    enough that a random walk rarely stumbles into it, while the state
    space stays small enough for tabular learning to converge in a few
    hundred fixed-start episodes. The hotel load is sized so idling
    against a wall is not near-free, the motion penalty is scaled to a
    tenth of a unit move so steps that serve a covered node score
    positive, and the training discount is shortened to 0.9 so loitering
    (boundary-clamp self-loops) stays visibly below purposeful moves in
    value. The coverage sweep still runs at the full 100 x 100 x 50 m
    geometry via ``coverage_dims``. Keyword overrides replace top-level
    CampaignConfig fields.
    """
    auv = AuvSpec(hotel_load_w=1000.0, cone_apex_angle_deg=30.0)
    env = EnvConfig(
        dims=(20, 20, 10),
        node_count=25,
        episode_length=50,
        rng_seed=0,
        reward_gamma=0.5,
        auv=auv,
        motion_scale=10.0 * move_energy(auv, (0, 0, 0), (1, 0, 0)),
    )
    learn = LearnConfig(
        episodes=400,
        discount=0.9,
        epsilon_decay=0.98,
        epsilon_min=0.01,
        randomize_start=False,
    )
    base = CampaignConfig(
        env=env,
        learn=learn,
        mc_runs=20,
        targets_throughput_bits=(5e5, 1e6, 2e6),
        targets_harvest_j=(2e-8, 5e-8, 1.5e-7),
        coverage_dims=(100, 100, 50),
        coverage_trials=2000,
    )
    return dataclasses.replace(base, **overrides) if overrides else base


def energy_efficiency(throughput_bits: float, total_energy_j: float) -> float:
    """Delivered bits per joule of transmit plus navigation energy."""
    if total_energy_j <= 0:
        raise ValueError(f"total_energy_j must be > 0, got {total_energy_j}")
    if throughput_bits < 0:
        raise ValueError(f"throughput_bits must be >= 0, got {throughput_bits}")
    return throughput_bits / total_energy_j


def actions_to_target(metrics: EpisodeMetrics, target: float, quantity: str) -> int | None:
    """First step (1-based) at which the cumulative quantity reaches target.

    Returns None when the episode never reaches it.
    """
    if target <= 0:
        raise ValueError(f"target must be > 0, got {target}")
    if quantity == "throughput":
        trace = metrics.step_throughput_bits
    elif quantity == "harvest":
        trace = metrics.step_harvested_j
    else:
        raise ValueError(f"quantity must be 'throughput' or 'harvest', got {quantity}")
    total = 0.0
    for i, value in enumerate(trace):
        total += value
        if total >= target:
            return i + 1
    return None


# ---------------------------------------------------------------------------
# Cell execution


@dataclass(frozen=True)
class _CellSpec:
    kind: str  # "main" or "gamma"
    algorithm: str
    node_count: int
    gamma: float
    run: int
    env_cfg: EnvConfig
    learn_cfg: LearnConfig
    targets_throughput: tuple[float, ...]
    targets_harvest: tuple[float, ...]


@dataclass
class CellResult:
    kind: str
    algorithm: str
    node_count: int
    gamma: float
    run: int
    env_seed: int
    throughput_bits: float
    harvested_j: float
    motion_energy_j: float
    transmit_energy_j: float
    ee_bits_per_j: float
    reward_total: float
    reward_throughput_term: float
    reward_harvest_term: float
    actions_throughput: list[int | None]
    actions_harvest: list[int | None]
    episode_rewards: list[float]

    def sort_key(self):
        return (self.kind, self.algorithm, self.node_count, self.gamma, self.run)


def _derive_seeds(master_seed: int, *key: int) -> tuple[int, int]:
    """Deterministic (env_seed, learn_seed) for one campaign cell."""
    seq = np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF, *key])
    state = seq.generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def _run_cell(spec: _CellSpec) -> CellResult:
    env = Environment(spec.env_cfg)
    algo = Algorithm(spec.algorithm)
    q, trace = train(env, algo, spec.learn_cfg)
    if algo is Algorithm.RANDOM:
        eval_rng = np.random.default_rng([spec.learn_cfg.seed & 0xFFFFFFFFFFFFFFFF, 99])
        metrics, _ = random_rollout(env, eval_rng)
    else:
        metrics, _ = greedy_rollout(env, q)
    total_energy = metrics.transmit_energy_j + metrics.motion_energy_j
    ee = energy_efficiency(metrics.throughput_bits, total_energy)
    return CellResult(
        kind=spec.kind,
        algorithm=spec.algorithm,
        node_count=spec.node_count,
        gamma=spec.gamma,
        run=spec.run,
        env_seed=spec.env_cfg.rng_seed,
        throughput_bits=metrics.throughput_bits,
        harvested_j=metrics.harvested_j,
        motion_energy_j=metrics.motion_energy_j,
        transmit_energy_j=metrics.transmit_energy_j,
        ee_bits_per_j=ee,
        reward_total=metrics.total_reward,
        reward_throughput_term=metrics.reward_throughput_term,
        reward_harvest_term=metrics.reward_harvest_term,
        actions_throughput=[
            actions_to_target(metrics, t, "throughput") for t in spec.targets_throughput
        ],
        actions_harvest=[
            actions_to_target(metrics, t, "harvest") for t in spec.targets_harvest
        ],
        episode_rewards=[m.total_reward for m in trace],
    )


def _build_cell_specs(config: CampaignConfig) -> list[_CellSpec]:
    master = config.env.rng_seed
    specs = []
    for ai, algorithm in enumerate(config.algorithms):
        for ni, node_count in enumerate(config.node_counts):
            for run in range(config.mc_runs):
                env_seed, learn_seed = _derive_seeds(master, 0, ai, ni, run)
                env_cfg = dataclasses.replace(
                    config.env,
                    node_count=node_count,
                    node_density=None,
                    rng_seed=env_seed,
                )
                specs.append(
                    _CellSpec(
                        kind="main",
                        algorithm=algorithm,
                        node_count=node_count,
                        gamma=config.env.reward_gamma,
                        run=run,
                        env_cfg=env_cfg,
                        learn_cfg=dataclasses.replace(config.learn, seed=learn_seed),
                        targets_throughput=tuple(config.targets_throughput_bits),
                        targets_harvest=tuple(config.targets_harvest_j),
                    )
                )
    gamma_runs = config.gamma_mc_runs if config.gamma_mc_runs is not None else config.mc_runs
    for gi, gamma in enumerate(config.gamma_sweep):
        for run in range(gamma_runs):
            env_seed, learn_seed = _derive_seeds(master, 1, gi, run)
            env_cfg = dataclasses.replace(
                config.env,
                node_count=config.gamma_node_count,
                node_density=None,
                rng_seed=env_seed,
                reward_gamma=gamma,
                node_harvest=dataclasses.replace(
                    config.env.node_harvest, split_ratio=gamma
                ),
            )
            specs.append(
                _CellSpec(
                    kind="gamma",
                    algorithm=Algorithm.Q_LEARNING.value,
                    node_count=config.gamma_node_count,
                    gamma=gamma,
                    run=run,
                    env_cfg=env_cfg,
                    learn_cfg=dataclasses.replace(config.learn, seed=learn_seed),
                    targets_throughput=(),
                    targets_harvest=(),
                )
            )
    return specs


def _worker_count() -> int:
    raw = os.environ.get("AQUASWIPT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _execute_cells(specs: list[_CellSpec]) -> list[CellResult]:
    workers = _worker_count()
    if workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, specs))
    else:
        results = [_run_cell(spec) for spec in specs]
    results.sort(key=CellResult.sort_key)
    return results


# ---------------------------------------------------------------------------
# Aggregation


@dataclass
class TargetAggregate:
    target: float
    reached_runs: int
    total_runs: int
    mean_actions: float | None


@dataclass
class CellAggregate:
    algorithm: str
    node_count: int
    gamma: float
    runs: int
    throughput_mean: float
    throughput_min: float
    throughput_max: float
    harvested_mean: float
    harvested_min: float
    harvested_max: float
    ee_mean: float
    ee_ratio_vs_random: float | None
    actions_throughput: list[TargetAggregate]
    actions_harvest: list[TargetAggregate]
    reward_trace_mean: list[float]
    reward_trace_std: list[float]


@dataclass
class GammaRow:
    gamma: float
    runs: int
    reward_mean: float
    throughput_term_mean: float
    harvest_term_mean: float
    motion_term_mean: float


@dataclass
class AggregateResult:
    config: CampaignConfig
    cells: list[CellAggregate]
    gamma_rows: list[GammaRow]
    coverage_rows: list[SweepRow]
    cell_seeds: dict[str, int]
    raw_cells: list[CellResult] = field(default_factory=list)


def _aggregate_targets(results: list[CellResult], attr: str,
                       targets: tuple[float, ...]) -> list[TargetAggregate]:
    out = []
    for ti, target in enumerate(targets):
        values = [getattr(r, attr)[ti] for r in results]
        reached = [v for v in values if v is not None]
        out.append(
            TargetAggregate(
                target=target,
                reached_runs=len(reached),
                total_runs=len(values),
                mean_actions=float(np.mean(reached)) if reached else None,
            )
        )
    return out


def _aggregate(config: CampaignConfig, results: list[CellResult]) -> AggregateResult:
    main = [r for r in results if r.kind == "main"]
    gamma = [r for r in results if r.kind == "gamma"]

    cells = []
    ee_means: dict[tuple[str, int], float] = {}
    groups: dict[tuple[str, int, float], list[CellResult]] = {}
    for r in main:
        groups.setdefault((r.algorithm, r.node_count, r.gamma), []).append(r)
    for (algorithm, node_count, g), rs in sorted(groups.items()):
        tp = [r.throughput_bits for r in rs]
        hv = [r.harvested_j for r in rs]
        ee = [r.ee_bits_per_j for r in rs]
        traces = np.asarray([r.episode_rewards for r in rs])
        cells.append(
            CellAggregate(
                algorithm=algorithm,
                node_count=node_count,
                gamma=g,
                runs=len(rs),
                throughput_mean=float(np.mean(tp)),
                throughput_min=float(np.min(tp)),
                throughput_max=float(np.max(tp)),
                harvested_mean=float(np.mean(hv)),
                harvested_min=float(np.min(hv)),
                harvested_max=float(np.max(hv)),
                ee_mean=float(np.mean(ee)),
                ee_ratio_vs_random=None,
                actions_throughput=_aggregate_targets(
                    rs, "actions_throughput", tuple(config.targets_throughput_bits)
                ),
                actions_harvest=_aggregate_targets(
                    rs, "actions_harvest", tuple(config.targets_harvest_j)
                ),
                reward_trace_mean=[float(v) for v in traces.mean(axis=0)],
                reward_trace_std=[float(v) for v in traces.std(axis=0)],
            )
        )
        ee_means[(algorithm, node_count)] = float(np.mean(ee))
    for cell in cells:
        base = ee_means.get((Algorithm.RANDOM.value, cell.node_count))
        if base and cell.algorithm != Algorithm.RANDOM.value:
            cell.ee_ratio_vs_random = cell.ee_mean / base

    gamma_rows = []
    ggroups: dict[float, list[CellResult]] = {}
    for r in gamma:
        ggroups.setdefault(r.gamma, []).append(r)
    for g, rs in sorted(ggroups.items()):
        tput_terms = [r.reward_throughput_term for r in rs]
        harv_terms = [r.reward_harvest_term for r in rs]
        rewards = [r.reward_total for r in rs]
        # Per step: reward = tput_term + harvest_term - motion_term, exactly.
        motions = [t + h - rw for t, h, rw in zip(tput_terms, harv_terms, rewards)]
        gamma_rows.append(
            GammaRow(
                gamma=g,
                runs=len(rs),
                reward_mean=float(np.mean(rewards)),
                throughput_term_mean=float(np.mean(tput_terms)),
                harvest_term_mean=float(np.mean(harv_terms)),
                motion_term_mean=float(np.mean(motions)),
            )
        )

    seeds = {
        f"{r.kind}/{r.algorithm}/{r.node_count}/{r.gamma}/{r.run}": r.env_seed
        for r in results
    }
    return AggregateResult(
        config=config,
        cells=cells,
        gamma_rows=gamma_rows,
        coverage_rows=[],
        cell_seeds=seeds,
        raw_cells=sorted(results, key=CellResult.sort_key),
    )


def _default_coverage_starts(dims) -> list[tuple[float, float]]:
    l, w, _ = dims
    return [(0.0, 0.0), (l / 4.0, w / 4.0), (l / 2.0, w / 2.0)]


def run_coverage(config: CampaignConfig) -> list[SweepRow]:
    """The campaign's coverage sweep, at ``coverage_dims`` when given."""
    env_cfg = config.env
    if config.coverage_dims is not None:
        env_cfg = dataclasses.replace(env_cfg, dims=tuple(config.coverage_dims))
    starts = (
        list(config.coverage_starts)
        if config.coverage_starts is not None
        else _default_coverage_starts(env_cfg.dims)
    )
    return coverage_sweep(
        env_cfg,
        n_values=list(config.coverage_n_values),
        start_grid=starts,
        trials=config.coverage_trials,
        k_values=tuple(config.coverage_k_values),
        volume_samples=config.coverage_volume_samples,
        seed=config.env.rng_seed,
    )


def run_campaign(config: CampaignConfig, write: bool = True) -> AggregateResult:
    """Execute the full campaign; optionally emit datasets to output_dir."""
    specs = _build_cell_specs(config)
    results = _execute_cells(specs)
    aggregate = _aggregate(config, results)
    aggregate.coverage_rows = run_coverage(config)
    if write:
        emit_datasets(aggregate, config.output_dir)
    return aggregate


def gamma_sweep_report(config: CampaignConfig) -> list[GammaRow]:
    """Converged reward decomposition per swept gamma value."""
    if not config.gamma_sweep:
        raise ValueError("gamma_sweep must be non-empty")
    specs = [s for s in _build_cell_specs(config) if s.kind == "gamma"]
    results = _execute_cells(specs)
    return _aggregate(config, results).gamma_rows


# ---------------------------------------------------------------------------
# Emission


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def emit_datasets(result: AggregateResult, output_dir) -> list[Path]:
    """Write the per-figure CSVs, the seed manifest, and a column README."""
    if not result.cells:
        raise ValueError("campaign produced no cells; nothing to emit")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    p = out / "fig_coverage.csv"
    sweep_to_csv(result.coverage_rows, p)
    paths.append(p)

    p = out / "fig_gamma.csv"
    _write_csv(
        p,
        ["gamma", "runs", "reward_mean", "throughput_term_mean",
         "harvest_term_mean", "motion_term_mean"],
        [[g.gamma, g.runs, g.reward_mean, g.throughput_term_mean,
          g.harvest_term_mean, g.motion_term_mean] for g in result.gamma_rows],
    )
    paths.append(p)

    p = out / "fig_throughput.csv"
    _write_csv(
        p,
        ["algorithm", "node_count", "throughput_mean_bits",
         "throughput_min_bits", "throughput_max_bits", "runs"],
        [[c.algorithm, c.node_count, c.throughput_mean, c.throughput_min,
          c.throughput_max, c.runs] for c in result.cells],
    )
    paths.append(p)

    p = out / "fig_actions_throughput.csv"
    rows = []
    for c in result.cells:
        for t in c.actions_throughput:
            rows.append([c.algorithm, c.node_count, t.target, t.mean_actions,
                         t.reached_runs > 0, t.reached_runs, t.total_runs])
    _write_csv(
        p,
        ["algorithm", "node_count", "target_bits", "mean_actions", "reached",
         "reached_runs", "total_runs"],
        rows,
    )
    paths.append(p)

    p = out / "fig_ee.csv"
    _write_csv(
        p,
        ["algorithm", "node_count", "ee_mean_bits_per_j", "ee_ratio_vs_random"],
        [[c.algorithm, c.node_count, c.ee_mean, c.ee_ratio_vs_random]
         for c in result.cells],
    )
    paths.append(p)

    p = out / "fig_harvest.csv"
    _write_csv(
        p,
        ["algorithm", "node_count", "harvested_mean_j", "harvested_min_j",
         "harvested_max_j", "runs"],
        [[c.algorithm, c.node_count, c.harvested_mean, c.harvested_min,
          c.harvested_max, c.runs] for c in result.cells],
    )
    paths.append(p)

    p = out / "fig_actions_harvest.csv"
    rows = []
    for c in result.cells:
        for t in c.actions_harvest:
            rows.append([c.algorithm, c.node_count, t.target, t.mean_actions,
                         t.reached_runs > 0, t.reached_runs, t.total_runs])
    _write_csv(
        p,
        ["algorithm", "node_count", "target_j", "mean_actions", "reached",
         "reached_runs", "total_runs"],
        rows,
    )
    paths.append(p)

    p = out / "run_manifest.json"
    manifest = {
        "schema": 1,
        "config": campaign_config_to_dict(result.config),
        "seeds": dict(sorted(result.cell_seeds.items())),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "aquaswipt": __version__,
        },
    }
    with open(p, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    paths.append(p)

    p = out / "README.md"
    with open(p, "w") as fh:
        fh.write(_DATASET_README)
    paths.append(p)
    return paths


_DATASET_README = """\
# Campaign datasets

All CSVs are emitted deterministically: identical (config, seed) pairs
reproduce byte-identical files. `run_manifest.json` echoes the full config
(reusable via `aquaswipt run --config run_manifest.json`), the derived seed
of every cell, and tool versions.

- `fig_coverage.csv`: start_x, start_y, n, k, p_analytic, p_empirical,
  stderr. Analytic tail probability of covering >= k of n nodes (binomial,
  clipped-cone volume) vs the empirical frequency over seeded placements;
  stderr is the binomial standard error of the empirical column.
- `fig_gamma.csv`: gamma, runs, reward_mean, throughput_term_mean,
  harvest_term_mean, motion_term_mean. Converged greedy-rollout reward
  split per swept weighting value.
- `fig_throughput.csv`: algorithm, node_count, throughput_mean_bits,
  throughput_min_bits, throughput_max_bits, runs. Rollout bits relayed to
  the surface station.
- `fig_actions_throughput.csv` / `fig_actions_harvest.csv`: algorithm,
  node_count, target, mean_actions, reached, reached_runs, total_runs.
  mean_actions averages the first step reaching the target over the runs
  that reached it and is empty when none did (reached = False); targets
  are bits / joules respectively.
- `fig_ee.csv`: algorithm, node_count, ee_mean_bits_per_j,
  ee_ratio_vs_random. Energy efficiency = rollout bits / (transmit +
  navigation energy); the ratio column is empty for the random baseline.
- `fig_harvest.csv`: algorithm, node_count, harvested_mean_j,
  harvested_min_j, harvested_max_j, runs. Energy banked into node stores.
"""


# ---------------------------------------------------------------------------
# Config (de)serialization


def campaign_config_to_dict(config: CampaignConfig) -> dict:
    return dataclasses.asdict(config)


def campaign_config_from_dict(d: dict) -> CampaignConfig:
    d = dict(d)
    d["env"] = env_config_from_dict(d.get("env", env_config_to_dict(EnvConfig())))
    d["learn"] = LearnConfig(**d.get("learn", {}))
    for name in ("algorithms", "node_counts", "gamma_sweep", "coverage_n_values",
                 "coverage_k_values", "targets_throughput_bits", "targets_harvest_j"):
        if name in d:
            d[name] = tuple(d[name])
    if d.get("coverage_starts") is not None:
        d["coverage_starts"] = tuple(tuple(s) for s in d["coverage_starts"])
    if d.get("coverage_dims") is not None:
        d["coverage_dims"] = tuple(d["coverage_dims"])
    return CampaignConfig(**d)
