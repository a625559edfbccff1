"""Campaign runner tests: metrics, orchestration, aggregation, emission."""

import dataclasses
import json
import random

import numpy as np
import pytest

from aquaswipt.agents import EpisodeMetrics, LearnConfig
from aquaswipt.auv import AuvSpec
from aquaswipt.campaign import (
    DATASET_FILES,
    CampaignConfig,
    _aggregate,
    _build_cell_specs,
    _run_cell,
    actions_to_target,
    campaign_config_from_dict,
    campaign_config_to_dict,
    desk_campaign_config,
    emit_datasets,
    energy_efficiency,
    gamma_sweep_report,
    run_campaign,
)
from aquaswipt.env3d import EnvConfig


def tiny_campaign(out_dir, **overrides) -> CampaignConfig:
    env = EnvConfig(dims=(6, 6, 4), node_count=4, episode_length=8, rng_seed=3,
                    auv=AuvSpec(hotel_load_w=500.0))
    learn = LearnConfig(episodes=4, epsilon_decay=0.9, discount=0.9,
                        randomize_start=False)
    defaults = dict(
        env=env,
        learn=learn,
        algorithms=("q_learning", "random"),
        node_counts=(4, 6),
        gamma_sweep=(0.0, 1.0),
        mc_runs=2,
        output_dir=str(out_dir),
        targets_throughput_bits=(1.0,),
        targets_harvest_j=(1e-15,),
        coverage_n_values=(4,),
        coverage_starts=((3.0, 3.0),),
        coverage_trials=100,
        coverage_k_values=(1,),
        coverage_volume_samples=1000,
    )
    defaults.update(overrides)
    return CampaignConfig(**defaults)


def read_csvs(out_dir):
    return {name: (out_dir / name).read_bytes() for name in DATASET_FILES}


# ---------------------------------------------------------------------------
# scalar ops


def test_energy_efficiency_zero_throughput():
    assert energy_efficiency(0.0, 50.0) == 0.0


def test_energy_efficiency_arithmetic():
    assert energy_efficiency(10_000.0, 50.0) == pytest.approx(200.0)


def test_energy_efficiency_rejects_zero_energy():
    with pytest.raises(ValueError):
        energy_efficiency(100.0, 0.0)


def test_energy_efficiency_homogeneous():
    rng = np.random.default_rng(2)
    for _ in range(50):
        bits = float(rng.uniform(1, 1e6))
        energy = float(rng.uniform(1e-3, 1e5))
        c = float(rng.uniform(0.1, 100.0))
        assert energy_efficiency(c * bits, c * energy) == pytest.approx(
            energy_efficiency(bits, energy), rel=1e-12
        )


def metrics_with(throughput_steps, harvest_steps=()):
    m = EpisodeMetrics(episode=0)
    for t in throughput_steps:
        m.step_throughput_bits.append(t)
    for h in harvest_steps:
        m.step_harvested_j.append(h)
    return m


def test_actions_to_target_first_step():
    m = metrics_with([100.0, 0.0, 50.0])
    assert actions_to_target(m, 1e-9, "throughput") == 1


def test_actions_to_target_cumulative():
    m = metrics_with([100.0, 0.0, 50.0])
    assert actions_to_target(m, 120.0, "throughput") == 3


def test_actions_to_target_not_reached():
    m = metrics_with([100.0, 0.0, 50.0])
    assert actions_to_target(m, 1e9, "throughput") is None


def test_actions_to_target_harvest_stream():
    m = metrics_with([], harvest_steps=[0.0, 2.0, 2.0])
    assert actions_to_target(m, 3.0, "harvest") == 3


def test_actions_to_target_validation():
    m = metrics_with([1.0])
    with pytest.raises(ValueError):
        actions_to_target(m, 0.0, "throughput")
    with pytest.raises(ValueError):
        actions_to_target(m, 1.0, "banana")


# ---------------------------------------------------------------------------
# config validation


def test_campaign_config_rejects_empty_algorithms(tmp_path):
    with pytest.raises(ValueError):
        tiny_campaign(tmp_path / "out", algorithms=())
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize(
    "overrides",
    [
        {"algorithms": ("dqn",)},
        {"node_counts": ()},
        {"node_counts": (0,)},
        {"mc_runs": 0},
        {"gamma_sweep": (1.5,)},
        {"targets_throughput_bits": (0.0,)},
        {"gamma_mc_runs": 0},
    ],
)
def test_campaign_config_validation(tmp_path, overrides):
    with pytest.raises(ValueError):
        tiny_campaign(tmp_path / "out", **overrides)


def test_campaign_config_dict_round_trip(tmp_path):
    cfg = tiny_campaign(tmp_path / "out")
    doc = json.loads(json.dumps(campaign_config_to_dict(cfg)))
    assert campaign_config_from_dict(doc) == cfg


def test_desk_campaign_config_applies_overrides():
    cfg = desk_campaign_config(mc_runs=3, output_dir="elsewhere")
    assert cfg.mc_runs == 3
    assert cfg.output_dir == "elsewhere"


# ---------------------------------------------------------------------------
# run_campaign / emission


def test_run_campaign_smoke_emits_all_files(tmp_path):
    out = tmp_path / "out"
    cfg = tiny_campaign(out, algorithms=("random",), node_counts=(4,), mc_runs=1)
    result = run_campaign(cfg, write=True)
    assert len(result.cells) == 1
    for name in DATASET_FILES:
        assert (out / name).exists(), name
    assert (out / "run_manifest.json").exists()
    assert (out / "README.md").exists()


def test_run_campaign_deterministic_bytes(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_campaign(tiny_campaign(out_a), write=True)
    run_campaign(tiny_campaign(out_b), write=True)
    assert read_csvs(out_a) == read_csvs(out_b)


def test_manifest_round_trip_reproduces_outputs(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_campaign(tiny_campaign(out_a), write=True)
    manifest = json.loads((out_a / "run_manifest.json").read_text())
    cfg = campaign_config_from_dict(manifest["config"])
    cfg = dataclasses.replace(cfg, output_dir=str(out_b))
    run_campaign(cfg, write=True)
    assert read_csvs(out_a) == read_csvs(out_b)


def test_fig_throughput_row_count(tmp_path):
    out = tmp_path / "out"
    cfg = tiny_campaign(out)
    run_campaign(cfg, write=True)
    lines = (out / "fig_throughput.csv").read_text().strip().splitlines()
    assert len(lines) - 1 == len(cfg.algorithms) * len(cfg.node_counts)


def test_aggregation_is_order_independent(tmp_path):
    cfg = tiny_campaign(tmp_path / "a")
    specs = _build_cell_specs(cfg)
    results = [_run_cell(s) for s in specs]
    agg_sorted = _aggregate(cfg, sorted(results, key=lambda r: r.sort_key()))
    shuffled = list(results)
    random.Random(5).shuffle(shuffled)
    agg_shuffled = _aggregate(cfg, shuffled)
    assert agg_sorted == agg_shuffled


def test_seeds_are_per_cell_and_traceable(tmp_path):
    cfg = tiny_campaign(tmp_path / "out")
    result = run_campaign(cfg, write=False)
    seeds = result.cell_seeds
    # (2 algos x 2 counts + 2 gammas) x 2 runs
    assert len(seeds) == (2 * 2 + 2) * 2
    assert len(set(seeds.values())) == len(seeds)


def test_not_reached_encoding(tmp_path):
    out = tmp_path / "out"
    cfg = tiny_campaign(out, algorithms=("random",), node_counts=(4,), mc_runs=1,
                        targets_throughput_bits=(1e18,))
    run_campaign(cfg, write=True)
    lines = (out / "fig_actions_throughput.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    row = lines[1].split(",")
    record = dict(zip(header, row))
    assert record["mean_actions"] == ""
    assert record["reached"] == "False"
    assert record["reached_runs"] == "0"


def test_gamma_sweep_report_zeroes_excluded_terms(tmp_path):
    cfg = tiny_campaign(tmp_path / "out", gamma_sweep=(0.0, 0.5, 1.0), mc_runs=1)
    rows = gamma_sweep_report(cfg)
    by_gamma = {r.gamma: r for r in rows}
    assert by_gamma[0.0].throughput_term_mean == 0.0
    assert by_gamma[1.0].harvest_term_mean == 0.0


def test_gamma_sweep_report_requires_values(tmp_path):
    cfg = tiny_campaign(tmp_path / "out", gamma_sweep=())
    with pytest.raises(ValueError):
        gamma_sweep_report(cfg)


def test_emit_rejects_empty_result(tmp_path):
    cfg = tiny_campaign(tmp_path / "out")
    result = run_campaign(cfg, write=False)
    empty = dataclasses.replace(result, cells=[])
    with pytest.raises(ValueError):
        emit_datasets(empty, tmp_path / "nothing")
    assert not (tmp_path / "nothing").exists()


def test_worker_env_var_does_not_change_bytes(tmp_path, monkeypatch):
    out_a, out_b = tmp_path / "serial", tmp_path / "pooled"
    monkeypatch.setenv("AQUASWIPT_THREADS", "1")
    run_campaign(tiny_campaign(out_a, node_counts=(4,), mc_runs=1), write=True)
    monkeypatch.setenv("AQUASWIPT_THREADS", "2")
    run_campaign(tiny_campaign(out_b, node_counts=(4,), mc_runs=1), write=True)
    assert read_csvs(out_a) == read_csvs(out_b)


def test_ee_ratio_column_present_for_learned_algos(tmp_path):
    out = tmp_path / "out"
    run_campaign(tiny_campaign(out), write=True)
    lines = (out / "fig_ee.csv").read_text().strip().splitlines()
    header = lines[0].split(",")
    assert "ee_ratio_vs_random" in header
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    randoms = [r for r in rows if r["algorithm"] == "random"]
    assert all(r["ee_ratio_vs_random"] == "" for r in randoms)
