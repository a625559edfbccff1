"""3D underwater data-collection environment.

A box of dimensions L x W x H (depth grows downward) holds randomly placed
sensor nodes. An AUV moves on the integer grid in unit steps along the six
axis directions. Each step it beams power down a cone-shaped footprint,
charges the stores of covered nodes, collects buffered data from them over
the acoustic uplink, and relays it to a surface station. Rewards trade
relayed throughput against harvested energy, minus the motion cost.

All randomness is driven by the config seed; identical (config, seed,
action sequence) triples reproduce identical trajectories bit for bit.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .auv import AuvSpec, move_energy
from .channel import (
    ChannelParams,
    ModemSpec,
    noise_level_db,
    shannon_throughput_bps,
    source_level,
    transmission_loss_db,
)
from .harvest import EnergyStore, HarvestSpec, charge, harvestable_power, split_power

# Unit moves: +x, -x, +y, -y, +z, -z (z grows downward).
ACTIONS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))
ACTION_NAMES = ("+x", "-x", "+y", "-y", "+z", "-z")
N_ACTIONS = len(ACTIONS)


class StateKey(NamedTuple):
    """Discretized, hashable MDP state."""

    x: int
    y: int
    z: int
    covered_with_data: int
    covered_undercharged: int
    gain_bin: int


@dataclass
class NodeState:
    """One sensor node: location, energy store, pending data, transducers."""

    position: tuple[int, int, int]
    store: EnergyStore
    data_buffer_bits: float
    modem: ModemSpec
    harvest: HarvestSpec


@dataclass
class StepOutcome:
    next_state: StateKey
    reward: float
    reward_throughput_term: float
    reward_harvest_term: float
    throughput_bits: float
    harvested_j: float
    motion_energy_j: float
    transmit_energy_j: float
    covered_nodes: list[int]
    done: bool


@dataclass(frozen=True)
class EnvConfig:
    """Full environment description; every run-affecting knob lives here.

    Exactly one of ``node_count`` / ``node_density`` must be set. Scale
    fields left at None are derived from the link budget at deploy time
    (see Environment). ``surface_station_xy`` and ``auv_start_xy`` default
    to the centre of the surface plane.
    """

    dims: tuple[int, int, int] = (100, 100, 50)
    node_count: int | None = 25
    node_density: float | None = None
    episode_length: int = 50
    step_duration_s: float = 1.0
    rng_seed: int = 0
    channel: ChannelParams = field(default_factory=ChannelParams)
    auv: AuvSpec = field(default_factory=AuvSpec)
    node_modem: ModemSpec = field(default_factory=ModemSpec)
    auv_modem: ModemSpec | None = None
    node_harvest: HarvestSpec = field(default_factory=HarvestSpec)
    surface_station_xy: tuple[float, float] | None = None
    auv_start_xy: tuple[int, int] | None = None
    auv_start_z: int = 0
    node_buffer_bits: float = 4e6
    node_store_capacity_j: float = 100.0
    node_store_level_j: float = 0.0
    node_store_charge_efficiency: float = 1.0
    reward_gamma: float = 0.5
    throughput_scale: float | None = None
    power_scale: float | None = None
    motion_scale: float | None = None

    def __post_init__(self):
        if len(self.dims) != 3 or any(int(d) != d or d < 1 for d in self.dims):
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        if (self.node_count is None) == (self.node_density is None):
            raise ValueError("exactly one of node_count / node_density must be set")
        if self.node_count is not None and self.node_count < 1:
            raise ValueError(f"node_count must be >= 1, got {self.node_count}")
        if self.node_density is not None and self.node_density <= 0:
            raise ValueError(f"node_density must be > 0, got {self.node_density}")
        if self.episode_length < 1:
            raise ValueError(f"episode_length must be >= 1, got {self.episode_length}")
        if self.step_duration_s <= 0:
            raise ValueError(
                f"step_duration_s must be > 0, got {self.step_duration_s}"
            )
        if not 0.0 <= self.reward_gamma <= 1.0:
            raise ValueError(f"reward_gamma must be in [0, 1], got {self.reward_gamma}")
        for name in ("throughput_scale", "power_scale", "motion_scale"):
            val = getattr(self, name)
            if val is not None and val <= 0:
                raise ValueError(f"{name} must be > 0, got {val}")
        if not 0 <= self.auv_start_z <= self.dims[2]:
            raise ValueError(f"auv_start_z must be in [0, H], got {self.auv_start_z}")
        if self.auv_start_xy is not None:
            x, y = self.auv_start_xy
            if not (0 <= x <= self.dims[0] and 0 <= y <= self.dims[1]):
                raise ValueError(f"auv_start_xy out of bounds: {self.auv_start_xy}")
        if self.node_buffer_bits < 0:
            raise ValueError(
                f"node_buffer_bits must be >= 0, got {self.node_buffer_bits}"
            )
        if not 0.0 <= self.node_store_level_j <= self.node_store_capacity_j:
            raise ValueError("node_store_level_j must be in [0, capacity]")


class _PosLinks(NamedTuple):
    """Link-budget quantities that depend only on the AUV position."""

    covered: np.ndarray          # indices of covered nodes
    uplink_snr_db: np.ndarray
    uplink_rate_bps: np.ndarray
    downlink_power_w: np.ndarray
    relay_rate_bps: float
    gain_bin: int


class Environment:
    """Single-owner mutable simulation instance.

    Construction performs the node deployment; ``reset`` starts a fresh
    episode without moving the nodes.
    """

    def __init__(self, config: EnvConfig):
        self.config = config
        self.dims = config.dims
        l, w, h = config.dims

        deploy_rng = np.random.default_rng([config.rng_seed & 0xFFFFFFFFFFFFFFFF, 0])
        self._episode_rng = np.random.default_rng(
            [config.rng_seed & 0xFFFFFFFFFFFFFFFF, 1]
        )

        if config.node_count is not None:
            count = config.node_count
        else:
            volume = l * w * h
            count = int(deploy_rng.poisson(config.node_density * volume))
            if count == 0:
                raise ValueError(
                    "node_density realization produced zero nodes; "
                    "increase density or use node_count"
                )
        positions = deploy_rng.integers(
            low=0, high=[l + 1, w + 1, h + 1], size=(count, 3)
        )

        self._initial_store = EnergyStore(
            capacity_j=config.node_store_capacity_j,
            level_j=config.node_store_level_j,
            charge_efficiency=config.node_store_charge_efficiency,
        )
        self.nodes = [
            NodeState(
                position=tuple(int(c) for c in positions[i]),
                store=self._initial_store,
                data_buffer_bits=config.node_buffer_bits,
                modem=config.node_modem,
                harvest=config.node_harvest,
            )
            for i in range(count)
        ]
        self._node_pos = positions.astype(float)

        self._auv_modem = config.auv_modem if config.auv_modem is not None else config.node_modem
        self._sl_node = source_level(config.node_modem)
        self._sl_auv = source_level(self._auv_modem)
        self._nl = noise_level_db(config.channel)
        self._tan_half = math.tan(math.radians(config.auv.cone_apex_angle_deg / 2.0))
        sx, sy = (
            config.surface_station_xy
            if config.surface_station_xy is not None
            else (l / 2.0, w / 2.0)
        )
        self._surface_station = (float(sx), float(sy), 0.0)
        self._start_pos = (
            config.auv_start_xy
            if config.auv_start_xy is not None
            else (l // 2, w // 2)
        )
        self._start_pos = (
            int(self._start_pos[0]),
            int(self._start_pos[1]),
            int(config.auv_start_z),
        )

        dt = config.step_duration_s
        ref_snr_auv = self._sl_auv - transmission_loss_db(1.0, config.channel) - self._nl
        ref_snr_node = self._sl_node - transmission_loss_db(1.0, config.channel) - self._nl
        self.motion_scale = (
            config.motion_scale
            if config.motion_scale is not None
            else move_energy(config.auv, (0, 0, 0), (1, 0, 0))
        )
        self.throughput_scale = (
            config.throughput_scale
            if config.throughput_scale is not None
            else shannon_throughput_bps(ref_snr_auv, config.channel, float("-inf")) * dt
        )
        self.power_scale = (
            config.power_scale
            if config.power_scale is not None
            else harvestable_power(ref_snr_auv, config.node_harvest) * dt
        )

        # Fixed SNR thresholds for the gain bin: the reachable uplink band,
        # from the cube diagonal down to the 1 m reference, split in four.
        diag = math.sqrt(l * l + w * w + h * h)
        snr_far = self._sl_node - transmission_loss_db(max(1.0, diag), config.channel) - self._nl
        self._gain_edges = np.linspace(snr_far, ref_snr_node, 5)[1:4]

        self._link_cache: dict[tuple[int, int, int], _PosLinks] = {}
        self.reset(randomize_start=False)

    # ------------------------------------------------------------------

    @property
    def n_actions(self) -> int:
        return N_ACTIONS

    def reset(self, randomize_start: bool = False) -> StateKey:
        """Start a new episode; node placement is untouched.

        ``randomize_start`` draws a fresh surface column (x, y) from the
        seeded episode stream, otherwise the configured start is used.
        """
        for node in self.nodes:
            node.store = self._initial_store
            node.data_buffer_bits = self.config.node_buffer_bits
        self.auv_battery = self.config.auv.battery
        if randomize_start:
            l, w, _ = self.dims
            x = int(self._episode_rng.integers(0, l + 1))
            y = int(self._episode_rng.integers(0, w + 1))
            self.auv_pos = (x, y, int(self.config.auv_start_z))
        else:
            self.auv_pos = self._start_pos
        self.relay_buffer_bits = 0.0
        self.total_relayed_bits = 0.0
        self.total_collected_bits = 0.0
        self.initial_buffer_bits = self.config.node_buffer_bits * len(self.nodes)
        self.step_index = 0
        self.done = False
        return self.encode_state()

    def covered(self) -> list[int]:
        """Indices of nodes inside the coverage cone with a usable uplink."""
        return [int(i) for i in self._links(self.auv_pos).covered]

    def step(self, action: int) -> StepOutcome:
        """Apply one unit move and resolve power transfer and data relay."""
        if self.done:
            raise RuntimeError("cannot step a finished episode; call reset()")
        if not 0 <= int(action) < N_ACTIONS:
            raise ValueError(f"action must be in [0, {N_ACTIONS}), got {action}")
        cfg = self.config
        dt = cfg.step_duration_s

        delta = ACTIONS[int(action)]
        old = self.auv_pos
        new = (
            min(max(old[0] + delta[0], 0), self.dims[0]),
            min(max(old[1] + delta[1], 0), self.dims[1]),
            min(max(old[2] + delta[2], 0), self.dims[2]),
        )
        if new != old:
            e_move = move_energy(cfg.auv, old, new)
        else:
            # Clamped at the boundary: the vehicle idles but still pays
            # its hotel load for the step.
            e_move = cfg.auv.hotel_load_w * dt
        new_level = max(0.0, self.auv_battery.level_j - e_move)
        depleted = new_level == 0.0
        self.auv_battery = dataclasses.replace(self.auv_battery, level_j=new_level)
        self.auv_pos = new

        links = self._links(new)
        covered = [int(i) for i in links.covered]
        useful = any(
            self.nodes[i].data_buffer_bits > 0 or not self.nodes[i].store.full
            for i in covered
        )

        harvested_j = 0.0
        collected_bits = 0.0
        uplinking_nodes = 0
        for j, i in enumerate(covered):
            node = self.nodes[i]
            info_w, harv_w = split_power(
                float(links.downlink_power_w[j]), node.harvest.split_ratio
            )
            node.store, accepted = charge(node.store, harv_w, dt)
            harvested_j += accepted
            # Decoding needs a non-zero information split.
            if info_w > 0 and node.data_buffer_bits > 0:
                take = min(node.data_buffer_bits, float(links.uplink_rate_bps[j]) * dt)
                node.data_buffer_bits -= take
                self.relay_buffer_bits += take
                collected_bits += take
                if take > 0:
                    uplinking_nodes += 1

        relayed_bits = min(self.relay_buffer_bits, links.relay_rate_bps * dt)
        self.relay_buffer_bits -= relayed_bits
        self.total_relayed_bits += relayed_bits
        self.total_collected_bits += collected_bits

        transmit_energy_j = uplinking_nodes * cfg.node_modem.electrical_power_w * dt
        if covered:
            transmit_energy_j += self._auv_modem.electrical_power_w * dt

        if useful:
            tput_term = cfg.reward_gamma * (relayed_bits / self.throughput_scale)
            harv_term = (1.0 - cfg.reward_gamma) * (harvested_j / self.power_scale)
        else:
            tput_term = 0.0
            harv_term = 0.0
        reward = tput_term + harv_term - e_move / self.motion_scale

        self.step_index += 1
        self.done = depleted or self.step_index >= cfg.episode_length
        return StepOutcome(
            next_state=self.encode_state(),
            reward=reward,
            reward_throughput_term=tput_term,
            reward_harvest_term=harv_term,
            throughput_bits=relayed_bits,
            harvested_j=harvested_j,
            motion_energy_j=e_move,
            transmit_energy_j=transmit_energy_j,
            covered_nodes=covered,
            done=self.done,
        )

    def encode_state(self) -> StateKey:
        links = self._links(self.auv_pos)
        with_data = 0
        undercharged = 0
        for i in links.covered:
            node = self.nodes[i]
            if node.data_buffer_bits > 0:
                with_data += 1
            if not node.store.full:
                undercharged += 1
        return StateKey(
            *self.auv_pos,
            covered_with_data=min(3, with_data),
            covered_undercharged=min(3, undercharged),
            gain_bin=links.gain_bin,
        )

    # ------------------------------------------------------------------

    def _links(self, pos: tuple[int, int, int]) -> _PosLinks:
        cached = self._link_cache.get(pos)
        if cached is not None:
            return cached
        cfg = self.config
        d = self._node_pos - np.asarray(pos, dtype=float)
        dz = d[:, 2]
        horiz2 = d[:, 0] ** 2 + d[:, 1] ** 2
        in_cone = (dz >= 0) & (horiz2 <= (dz * self._tan_half) ** 2)
        ranges = np.maximum(1.0, np.sqrt(horiz2 + dz * dz))
        uplink_snr = self._sl_node - transmission_loss_db(ranges, cfg.channel) - self._nl
        mask = in_cone & (uplink_snr >= cfg.node_modem.min_snr_db)
        idx = np.nonzero(mask)[0]

        up_snr = uplink_snr[idx]
        up_rate = shannon_throughput_bps(up_snr, cfg.channel, cfg.node_modem.min_snr_db)
        down_snr = self._sl_auv - transmission_loss_db(ranges[idx], cfg.channel) - self._nl
        down_power = harvestable_power(down_snr, cfg.node_harvest)

        relay_range = max(1.0, math.dist(pos, self._surface_station))
        relay_snr = self._sl_auv - transmission_loss_db(relay_range, cfg.channel) - self._nl
        relay_rate = shannon_throughput_bps(
            relay_snr, cfg.channel, self._auv_modem.min_snr_db
        )

        if idx.size:
            gain_bin = int(np.searchsorted(self._gain_edges, float(np.mean(up_snr))))
        else:
            gain_bin = 0
        links = _PosLinks(
            covered=idx,
            uplink_snr_db=np.atleast_1d(up_snr),
            uplink_rate_bps=np.atleast_1d(up_rate),
            downlink_power_w=np.atleast_1d(down_power),
            relay_rate_bps=float(relay_rate),
            gain_bin=gain_bin,
        )
        self._link_cache[pos] = links
        return links

    # ------------------------------------------------------------------

    def to_snapshot(self) -> dict:
        """JSON-safe snapshot for replay and debugging.

        Schema: ``config`` (the full EnvConfig as nested dicts), ``nodes``
        (list of {position, store_level_j, data_buffer_bits}), and ``auv``
        ({position, battery_level_j, relay_buffer_bits, step_index, done}).
        """
        return {
            "config": env_config_to_dict(self.config),
            "nodes": [
                {
                    "position": list(n.position),
                    "store_level_j": n.store.level_j,
                    "data_buffer_bits": n.data_buffer_bits,
                }
                for n in self.nodes
            ],
            "auv": {
                "position": list(self.auv_pos),
                "battery_level_j": self.auv_battery.level_j,
                "relay_buffer_bits": self.relay_buffer_bits,
                "step_index": self.step_index,
                "done": self.done,
            },
        }

    @classmethod
    def from_snapshot(cls, snapshot: dict) -> "Environment":
        env = cls(env_config_from_dict(snapshot["config"]))
        nodes = snapshot["nodes"]
        if len(nodes) != len(env.nodes):
            raise ValueError(
                f"snapshot has {len(nodes)} nodes, deployment has {len(env.nodes)}"
            )
        for node, rec in zip(env.nodes, nodes):
            node.position = tuple(int(c) for c in rec["position"])
            node.store = dataclasses.replace(
                env._initial_store, level_j=float(rec["store_level_j"])
            )
            node.data_buffer_bits = float(rec["data_buffer_bits"])
        env._node_pos = np.asarray([n.position for n in env.nodes], dtype=float)
        env._link_cache.clear()
        auv = snapshot["auv"]
        env.auv_pos = tuple(int(c) for c in auv["position"])
        env.auv_battery = dataclasses.replace(
            env.auv_battery, level_j=float(auv["battery_level_j"])
        )
        env.relay_buffer_bits = float(auv["relay_buffer_bits"])
        env.step_index = int(auv["step_index"])
        env.done = bool(auv["done"])
        return env


def deploy(config: EnvConfig) -> Environment:
    """Place nodes and the AUV per the seeded configuration."""
    return Environment(config)


# ---------------------------------------------------------------------------
# Config (de)serialization, shared by snapshots, manifests and the CLI.

def env_config_to_dict(config: EnvConfig) -> dict:
    return dataclasses.asdict(config)


def env_config_from_dict(d: dict) -> EnvConfig:
    d = dict(d)
    d["dims"] = tuple(d["dims"])
    d["channel"] = ChannelParams(**d["channel"])
    d["node_modem"] = ModemSpec(**d["node_modem"])
    if d.get("auv_modem") is not None:
        d["auv_modem"] = ModemSpec(**d["auv_modem"])
    d["node_harvest"] = HarvestSpec(**d["node_harvest"])
    auv = dict(d["auv"])
    auv["battery"] = EnergyStore(**auv["battery"])
    d["auv"] = AuvSpec(**auv)
    if d.get("surface_station_xy") is not None:
        d["surface_station_xy"] = tuple(d["surface_station_xy"])
    if d.get("auv_start_xy") is not None:
        d["auv_start_xy"] = tuple(d["auv_start_xy"])
    return EnvConfig(**d)
