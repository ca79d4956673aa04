"""
Scenario configuration and random network topologies.

A scenario is a single circular cell of radius ``cell_radius_R`` (km) with the
edge node at the origin, ``cwd_pool_Nc`` candidate cellular-mode wearables and
``dwd_pairs_D`` device-to-device pairs. Positions are in metres.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "Topology",
    "validate_config",
    "fig4_preset",
    "load_config",
    "save_config",
    "config_from_dict",
    "sample_topology",
]


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants.

    ``errors`` holds one message per violated invariant, each naming the
    offending field.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ScenarioConfig:
    """All parameters of a simulation campaign.

    Defaults reproduce the wearable cell of the reference evaluation
    (R = 1 km, M = 4, K = 2, D = 2, R_d = 10 m, 10 W / 2 W).
    """

    cell_radius_R: float = 1.0            # km
    antennas_M: int = 4
    users_per_beam_K: int = 2
    dwd_pairs_D: int = 2
    d2d_distance_Rd: float = 10.0       # m
    bs_power_total: float = 10.0         # W
    dwd_tx_power: float = 2.0            # W
    noise_power: float = 3.981e-14       # W, -174 dBm/Hz over 10 MHz
    cwd_pool_Nc: int = 8
    min_rate_Rmin: float = 0.5           # bit/s/Hz, non-head NOMA users
    bandwidth_B: float = 10e6            # Hz
    packet_bits_L: float = 1e5           # bit
    drops_N: int = 10_000
    master_seed: int = 20180101
    min_link_distance: float = 1.0       # m
    pl_cell_intercept_dB: float = 128.1
    pl_cell_slope: float = 37.6
    pl_d2d_intercept_dB: float = 148.0
    pl_d2d_slope: float = 40.0

    @property
    def cell_radius_m(self) -> float:
        return 1000.0 * self.cell_radius_R

    @property
    def per_beam_power(self) -> float:
        return self.bs_power_total / self.antennas_M

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_INT_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig) if f.type == "int"}


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Check every invariant of `cfg` and return it unchanged.

    Raises
    ------
    ConfigError
        Listing every violated invariant (not just the first).
    """
    errors = []

    def positive(name):
        if not getattr(cfg, name) > 0:
            errors.append(f"{name} must be positive")

    def non_negative(name):
        if not getattr(cfg, name) >= 0:
            errors.append(f"{name} must be non-negative")

    for name in ("cell_radius_R", "d2d_distance_Rd", "min_link_distance",
                 "bs_power_total", "noise_power", "bandwidth_B", "packet_bits_L"):
        positive(name)
    for name in ("dwd_tx_power", "min_rate_Rmin", "dwd_pairs_D"):
        non_negative(name)
    for name in ("antennas_M", "users_per_beam_K", "drops_N"):
        if not getattr(cfg, name) >= 1:
            errors.append(f"{name} must be at least 1")
    for name in _INT_FIELDS:
        value = getattr(cfg, name)
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            errors.append(f"{name} must be an integer")
    if cfg.cwd_pool_Nc < cfg.antennas_M * cfg.users_per_beam_K:
        errors.append(
            f"cwd_pool_Nc: pool smaller than M·K "
            f"({cfg.cwd_pool_Nc} < {cfg.antennas_M * cfg.users_per_beam_K})")
    if cfg.min_link_distance >= cfg.cell_radius_m:
        errors.append("min_link_distance must be smaller than the cell radius")
    if errors:
        raise ConfigError(errors)
    return cfg


def fig4_preset() -> ScenarioConfig:
    return ScenarioConfig()


def config_from_dict(data: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a config from a flat mapping; unknown keys are an error."""
    base = base or ScenarioConfig()
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError([f"unknown configuration key: {k}" for k in unknown])
    values = {}
    for key, value in data.items():
        if key in _INT_FIELDS and isinstance(value, float) and value.is_integer():
            value = int(value)
        values[key] = value
    return dataclasses.replace(base, **values)


def load_config(path) -> ScenarioConfig:
    """Load and validate a flat JSON key/value configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError(["configuration file must hold a flat JSON object"])
    return validate_config(config_from_dict(data))


def save_config(cfg: ScenarioConfig, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(cfg.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path


@dataclass(frozen=True)
class Topology:
    """Device positions of one drop, in metres, edge node at the origin."""

    cwd_positions: np.ndarray        # (Nc, 2)
    dwd_tx_positions: np.ndarray     # (D, 2)
    dwd_rx_positions: np.ndarray     # (D, 2)
    edge_node: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        for arr in (self.cwd_positions, self.dwd_tx_positions,
                    self.dwd_rx_positions, self.edge_node):
            arr.setflags(write=False)


def _uniform_disk(rng, n, r_min, r_max):
    # Inverse CDF of r^2 on the annulus: same law as rejecting points of the
    # full disk that fall inside r_min, and draws are prefix-stable in n.
    u = rng.random((n, 2))
    r = np.sqrt(r_min ** 2 + (r_max ** 2 - r_min ** 2) * u[:, 0])
    theta = 2.0 * np.pi * u[:, 1]
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def sample_topology(cfg: ScenarioConfig, rng: np.random.Generator) -> Topology:
    """Draw a random topology.

    CWDs and DWD transmitters are uniform over the cell disk (excluding the
    guard radius ``min_link_distance`` around the edge node). Each DWD
    receiver sits at distance ``d2d_distance_Rd`` from its transmitter at a
    uniform angle, redrawn until it also clears the guard radius.

    CWDs and DWDs use independent child streams of `rng`, so changing the
    pool size leaves the DWD layout untouched and the first ``n`` CWDs of a
    larger pool equal a pool of size ``n``.
    """
    cwd_rng, dwd_rng = rng.spawn(2)
    R = cfg.cell_radius_m
    r_min = cfg.min_link_distance
    cwd = _uniform_disk(cwd_rng, cfg.cwd_pool_Nc, r_min, R)

    tx = _uniform_disk(dwd_rng, cfg.dwd_pairs_D, r_min, R)
    rx = np.empty_like(tx)
    for d in range(cfg.dwd_pairs_D):
        while True:
            phi = 2.0 * np.pi * dwd_rng.random()
            cand = tx[d] + cfg.d2d_distance_Rd * np.array([np.cos(phi), np.sin(phi)])
            if np.hypot(*cand) >= r_min:
                break
        rx[d] = cand
    return Topology(cwd_positions=cwd, dwd_tx_positions=tx, dwd_rx_positions=rx)
