"""
Link-level metrics of one drop: SINR, spectral efficiency, latency, outage
and connectivity.

SINRs here are assembled from the raw channel coefficients, independently of
the normalized gains used by the power allocation, so the two routes can be
checked against each other.

Under OMA a beam carries one CWD per resource unit. The K members of a beam
take turns over K orthogonal resource units, each with the whole beam power,
so a member's SE per resource unit is its single-user SE divided by K.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import NOMA, OMA, PowerAllocation
from .beamforming import BeamPlan, received_power_matrix
from .channel import ChannelState
from .scenario import ScenarioConfig

__all__ = [
    "DropMetrics",
    "slot_powers",
    "d2d_interference",
    "cwd_sinr",
    "dwd_sinr",
    "spectral_efficiency",
    "latency",
    "drop_metrics",
]


@dataclass(frozen=True)
class DropMetrics:
    """Metrics of one drop under one scheme.

    ``cwd_se`` follows the plan's beam order (beam-major, strongest first).
    ``latencies`` holds one entry per CWD then one per DWD pair; ``inf``
    marks a device in outage (zero SE).
    """

    scheme: str
    cwd_se: np.ndarray
    dwd_se: np.ndarray
    sum_se_cwd: float
    sum_se_dwd: float
    sum_se_total: float
    latencies: np.ndarray
    outage_count: int
    connectivity: int
    infeasible_beams: int = 0
    resampled: int = 0

    def __eq__(self, other):
        if not isinstance(other, DropMetrics):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in self.__dataclass_fields__)


def slot_powers(allocation: PowerAllocation, beam: int, slot: int):
    """Powers of a beam's members on the resource unit where `slot` is served.

    NOMA serves every member at once. OMA serves `slot` alone at the whole
    beam power.
    """
    p = np.asarray(allocation.powers[beam], dtype=float)
    if allocation.scheme == NOMA:
        return p
    return np.roll(p, slot)


def d2d_interference(channels: ChannelState, cfg: ScenarioConfig, d2d: bool = True):
    """Total DWD transmit power received by every candidate CWD (W)."""
    if not d2d or cfg.dwd_pairs_D == 0:
        return np.zeros(channels.h_bs_cwd.shape[0])
    return cfg.dwd_tx_power * channels.g_dwdtx_cwd.sum(axis=0)


def cwd_sinr(beam: int, slot: int, plan: BeamPlan, allocation: PowerAllocation,
             channels: ChannelState, cfg: ScenarioConfig, d2d: bool = True):
    """SINR of member `slot` of `beam` (linear).

    The user cancels every weaker member of its beam (decoded first) and
    treats the stronger members as interference; the head cancels all
    partners, the weakest member cancels nothing. Other beams interfere at
    the full per-beam power, as every member of a beam shares its precoder
    column.
    """
    i = plan.beams[beam][slot]
    rx = received_power_matrix(channels.h_bs_cwd[i:i + 1], plan.precoder)[0]
    p = slot_powers(allocation, beam, slot)
    intra = p[:slot].sum() * rx[beam]
    inter = plan.per_beam_power * (rx.sum() - rx[beam])
    dwd = d2d_interference(channels, cfg, d2d)[i]
    return p[slot] * rx[beam] / (cfg.noise_power + inter + dwd + intra)


def dwd_sinr(pair: int, plan: BeamPlan, channels: ChannelState, cfg: ScenarioConfig,
             bs_active: bool = True):
    """SINR of DWD pair `pair` (linear).

    Interference comes from every edge-node beam at the per-beam power and
    from every other pair's transmitter. ``bs_active=False`` silences the
    edge node (test hook).
    """
    signal = cfg.dwd_tx_power * channels.g_d2d[pair]
    bs = 0.0
    if bs_active:
        rx = received_power_matrix(channels.h_bs_dwdrx[pair:pair + 1], plan.precoder)[0]
        bs = plan.per_beam_power * rx.sum()
    others = cfg.dwd_tx_power * (channels.g_dwdtx_dwdrx[:, pair].sum()
                                 - channels.g_dwdtx_dwdrx[pair, pair])
    return signal / (cfg.noise_power + bs + others)


def spectral_efficiency(sinr):
    """Shannon SE ``log2(1 + sinr)`` in bit/s/Hz."""
    return np.log2(1.0 + np.asarray(sinr, dtype=float))


def latency(se, cfg: ScenarioConfig):
    """Transmission delay of one packet, ``L / (B * se)`` seconds.

    Zero SE gives ``inf``, the outage marker.
    """
    se = np.asarray(se, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(se > 0, cfg.packet_bits_L / (cfg.bandwidth_B * np.where(se > 0, se, 1.0)),
                       np.inf)
    return float(out) if out.ndim == 0 else out


def drop_metrics(plan: BeamPlan, allocation: PowerAllocation, channels: ChannelState,
                 cfg: ScenarioConfig, d2d: bool = True) -> DropMetrics:
    """Evaluate every link of a drop for one scheme."""
    K = cfg.users_per_beam_K
    share = 1.0 / K if allocation.scheme == OMA else 1.0
    cwd_se = np.array([
        share * spectral_efficiency(cwd_sinr(b, k, plan, allocation, channels, cfg, d2d))
        for b in range(len(plan.beams)) for k in range(K)])
    pairs = range(cfg.dwd_pairs_D) if d2d else range(0)
    dwd_se = np.array([spectral_efficiency(dwd_sinr(d, plan, channels, cfg)) for d in pairs],
                      dtype=float)
    per_ru = cfg.antennas_M * (K if allocation.scheme == NOMA else 1)
    lat = latency(np.concatenate([cwd_se, dwd_se]), cfg)
    sum_cwd = float(cwd_se.sum())
    sum_dwd = float(dwd_se.sum())
    return DropMetrics(
        scheme=allocation.scheme + ("+D2D" if d2d else ""),
        cwd_se=cwd_se,
        dwd_se=dwd_se,
        sum_se_cwd=sum_cwd,
        sum_se_dwd=sum_dwd,
        sum_se_total=sum_cwd + sum_dwd,
        latencies=lat,
        outage_count=int(np.isinf(lat).sum()),
        connectivity=per_ru + 2 * len(pairs),
        infeasible_beams=int(len(allocation.feasible) - sum(allocation.feasible)),
    )
