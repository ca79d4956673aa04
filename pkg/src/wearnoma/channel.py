"""
Large-scale path loss and small-scale Rayleigh fading.

Edge-node links are length-M complex vectors, one entry per transmit antenna.
Every wearable has a single antenna, so device-originated links are scalar
power gains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig, Topology

__all__ = [
    "CELLULAR",
    "D2D",
    "ChannelState",
    "path_loss_db",
    "path_gain",
    "complex_gaussian",
    "sample_channels",
]

CELLULAR = "cellular"
D2D = "d2d"


def _coefficients(link_kind, cfg):
    if link_kind == CELLULAR:
        return cfg.pl_cell_intercept_dB, cfg.pl_cell_slope
    if link_kind == D2D:
        return cfg.pl_d2d_intercept_dB, cfg.pl_d2d_slope
    raise ValueError(f"unknown link kind {link_kind!r}")


def path_loss_db(distance, link_kind, cfg: ScenarioConfig):
    """Path loss in dB, ``intercept + slope * log10(d_km)``.

    Parameters
    ----------
    distance : float or array_like
        Link distance in metres, at least ``cfg.min_link_distance``.
    link_kind : {'cellular', 'd2d'}
    cfg : ScenarioConfig

    Returns
    -------
    float or ndarray
        Attenuation in dB, same shape as `distance`.
    """
    intercept, slope = _coefficients(link_kind, cfg)
    d = np.asarray(distance, dtype=float)
    if np.any(d < cfg.min_link_distance):
        raise ValueError(
            f"distance below min_link_distance ({cfg.min_link_distance} m)")
    out = intercept + slope * np.log10(d / 1000.0)
    return float(out) if out.ndim == 0 else out


def path_gain(distance, link_kind, cfg: ScenarioConfig):
    """Linear power gain of a link (``10**(-PL/10)``)."""
    return 10.0 ** (-np.asarray(path_loss_db(distance, link_kind, cfg)) / 10.0)


def complex_gaussian(rng: np.random.Generator, shape):
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelState:
    """Channel coefficients of one drop.

    Attributes
    ----------
    h_bs_cwd : ndarray, complex, (Nc, M)
        Edge node to every candidate CWD.
    h_bs_dwdrx : ndarray, complex, (D, M)
        Edge node to every DWD receiver.
    g_d2d : ndarray, (D,)
        Power gain of each pair's own link.
    g_dwdtx_cwd : ndarray, (D, Nc)
        DWD transmitter d to CWD i.
    g_dwdtx_dwdrx : ndarray, (D, D)
        DWD transmitter d to DWD receiver d'; the diagonal is `g_d2d`.
    """

    h_bs_cwd: np.ndarray
    h_bs_dwdrx: np.ndarray
    g_d2d: np.ndarray
    g_dwdtx_cwd: np.ndarray
    g_dwdtx_dwdrx: np.ndarray

    def __post_init__(self):
        for name in ("h_bs_cwd", "h_bs_dwdrx", "g_d2d", "g_dwdtx_cwd", "g_dwdtx_dwdrx"):
            getattr(self, name).setflags(write=False)


def _clamped_distance(a, b, cfg):
    # Device-to-device cross links may land closer than the guard distance.
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return np.maximum(d, cfg.min_link_distance)


def sample_channels(topology: Topology, cfg: ScenarioConfig,
                    rng: np.random.Generator, fading: bool = True) -> ChannelState:
    """Draw every channel coefficient of a drop.

    Each coefficient is ``sqrt(path gain)`` times an i.i.d. unit-variance
    complex Gaussian. With ``fading=False`` the fading factor is forced to 1
    (test hook), so every ``|h|**2`` equals the path gain exactly.

    CWD antenna fades, DWD-to-CWD fades and the remaining DWD fades come
    from separate child streams, drawn CWD-major, so a larger candidate pool
    extends a smaller one and the number of pairs does not disturb the CWD
    antenna fades.
    """
    M, D = cfg.antennas_M, cfg.dwd_pairs_D
    Nc = topology.cwd_positions.shape[0]
    cwd_rng, cross_rng, dwd_rng = rng.spawn(3)

    d_cwd = np.maximum(np.linalg.norm(topology.cwd_positions, axis=1), cfg.min_link_distance)
    d_rx = np.maximum(np.linalg.norm(topology.dwd_rx_positions, axis=1), cfg.min_link_distance)
    beta_cwd = path_gain(d_cwd, CELLULAR, cfg)
    beta_rx = path_gain(d_rx, CELLULAR, cfg)
    beta_tx_cwd = path_gain(_clamped_distance(topology.dwd_tx_positions,
                                              topology.cwd_positions, cfg), D2D, cfg)
    beta_tx_rx = path_gain(_clamped_distance(topology.dwd_tx_positions,
                                             topology.dwd_rx_positions, cfg), D2D, cfg)

    if fading:
        f_cwd = complex_gaussian(cwd_rng, (Nc, M))
        f_cross = complex_gaussian(cross_rng, (Nc, D)).T
        f_bs_rx = complex_gaussian(dwd_rng, (D, M))
        f_tx_rx = complex_gaussian(dwd_rng, (D, D))
    else:
        f_cwd = np.ones((Nc, M), dtype=complex)
        f_cross = np.ones((D, Nc), dtype=complex)
        f_bs_rx = np.ones((D, M), dtype=complex)
        f_tx_rx = np.ones((D, D), dtype=complex)

    h_bs_cwd = np.sqrt(beta_cwd)[:, None] * f_cwd
    h_bs_dwdrx = np.sqrt(beta_rx)[:, None] * f_bs_rx
    g_dwdtx_cwd = beta_tx_cwd * np.abs(f_cross) ** 2
    g_dwdtx_dwdrx = beta_tx_rx * np.abs(f_tx_rx) ** 2
    return ChannelState(
        h_bs_cwd=h_bs_cwd,
        h_bs_dwdrx=h_bs_dwdrx,
        g_d2d=np.diag(g_dwdtx_dwdrx).copy(),
        g_dwdtx_cwd=g_dwdtx_cwd,
        g_dwdtx_dwdrx=g_dwdtx_dwdrx,
    )
