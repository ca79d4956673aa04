"""
User clustering and zero-forcing precoding.

The edge node forms M beams of K users each. One user per beam (the ZF head)
defines that beam's direction; the zero-forcing precoder nulls every beam at
the other heads. Partners share the head's beam vector and are separated
from it in the power domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelState
from .scenario import ScenarioConfig

__all__ = [
    "IllConditionedError",
    "BeamPlan",
    "MAX_CONDITION",
    "normalized_correlation",
    "select_clusters",
    "zf_precoder",
    "build_plan",
    "effective_gains",
]

MAX_CONDITION = 1e8
CORRELATION_THRESHOLD = 0.5
THRESHOLD_STEP = 0.1


class IllConditionedError(np.linalg.LinAlgError):
    """Head channel matrix too ill-conditioned for zero forcing.

    Signals the caller to resample the drop.
    """

    def __init__(self, condition, limit=MAX_CONDITION):
        self.condition = condition
        super().__init__(f"head channel condition number {condition:.3g} >= {limit:g}")


@dataclass(frozen=True)
class BeamPlan:
    """Users per beam plus the precoder.

    ``beams[b]`` lists the CWD indices of beam b, index 0 being the head
    (strongest user). ``precoder[:, b]`` is the unit-norm beam vector of
    beam b. ``zf_heads[b]`` is the user the precoder was computed for.
    """

    beams: tuple
    precoder: np.ndarray
    per_beam_power: float
    zf_heads: tuple

    @property
    def assigned(self):
        return [i for beam in self.beams for i in beam]


def normalized_correlation(h, H):
    """``|h^H g| / (||h|| ||g||)`` of vector `h` against each row of `H`."""
    H = np.atleast_2d(H)
    num = np.abs(H.conj() @ h)
    return num / (np.linalg.norm(h) * np.linalg.norm(H, axis=1))


def select_clusters(channels: ChannelState, cfg: ScenarioConfig,
                    threshold: float = CORRELATION_THRESHOLD):
    """Choose M beams of K users from the candidate pool.

    Heads are picked greedily by channel norm, skipping candidates whose
    normalized correlation with an already chosen head exceeds `threshold`.
    If the pool runs out the threshold is raised by 0.1 and the scan
    repeats. Partners are then dealt out round-robin over the beams, each
    beam taking the unassigned user most correlated with its head. Finally
    the member with the largest channel norm becomes the beam's head.

    Returns
    -------
    list of list of int
        ``M`` lists of ``K`` CWD indices, head first, remaining members in
        the order they were added.
    """
    H = channels.h_bs_cwd
    M, K = cfg.antennas_M, cfg.users_per_beam_K
    if H.shape[0] < M * K:
        raise ValueError("candidate pool smaller than M·K")
    norms = np.linalg.norm(H, axis=1)
    order = np.argsort(-norms, kind="stable")

    heads = []
    thr = threshold
    while len(heads) < M:
        for i in order:
            if len(heads) == M:
                break
            if i in heads:
                continue
            if not heads or np.all(normalized_correlation(H[i], H[heads]) <= thr):
                heads.append(int(i))
        thr += THRESHOLD_STEP

    beams = [[h] for h in heads]
    free = [int(i) for i in order if i not in heads]
    for _ in range(K - 1):
        for beam in beams:
            corr = normalized_correlation(H[beam[0]], H[free])
            beam.append(free.pop(int(np.argmax(corr))))

    for beam in beams:
        top = max(range(K), key=lambda k: norms[beam[k]])
        beam.insert(0, beam.pop(top))
    return beams


def zf_precoder(head_channels, max_condition: float | None = None):
    """Zero-forcing precoder with unit-norm columns.

    Parameters
    ----------
    head_channels : ndarray, complex, (M, M)
        Row b is the channel ``h_b`` of beam b's head, so the signal received
        by head b from beam b' is ``h_b^H w_b'`` with ``h^H`` taken as the
        conjugate of the row.

    Returns
    -------
    ndarray, complex, (M, M)
        Column b is ``w_b``; ``h_b'^H w_b = 0`` for ``b' != b``.

    Raises
    ------
    IllConditionedError
        If the condition number of `head_channels` is at least `max_condition`
        (default `MAX_CONDITION`).
    """
    if max_condition is None:
        max_condition = MAX_CONDITION
    Hh = np.asarray(head_channels, dtype=complex)
    cond = np.linalg.cond(Hh)
    if not np.isfinite(cond) or cond >= max_condition:
        raise IllConditionedError(cond, max_condition)
    # Received amplitudes are conj(Hh) @ W; make that diagonal.
    W = np.linalg.pinv(Hh.conj())
    return W / np.linalg.norm(W, axis=0, keepdims=True)


def build_plan(channels: ChannelState, cfg: ScenarioConfig) -> BeamPlan:
    """Cluster the pool and compute the ZF precoder on the heads."""
    beams = select_clusters(channels, cfg)
    heads = tuple(beam[0] for beam in beams)
    W = zf_precoder(channels.h_bs_cwd[list(heads)])
    W.setflags(write=False)
    return BeamPlan(beams=tuple(tuple(b) for b in beams), precoder=W,
                    per_beam_power=cfg.per_beam_power, zf_heads=heads)


def received_power_matrix(h_rows, precoder):
    """``|h_i^H w_b|**2`` for every row i of `h_rows` and beam b."""
    return np.abs(np.conj(h_rows) @ precoder) ** 2


def effective_gains(channels: ChannelState, plan: BeamPlan,
                    d2d_interference_per_cwd, cfg: ScenarioConfig):
    """Normalized per-user gains and the plan re-sorted by them.

    For user i in beam b the gain is ``|h_i^H w_b|^2`` over noise plus
    inter-beam interference (each other beam at full per-beam power) plus the
    D2D interference power received by user i, in 1/W.

    Parameters
    ----------
    d2d_interference_per_cwd : array_like, (Nc,)
        Summed D2D power received by every candidate CWD, in W.

    Returns
    -------
    gains : list of ndarray
        ``gains[b]`` holds beam b's gains in descending order.
    plan : BeamPlan
        Same precoder, each beam's members re-sorted by descending gain.
    """
    d2d = np.asarray(d2d_interference_per_cwd, dtype=float)
    G = received_power_matrix(channels.h_bs_cwd, plan.precoder)
    gains, beams = [], []
    for b, beam in enumerate(plan.beams):
        idx = np.asarray(beam)
        own = G[idx, b]
        inter = plan.per_beam_power * (G[idx].sum(axis=1) - own)
        gamma = own / (cfg.noise_power + inter + d2d[idx])
        srt = np.argsort(-gamma, kind="stable")
        gains.append(gamma[srt])
        beams.append(tuple(int(i) for i in idx[srt]))
    return gains, BeamPlan(beams=tuple(beams), precoder=plan.precoder,
                           per_beam_power=plan.per_beam_power, zf_heads=plan.zf_heads)
