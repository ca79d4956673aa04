"""
Per-beam power allocation.

Within a beam the users are ordered by descending normalized gain ``g``
(1/W). With SIC, user k cancels every weaker user and sees the stronger
users' powers as interference, so its SINR is

    p_k g_k / (1 + g_k * sum(p_j for j < k)).

Maximizing the beam's sum SE subject to ``SE_k >= Rmin`` for every non-head
user puts the QoS constraints at equality (sum SE increases with power moved
to a stronger user), which gives the closed form below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NOMA",
    "OMA",
    "PowerAllocation",
    "noma_beam_power",
    "oma_beam_power",
    "beam_rates",
    "grid_oracle",
    "allocate",
]

NOMA = "NOMA"
OMA = "OMA"


@dataclass(frozen=True)
class PowerAllocation:
    powers: tuple          # per beam, ndarray of K powers aligned with the plan
    feasible: tuple        # per beam bool
    scheme: str


def noma_beam_power(gains_desc, P_beam, Rmin):
    """Sum-SE optimal NOMA powers under a minimum rate for non-head users.

    Each non-head user gets exactly the power that meets `Rmin` given the
    interference of every stronger user; the head takes the rest. Solved
    from the weakest user upward: with ``a = 2**Rmin - 1`` and ``S`` the
    power already given to weaker users,

        p_k = a / (1 + a) * (1 / g_k + P_beam - S).

    For K = 2 this is ``p2 = (2**Rmin - 1)(1 + P g2) / (2**Rmin g2)``.

    Parameters
    ----------
    gains_desc : array_like
        K positive normalized gains sorted in descending order.
    P_beam : float
        Beam power budget (W).
    Rmin : float
        Minimum SE of every non-head user (bit/s/Hz).

    Returns
    -------
    powers : ndarray
        K powers (W).
    feasible : bool
        Whether the head is left with non-negative power. When it is not,
        even the whole budget cannot lift the weakest user to `Rmin`
        (``P_beam * g_K < 2**Rmin - 1`` for K = 2), so every non-head user is
        left in outage and the head gets the whole budget.
    """
    g = np.asarray(gains_desc, dtype=float)
    K = g.size
    p = np.zeros(K)
    a = 2.0 ** Rmin - 1.0
    below = 0.0
    for k in range(K - 1, 0, -1):
        p[k] = a / (1.0 + a) * (1.0 / g[k] + P_beam - below)
        below += p[k]
    head = P_beam - below
    if head < 0:
        return oma_beam_power(P_beam, K), False
    p[0] = head
    return p, True


def oma_beam_power(P_beam, K=1):
    """Whole beam power to the head, zero to every other slot."""
    p = np.zeros(K)
    p[0] = P_beam
    return p


def beam_rates(gains_desc, powers):
    """Per-user SE (bit/s/Hz) of one beam under SIC in gain order."""
    g = np.asarray(gains_desc, dtype=float)
    p = np.asarray(powers, dtype=float)
    stronger = np.concatenate([[0.0], np.cumsum(p)[:-1]])
    return np.log2(1.0 + p * g / (1.0 + g * stronger))


def grid_oracle(gains_desc, P_beam, Rmin, grid_points=100_000):
    """Exhaustive search of the two-user power split.

    Evaluates every ``p2`` on a uniform grid over ``[0, P_beam]``, keeps the
    points where the weak user reaches `Rmin` and returns the best one.

    Returns
    -------
    powers : ndarray or None
        ``(p1, p2)`` of the best feasible grid point, None if none is feasible.
    best_se : float
        Its sum SE (``-inf`` when nothing is feasible).
    """
    g1, g2 = np.asarray(gains_desc, dtype=float)
    if grid_points < 100:
        raise ValueError("grid_points must be at least 100")
    if P_beam == 0:
        return np.zeros(2), 0.0
    p2 = np.linspace(0.0, P_beam, grid_points)
    p1 = P_beam - p2
    r1 = np.log2(1.0 + p1 * g1)
    r2 = np.log2(1.0 + p2 * g2 / (1.0 + p1 * g2))
    ok = r2 >= Rmin
    if not ok.any():
        return None, -np.inf
    total = np.where(ok, r1 + r2, -np.inf)
    best = int(np.argmax(total))
    return np.array([p1[best], p2[best]]), float(total[best])


def allocate(gains, P_beam, Rmin, scheme):
    """Allocate powers in every beam under `scheme` ('NOMA' or 'OMA')."""
    powers, feasible = [], []
    for g in gains:
        if scheme == NOMA:
            p, ok = noma_beam_power(g, P_beam, Rmin)
        elif scheme == OMA:
            p, ok = oma_beam_power(P_beam, len(g)), True
        else:
            raise ValueError(f"unknown multiple-access scheme {scheme!r}")
        powers.append(p)
        feasible.append(ok)
    return PowerAllocation(powers=tuple(powers), feasible=tuple(feasible), scheme=scheme)
