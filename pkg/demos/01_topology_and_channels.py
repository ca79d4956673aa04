"""
Topology and channels of one drop
=================================

A drop places the candidate CWDs and the DWD transmitters uniformly in the
cell disk and each DWD receiver 10 m from its transmitter. Every edge-node
link is a 4-antenna Rayleigh vector scaled by path loss.
"""

import numpy as np

from wearnoma.channel import CELLULAR, D2D, path_gain, path_loss_db, sample_channels
from wearnoma.scenario import fig4_preset, sample_topology

cfg = fig4_preset()
rng = np.random.default_rng(1)

topo = sample_topology(cfg, rng)
print("CWD distances (m):", np.round(np.hypot(*topo.cwd_positions.T), 1))
print("D2D link lengths (m):",
      np.round(np.hypot(*(topo.dwd_rx_positions - topo.dwd_tx_positions).T), 6))

# Path loss of the two link kinds.
for d in (10, 100, 500, 1000):
    print(f"{d:5d} m   cellular {path_loss_db(d, CELLULAR, cfg):6.1f} dB"
          f"   d2d {path_loss_db(d, D2D, cfg):6.1f} dB")

ch = sample_channels(topo, cfg, rng)
print("per-antenna |h|^2 of CWD 0:", np.abs(ch.h_bs_cwd[0]) ** 2)
print("own-link D2D gains:", ch.g_d2d, "(path gain", path_gain(10.0, D2D, cfg), ")")

# %%
# Averaged over many fades, |h|^2 recovers the path gain and the power has
# the exponential second moment E|h|^4 = 2 E^2|h|^2.
from wearnoma.scenario import Topology

many = cfg.replace(cwd_pool_Nc=20_000, dwd_pairs_D=0)
fixed = Topology(cwd_positions=np.tile([250.0, 0.0], (20_000, 1)),
                 dwd_tx_positions=np.zeros((0, 2)), dwd_rx_positions=np.zeros((0, 2)))
power = np.abs(sample_channels(fixed, many, rng).h_bs_cwd) ** 2
beta = path_gain(250.0, CELLULAR, cfg)
print("mean power / path gain:", power.mean() / beta)
print("E|h|^4 / E^2|h|^2:", np.mean(power ** 2) / power.mean() ** 2)
