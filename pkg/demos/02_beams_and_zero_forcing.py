"""
Beam clustering and zero forcing
================================

Four heads are picked greedily by channel norm while staying
semi-orthogonal; each then takes its most correlated partner. The ZF
precoder nulls every beam at the other heads, but partners still hear the
other beams.
"""

import numpy as np

from wearnoma.beamforming import build_plan, effective_gains, received_power_matrix
from wearnoma.channel import sample_channels
from wearnoma.linkmetrics import d2d_interference
from wearnoma.scenario import fig4_preset, sample_topology

cfg = fig4_preset()
rng = np.random.default_rng(7)
ch = sample_channels(sample_topology(cfg, rng), cfg, rng)
plan = build_plan(ch, cfg)
print("beams (ZF head first):", plan.beams)

G = received_power_matrix(ch.h_bs_cwd, plan.precoder)
np.set_printoptions(precision=2)
print("received power at heads, dB relative to own beam (rows: heads, cols: beams)")
heads = list(plan.zf_heads)
print(10 * np.log10(G[heads] / G[heads].max(axis=1, keepdims=True) + 1e-300))

# %%
# Effective gains fold in the inter-beam and D2D interference and fix the
# SIC order inside each beam.
gains, ordered = effective_gains(ch, plan, d2d_interference(ch, cfg), cfg)
for b, (beam, g) in enumerate(zip(ordered.beams, gains)):
    snr = 10 * np.log10(cfg.per_beam_power * g)
    print(f"beam {b}: users {beam}, P*gain = {np.round(snr, 1)} dB")
