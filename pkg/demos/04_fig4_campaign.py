"""
NOMA+D2D against OMA+D2D
========================

Paired drops of the reference cell (R = 1 km, M = 4, K = 2, D = 2, 10 m D2D
links, 10 W / 2 W) for growing candidate pools. Sum SE is reported as a
percentage of NOMA+D2D at the largest pool, and the latency CCDFs are
written out for plotting.
"""

import sys
from pathlib import Path

import numpy as np

from wearnoma.harness import emit_report, run_campaign
from wearnoma.scenario import fig4_preset

drops = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
cfg = fig4_preset().replace(drops_N=drops)
report = run_campaign(cfg, ["NOMA+D2D", "OMA+D2D"], sweep=("cwd_pool_Nc", [8, 16, 32]))

print(report.normalization)
print(f"{'Nc':>4} {'scheme':>9} {'sum SE':>8} {'CWD':>7} {'DWD':>7} {'%':>6} {'outage':>7} {'conn':>5}")
for point in report.points:
    for name, st in point.schemes.items():
        print(f"{point.sweep_value:>4} {name:>9} {st.mean_sum_se:8.2f} {st.mean_cwd_se:7.2f} "
              f"{st.mean_dwd_se:7.2f} {st.pct_normalized:6.1f} {st.outage_rate:7.3f} "
              f"{st.connectivity:5d}")

out = Path("results_fig4")
for path in emit_report(report, out, "csv") + emit_report(report, out, "json"):
    print("wrote", path)

# %%
# Latency CCDF at the default pool, if matplotlib is around.
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    for name, st in report.points[0].schemes.items():
        curve = np.array(st.ccdf)
        ax.semilogx(curve[:, 0] * 1e3, curve[:, 1], label=name)
    ax.set_xlabel("packet latency (ms)")
    ax.set_ylabel("P(latency > t)")
    ax.legend()
    fig.savefig(out / "latency_ccdf.png", dpi=120)
    print("wrote", out / "latency_ccdf.png")
