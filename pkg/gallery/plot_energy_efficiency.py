"""
Energy efficiency against the number of users
=============================================

Hardware power follows each structure's component count (baseband 250 mW,
RF chain 250 mW, phase shifter 30 mW, time delayer 80 mW) plus 2.5 W of
transmit power. The number of RF chains tracks the number of users.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from terabeam import SystemConfig
from terabeam.runner import SweepSpec, result_table, run_ee_sweep

TRIALS = 10

spec = SweepSpec(kind="ee-sweep", user_grid=(1, 2, 4, 8, 16),
                 schemes=("analog", "digital", "hybrid-full-ps", "hybrid-sub-ps", "hybrid-full-td",
                          "hybrid-sub-td", "delay-phase"))
print(f"operating SNR: {spec.operating_snr_db} dB")
table = result_table(run_ee_sweep(SystemConfig(trials=TRIALS), spec, threads=4))

fig, ax = plt.subplots(figsize=(6, 4))
for scheme, curve in table.items():
    ks = sorted(curve)
    ax.plot(ks, [curve[k][0] for k in ks], marker="o", ms=3, label=scheme)
ax.set_xlabel("number of users")
ax.set_ylabel("energy efficiency (Gbps/W)")
ax.set_xscale("log", base=2)
ax.grid(alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig("energy_efficiency.png", dpi=120)
