"""
Sum-rate against SNR
====================

Four users, 1024 antennas, 128 subcarriers. Every scheme is evaluated on
the same channel draws. Set ``TRIALS = 100`` for the full-size run (about
half a minute).
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from terabeam import SystemConfig
from terabeam.runner import SweepSpec, result_table, run_sumrate_sweep, snr_shift_db

TRIALS = 20

config = SystemConfig(trials=TRIALS)
result = run_sumrate_sweep(config, SweepSpec(), threads=4)
table = result_table(result)

fig, ax = plt.subplots(figsize=(6, 4))
for scheme, curve in table.items():
    snrs = sorted(curve)
    ax.plot(snrs, [curve[s][0] for s in snrs], marker="o", ms=3, label=scheme)
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("sum-rate (bps/Hz)")
ax.grid(alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig("sumrate_vs_snr.png", dpi=120)

# %%
# How much more SNR does the sub-connected TTD array need to match
# delay-phase precoding at 10 dB?
print(f"delay-phase lead over hybrid-sub-td: {snr_shift_db(result, 'delay-phase', 'hybrid-sub-td'):.2f} dB")
