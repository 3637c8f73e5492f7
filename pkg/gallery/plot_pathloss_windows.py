"""
Distance-dependent transmission windows
=======================================

Molecular absorption adds ``k_abs(f) * D`` dB on top of free-space loss,
so the band where the excess stays below 10 dB shrinks as the link gets
longer.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from terabeam import AbsorptionTable, available_window, path_loss_db

table = AbsorptionTable.default()
freqs = np.linspace(*table.coverage, 2000)

fig, ax = plt.subplots(figsize=(6, 4))
for d in (1.0, 10.0, 100.0):
    ax.plot(freqs / 1e12, path_loss_db(freqs, d, table), label=f"{d:g} m")
    windows = available_window(d, table, 10.0)
    print(f"{d:5g} m: " + ", ".join(f"{lo / 1e12:.3f}-{hi / 1e12:.3f} THz" for lo, hi in windows))
ax.set_xlabel("frequency (THz)")
ax.set_ylabel("path loss (dB)")
ax.legend()
fig.tight_layout()
fig.savefig("pathloss_windows.png", dpi=120)
