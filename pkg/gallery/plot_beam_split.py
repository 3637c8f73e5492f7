"""
Beam split across a 20 GHz band
===============================

A 1024-element array steered toward ``sin(theta) = 0.5`` with phase
shifters points its beam somewhere else at every other subcarrier. The
same array driven by true time delays keeps the beam on the user.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from terabeam import SystemConfig, array_response, beam_peak
from terabeam.metrics import beam_pattern, sin_grid

config = SystemConfig(n_rf=1, n_users=1)
fc, bw = config.carrier_hz, config.bandwidth_hz
freqs = [fc - bw / 2, fc, fc + bw / 2]
grid = sin_grid(8192)

# %%
# Phase shifters realize one phase per antenna, designed at the carrier.
ps_weights = array_response(config.n_antennas, 0.5, fc, fc)

fig, axes = plt.subplots(1, 2, figsize=(10, 3.5), sharey=True)
for f in freqs:
    axes[0].plot(grid, beam_pattern(ps_weights, f, config), label=f"{f / 1e9:.0f} GHz")
    ttd = array_response(config.n_antennas, 0.5, f, fc)
    axes[1].plot(grid, beam_pattern(ttd, f, config), label=f"{f / 1e9:.0f} GHz")
for ax, title in zip(axes, ["phase shifters", "true time delay"]):
    ax.set_xlim(0.45, 0.55)
    ax.set_xlabel("sin(theta)")
    ax.set_title(title)
    ax.legend()
axes[0].set_ylabel("normalized array gain")
fig.tight_layout()
fig.savefig("beam_split.png", dpi=120)

# %%
# The phase-shifter peak follows ``sin(theta') = (fc / f) sin(theta)``.
for f in freqs:
    print(f"{f / 1e9:6.1f} GHz  peak {beam_peak(ps_weights, f, config):+.4f}  predicted {0.5 * fc / f:+.4f}")
