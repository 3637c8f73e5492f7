"""
How many time delayers does delay-phase precoding need?
=======================================================

Delay-phase precoding splits the array into ``K_d`` groups, each fed by one
true-time delayer. Inside a group the phase shifters still squint, so the
gain toward the user behaves like a Dirichlet kernel over ``N / K_d``
elements. One delayer is plain phase-shifter beamforming; one per antenna
is the full true-time-delay array.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from terabeam import SystemConfig, UserPath, array_gain_profile, delay_phase, gen_channel

config = SystemConfig(n_rf=1, n_users=1)
user = UserPath(1.0 + 0j, 0.8, 20.0)
channels = gen_channel(config, [user])
freqs_ghz = config.subcarrier_hz() / 1e9

fig, ax = plt.subplots(figsize=(6, 3.5))
for kd in (1, 4, 16, 32, 1024):
    gain = array_gain_profile(delay_phase(channels, kd), user, config)
    ax.plot(freqs_ghz, gain, label=f"K_d = {kd}")
    print(f"K_d={kd:5d}  worst-case gain {gain.min():.3f}")
ax.set_xlabel("frequency (GHz)")
ax.set_ylabel("normalized array gain")
ax.legend()
fig.tight_layout()
fig.savefig("delay_phase_gain.png", dpi=120)
