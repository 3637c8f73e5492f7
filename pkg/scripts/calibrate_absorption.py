"""Build the default piecewise-constant absorption table.

Three Gaussian absorption bands sit on top of a weak continuum that grows
with the square of frequency. Band widths and amplitudes are solved so that
the excess loss crosses the 10 dB threshold at

    10 m  -> 0.51 THz and 0.68 THz
    100 m -> 0.56 THz and 0.67 THz

The continuous profile is then sampled at the centre of 1 GHz segments
spanning 0.1-1 THz and written as JSON.

Usage::

    python scripts/calibrate_absorption.py src/terabeam/data/absorption_default.json
"""
import json
import sys

import numpy as np
from scipy.optimize import fsolve

THZ = 1e12
CONTINUUM = 0.02  # dB/m at 1 THz
LOW_CENTER, HIGH_CENTER = 0.47, 0.70  # THz
EXTRA_BAND = (0.92, 8.0, 0.015)  # centre THz, peak dB/m, sigma THz
THRESHOLD_DB = 10.0


def gauss(f, amp, center, sigma):
    return amp * np.exp(-0.5 * ((f - center) / sigma) ** 2)


def profile(f, p):
    a_lo, s_lo, a_hi, s_hi = p
    c, a, s = EXTRA_BAND
    return (
        CONTINUUM * f**2
        + gauss(f, a_lo, LOW_CENTER, s_lo)
        + gauss(f, a_hi, HIGH_CENTER, s_hi)
        + gauss(f, a, c, s)
    )


def residuals(p):
    # excess loss k(f) * D minus threshold at the four window edges
    return [
        profile(0.51, p) * 10 - THRESHOLD_DB,
        profile(0.56, p) * 100 - THRESHOLD_DB,
        profile(0.67, p) * 100 - THRESHOLD_DB,
        profile(0.68, p) * 10 - THRESHOLD_DB,
    ]


def main(path):
    p = fsolve(residuals, [1.8, 0.037, 6.3, 0.0104], xtol=1e-13)
    assert np.max(np.abs(residuals(p))) < 1e-9, residuals(p)
    edges = np.round(np.linspace(0.1, 1.0, 901), 6)
    mids = 0.5 * (edges[:-1] + edges[1:])
    k = profile(mids, p)
    segments = [
        {
            "f_lo_hz": float(lo * THZ),
            "f_hi_hz": float(hi * THZ),
            "k_abs_db_per_m": float(np.round(v, 9)),
        }
        for lo, hi, v in zip(edges[:-1], edges[1:], k)
    ]
    with open(path, "w") as fh:
        json.dump({"segments": segments}, fh, indent=1)
    print("bands (amp dB/m, sigma THz):", p)


if __name__ == "__main__":
    main(sys.argv[1])
