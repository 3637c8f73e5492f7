"""Exit criteria at full scale.

Each test appends one PASS/FAIL line that pytest prints in its terminal
summary. The sum-rate and energy-efficiency sweeps run once per module with
the default configuration (N=1024, K=4, M=128, K_d=32, 100 trials).
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from terabeam.channel import PowerProfile, SystemConfig, array_response, gen_channel, sample_users
from terabeam.cli import main
from terabeam.metrics import array_gain_profile, beam_pattern, dirichlet_gain, hardware_power, sin_grid
from terabeam.precoders import analog_beamforming, build_precoder, delay_phase
from terabeam.runner import (
    MULTIUSER_SCHEMES,
    SweepSpec,
    read_csv,
    result_table,
    run_ee_sweep,
    run_sumrate_sweep,
    snr_shift_db,
)

from conftest import ACCEPTANCE_LINES, brute_gain, user

pytestmark = pytest.mark.slow

GAP_TARGET_DB, GAP_TOL_DB = 5.0, 2.0
RUNTIME_LIMIT_S = 600.0
TIE_RTOL = 1e-9
HW_TOL_W = 1e-9
DIRICHLET_TOL = 1e-9
ISR_LIMIT = 1e-9
WINDOW_TOL_HZ = 0.01e12
GRID_POINTS = 8192
GRID_STEP = 2 / (GRID_POINTS - 1)


def record(name, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def fig4():
    config = SystemConfig()
    start = time.perf_counter()
    result = run_sumrate_sweep(config, SweepSpec(schemes=MULTIUSER_SCHEMES), threads=1)
    return result, time.perf_counter() - start


@pytest.fixture(scope="module")
def fig5():
    spec = SweepSpec(kind="ee-sweep", user_grid=(2, 4, 8), schemes=MULTIUSER_SCHEMES)
    return result_table(run_ee_sweep(SystemConfig(), spec))


def test_1_delay_phase_gap(fig4):
    result, elapsed = fig4
    shift = snr_shift_db(result, "delay-phase", "hybrid-sub-td", at_snr_db=10.0)
    ok = abs(shift - GAP_TARGET_DB) <= GAP_TOL_DB and elapsed < RUNTIME_LIMIT_S
    record("1 delay-phase vs sub-TD SNR gap", ok,
           f"shift {shift:.2f} dB (target {GAP_TARGET_DB}±{GAP_TOL_DB}), sweep took {elapsed:.0f} s "
           f"(limit {RUNTIME_LIMIT_S:.0f} s)")


def test_2_sumrate_ordering(fig4):
    tab = result_table(fig4[0])
    chain = ["digital", "hybrid-full-td", "delay-phase", "hybrid-sub-td", "hybrid-sub-ps"]
    failures = []
    for snr in (0.0, 10.0, 20.0):
        r = {s: tab[s][snr][0] for s in tab}
        for hi, lo in zip(chain, chain[1:]):
            if r[hi] < r[lo] * (1 - TIE_RTOL):
                failures.append(f"{hi} < {lo} at {snr:g} dB")
        if r["hybrid-full-ps"] > r["hybrid-full-td"] * (1 + TIE_RTOL):
            failures.append(f"hybrid-full-ps > hybrid-full-td at {snr:g} dB")
    summary = ", ".join(f"{s}={tab[s][10.0][0]:.2f}" for s in chain + ["hybrid-full-ps"])
    record("2 sum-rate ordering", not failures, "; ".join(failures) or f"holds at 0/10/20 dB ({summary} @10 dB)")


def test_3_energy_efficiency_crossovers(fig5):
    failures = []
    for k in (2.0, 4.0):
        ee = {s: fig5[s][k][0] for s in fig5}
        best = max(ee, key=ee.get)
        runner_up = max(v for s, v in ee.items() if s != "delay-phase")
        if best != "delay-phase" or not ee["delay-phase"] > runner_up:
            failures.append(f"K={k:g}: best is {best}")
    ee8 = {s: fig5[s][8.0][0] for s in fig5}
    sub = max(ee8["hybrid-sub-ps"], ee8["hybrid-sub-td"])
    full = max(ee8["hybrid-full-ps"], ee8["hybrid-full-td"])
    if not sub > full:
        failures.append(f"K=8: sub-connected {sub:.3f} <= full-connected {full:.3f}")
    detail = " | ".join(
        f"K={k:g} " + ", ".join(f"{s}={fig5[s][k][0]:.3f}" for s in ("delay-phase", "hybrid-sub-ps", "hybrid-sub-td",
                                                                        "hybrid-full-ps", "hybrid-full-td"))
        for k in (2.0, 4.0, 8.0))
    record("3 energy-efficiency crossovers", not failures, "; ".join(failures) or f"Gbps/W {detail}")


def test_4_hardware_power():
    config = SystemConfig(n_subcarriers=2)
    channels = gen_channel(config, sample_users(config, np.random.default_rng(0)))
    expected = {
        "hybrid-sub-ps": 31.97,
        "hybrid-sub-td": 83.17,
        "hybrid-full-ps": 124.13,
        "delay-phase": 134.37,
        "hybrid-full-td": 328.93,
    }
    profile = PowerProfile()
    got = {s: hardware_power(build_precoder(s, channels, 32).hardware, profile) for s in expected}
    ok = all(abs(got[s] - w) <= HW_TOL_W for s, w in expected.items())
    record("4 hardware power totals", ok, ", ".join(f"{s}={got[s]:.2f} W" for s in expected))


def test_5_beam_split_law():
    rng = np.random.default_rng(2020)
    config = SystemConfig(n_rf=1, n_users=1)
    fc, bw, n = config.carrier_hz, config.bandwidth_hz, config.n_antennas
    grid = sin_grid(GRID_POINTS)
    worst_ps, td_moves = 0.0, 0
    for _ in range(50):
        s0 = rng.uniform(-0.9, 0.9)
        f = rng.uniform(fc - bw / 2, fc + bw / 2)
        ps = array_response(n, s0, fc, fc)
        peak = grid[np.argmax(beam_pattern(ps, f, config, GRID_POINTS))]
        worst_ps = max(worst_ps, abs(peak - s0 * fc / f))
        td_at_f = np.argmax(beam_pattern(array_response(n, s0, f, fc), f, config, GRID_POINTS))
        td_at_fc = np.argmax(beam_pattern(array_response(n, s0, fc, fc), fc, config, GRID_POINTS))
        td_moves += int(td_at_f != td_at_fc)
    ok = worst_ps <= GRID_STEP and td_moves == 0
    record("5 beam-split law", ok,
           f"max PS peak error {worst_ps / GRID_STEP:.2f} grid steps; TTD peak moved in {td_moves}/50 cases")


def test_6_dirichlet_oracle():
    rng = np.random.default_rng(6)
    worst = 0.0
    for i in range(100):
        n = (16, 64, 256, 1024)[i % 4]
        s = rng.uniform(-1, 1)
        config = SystemConfig(n_antennas=n, n_rf=1, n_users=1, n_subcarriers=4, n_td_per_rf=1)
        f = config.subcarrier_hz()
        m = int(rng.integers(4))
        delta = f[m] / config.carrier_hz - 1
        u = user(s)
        channels = gen_channel(config, [u])
        analog = analog_beamforming(channels)
        brute = brute_gain(analog.f_matrices[m, :, 0], s, f[m], config.carrier_hz)
        worst = max(worst, abs(dirichlet_gain(n, delta, s) - brute),
                    abs(array_gain_profile(analog, u, config)[m] - brute))
        kd = int(2 ** rng.integers(0, int(np.log2(n)) + 1))
        dp = delay_phase(channels, kd)
        brute_dp = brute_gain(dp.analog[m, :, 0], s, f[m], config.carrier_hz)
        worst = max(worst, abs(dirichlet_gain(n // kd, delta, s) - brute_dp))
    record("6 Dirichlet closed form vs brute force", worst <= DIRICHLET_TOL,
           f"max abs deviation {worst:.2e} over 100 instances (tol {DIRICHLET_TOL:.0e})")


def test_7_zero_forcing():
    config = SystemConfig(n_subcarriers=32)
    rng = np.random.default_rng(7)
    worst, draws, skipped = 0.0, 0, 0
    while draws < 100:
        channels = gen_channel(config, sample_users(config, rng))
        built = {s: build_precoder(s, channels, config.n_td_per_rf) for s in MULTIUSER_SCHEMES}
        # Gram condition number is the square of the effective channel's
        gram_conds = [np.linalg.cond(channels.matrices if b.analog is None else channels.matrices @ b.analog) ** 2
                      for b in built.values()]
        if max(np.max(c) for c in gram_conds) > 1e8:
            skipped += 1
            continue
        draws += 1
        for pre in built.values():
            g = np.abs(channels.matrices @ pre.f_matrices) ** 2
            sig = np.diagonal(g, axis1=1, axis2=2)
            off = g * (1 - np.eye(config.n_users))
            worst = max(worst, float(np.max(off / sig[:, :, None])))
    record("7 ZF interference-to-signal", worst < ISR_LIMIT,
           f"max ISR {worst:.2e} over 100 draws x 6 schemes ({skipped} ill-conditioned draws skipped)")


def _window_run(rows, distance, f0=0.6e12):
    pts = [(float(r[0]), int(r[3])) for r in rows if float(r[1]) == distance]
    freqs = np.array([p[0] for p in pts])
    flags = np.array([p[1] for p in pts])
    i = int(np.argmin(np.abs(freqs - f0)))
    if not flags[i]:
        return None
    lo = hi = i
    while lo > 0 and flags[lo - 1]:
        lo -= 1
    while hi < len(flags) - 1 and flags[hi + 1]:
        hi += 1
    return freqs[lo], freqs[hi]


def test_8_window_calibration(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{}")
    out = tmp_path / "pathloss.csv"
    assert main(["pathloss", "--config", str(cfg), "--out", str(out), "--distances", "10,100"]) == 0
    _, _, rows = read_csv(out)
    w10, w100 = _window_run(rows, 10.0), _window_run(rows, 100.0)
    ok = (w10 is not None and w100 is not None
          and abs(w10[0] - 0.51e12) <= WINDOW_TOL_HZ and abs(w10[1] - 0.68e12) <= WINDOW_TOL_HZ
          and abs(w100[0] - 0.56e12) <= WINDOW_TOL_HZ and abs(w100[1] - 0.67e12) <= WINDOW_TOL_HZ)
    fmt = lambda w: "none" if w is None else f"{w[0] / 1e12:.3f}-{w[1] / 1e12:.3f} THz"  # noqa: E731
    record("8 window calibration", ok, f"10 m: {fmt(w10)}, 100 m: {fmt(w100)}")


def test_9_thread_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"trials": 16, "snr_grid_db": [0, 10, 20]}')
    blobs = []
    for threads in (1, 4, 8):
        out = tmp_path / f"t{threads}.csv"
        assert main(["sumrate-sweep", "--config", str(cfg), "--out", str(out), "--seed", "424242",
                     "--threads", str(threads)]) == 0
        blobs.append(out.read_bytes())
    ok = blobs[0] == blobs[1] == blobs[2]
    record("9 thread determinism", ok, f"1/4/8 threads -> {'identical' if ok else 'different'} CSV bytes "
                                       f"({len(blobs[0])} bytes)")
