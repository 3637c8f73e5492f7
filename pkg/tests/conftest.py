import numpy as np
import pytest

from terabeam.channel import SystemConfig, UserPath

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def small_config():
    return SystemConfig(n_antennas=64, n_rf=2, n_users=2, n_subcarriers=16, n_td_per_rf=8, trials=4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def single_user_config(n_antennas=1024, n_subcarriers=128, n_td_per_rf=32, **kw):
    return SystemConfig(n_antennas=n_antennas, n_rf=1, n_users=1, n_subcarriers=n_subcarriers,
                        n_td_per_rf=n_td_per_rf, **kw)


def user(sin_angle, gain=1.0 + 0j, distance_m=10.0):
    return UserPath(complex(gain), float(sin_angle), float(distance_m))


def brute_gain(weights, sin_angle, freq_hz, carrier_hz):
    """|a(theta, f)^H w| / ||w|| summed element by element."""
    n = len(weights)
    acc = 0j
    for i, w in enumerate(weights):
        acc += complex(np.cos(np.pi * i * freq_hz / carrier_hz * sin_angle),
                       np.sin(np.pi * i * freq_hz / carrier_hz * sin_angle)) * w
    return abs(acc) / np.sqrt(n) / np.sqrt(sum(abs(w) ** 2 for w in weights))
