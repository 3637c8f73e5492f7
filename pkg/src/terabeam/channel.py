"""User geometry, array responses, LoS channels and the THz path-loss model.

Channels follow a single-path Saleh-Valenzuela model on a half-wavelength
uniform linear array. The spatial phase of element ``n`` at frequency ``f``
is ``-pi * n * (f / fc) * sin(theta)``, which is what makes phase-shifter
beams drift away from the user as ``f`` moves off the carrier.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

C_LIGHT = 299_792_458.0

MAX_SIN_ANGLE = math.sin(math.radians(60.0))
DISTANCE_RANGE_M = (10.0, 100.0)


@dataclass(frozen=True)
class PowerProfile:
    """Per-component power draw in watts."""

    p_baseband_w: float = 0.25
    p_rf_chain_w: float = 0.25
    p_ps_w: float = 0.03
    p_td_w: float = 0.08
    p_transmit_w: float = 2.5

    def __post_init__(self):
        for name in ("p_baseband_w", "p_rf_chain_w", "p_ps_w", "p_td_w", "p_transmit_w"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite nonnegative number, got {value!r}")


@dataclass(frozen=True)
class SystemConfig:
    """Array, RF and simulation parameters.

    Defaults reproduce the full-size setup: a 1024-element ULA at 350 GHz
    with 20 GHz of bandwidth serving four users, 32 time delayers per RF
    chain for delay-phase precoding.
    """

    n_antennas: int = 1024
    n_rf: int = 4
    n_users: int = 4
    n_subcarriers: int = 128
    carrier_hz: float = 350e9
    bandwidth_hz: float = 20e9
    n_td_per_rf: int = 32
    seed: int = 0
    power_profile: PowerProfile = field(default_factory=PowerProfile)
    trials: int = 100
    apply_pathloss: bool = False
    window_threshold_db: float = 10.0
    absorption_table_path: str | None = None

    def __post_init__(self):
        for name in ("n_antennas", "n_rf", "n_users", "n_subcarriers", "trials"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if isinstance(self.n_td_per_rf, bool) or not isinstance(self.n_td_per_rf, (int, np.integer)) \
                or self.n_td_per_rf < 0:
            raise ValueError(f"n_td_per_rf must be a nonnegative integer, got {self.n_td_per_rf!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.n_rf > self.n_antennas:
            raise ValueError(f"n_rf ({self.n_rf}) exceeds n_antennas ({self.n_antennas})")
        if self.n_users > self.n_rf:
            raise ValueError(f"n_users ({self.n_users}) exceeds n_rf ({self.n_rf})")
        for name in ("carrier_hz", "bandwidth_hz"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a positive finite frequency, got {value!r}")
        if self.bandwidth_hz >= 2 * self.carrier_hz:
            raise ValueError("bandwidth_hz must be below 2 * carrier_hz")
        if not math.isfinite(self.window_threshold_db):
            raise ValueError("window_threshold_db must be finite")
        if not isinstance(self.power_profile, PowerProfile):
            raise ValueError("power_profile must be a PowerProfile")

    def subcarrier_hz(self) -> np.ndarray:
        """Centre frequency of every subcarrier, spacing ``B / M``."""
        m = np.arange(self.n_subcarriers)
        return self.carrier_hz + self.bandwidth_hz * (m - (self.n_subcarriers - 1) / 2) / self.n_subcarriers


@dataclass(frozen=True)
class UserPath:
    gain: complex
    sin_angle: float
    distance_m: float

    def __post_init__(self):
        if not math.isfinite(self.sin_angle) or abs(self.sin_angle) > 1:
            raise ValueError(f"sin_angle must lie in [-1, 1], got {self.sin_angle!r}")
        if not math.isfinite(self.distance_m) or self.distance_m <= 0:
            raise ValueError(f"distance_m must be positive, got {self.distance_m!r}")


@dataclass(frozen=True)
class ChannelSet:
    """Per-subcarrier downlink channels.

    ``matrices[m, k]`` is the row that user ``k`` applies to the transmitted
    vector on subcarrier ``m``; shape ``(M, K, N)``.
    """

    matrices: np.ndarray
    subcarrier_hz: np.ndarray
    users: tuple[UserPath, ...]
    carrier_hz: float

    @property
    def n_subcarriers(self) -> int:
        return self.matrices.shape[0]

    @property
    def n_users(self) -> int:
        return self.matrices.shape[1]

    @property
    def n_antennas(self) -> int:
        return self.matrices.shape[2]

    def sin_angles(self) -> np.ndarray:
        return np.array([u.sin_angle for u in self.users])


def _check_finite(**values):
    for name, value in values.items():
        if not np.all(np.isfinite(value)):
            raise ValueError(f"{name} must be finite, got {value!r}")


def array_response(n_antennas: int, sin_angle: float, freq_hz: float, carrier_hz: float) -> np.ndarray:
    """Unit-norm ULA response toward ``sin_angle`` at ``freq_hz``.

    Elements are spaced half a carrier wavelength apart, so element ``n``
    carries phase ``-pi * n * (freq_hz / carrier_hz) * sin_angle``.
    """
    _check_finite(sin_angle=sin_angle, freq_hz=freq_hz, carrier_hz=carrier_hz)
    if n_antennas < 1:
        raise ValueError("n_antennas must be at least 1")
    if abs(sin_angle) > 1:
        raise ValueError(f"|sin_angle| must not exceed 1, got {sin_angle!r}")
    if freq_hz <= 0 or carrier_hz <= 0:
        raise ValueError("frequencies must be positive")
    n = np.arange(n_antennas)
    return np.exp(-1j * np.pi * n * (freq_hz / carrier_hz) * sin_angle) / np.sqrt(n_antennas)


def steering_matrix(n_antennas: int, sin_angles, freqs_hz, carrier_hz: float) -> np.ndarray:
    """Batched :func:`array_response`, shape ``(len(freqs), N, len(angles))``."""
    s = np.asarray(sin_angles, dtype=float)
    f = np.asarray(freqs_hz, dtype=float)
    n = np.arange(n_antennas)
    phase = -np.pi * n[None, :, None] * (f / carrier_hz)[:, None, None] * s[None, None, :]
    return np.exp(1j * phase) / np.sqrt(n_antennas)


def sample_users(config: SystemConfig, rng: np.random.Generator, n_users: int | None = None) -> list[UserPath]:
    """Draw LoS gains, angles and distances for ``n_users`` (default ``config.n_users``)."""
    k = config.n_users if n_users is None else n_users
    gains = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2)
    sins = rng.uniform(-MAX_SIN_ANGLE, MAX_SIN_ANGLE, k)
    dists = rng.uniform(*DISTANCE_RANGE_M, k)
    return [UserPath(complex(g), float(s), float(d)) for g, s, d in zip(gains, sins, dists)]


def gen_channel(config: SystemConfig, users: Sequence[UserPath], table: AbsorptionTable | None = None) -> ChannelSet:
    """LoS channel of every user on every subcarrier.

    Row ``k`` on subcarrier ``m`` is ``sqrt(N) * g_k * a(theta_k, f_m)^H``.
    With ``config.apply_pathloss`` each row is further attenuated by the
    path loss at the user's distance (``table`` defaults to the packaged one).
    """
    if len(users) != config.n_users:
        raise ValueError(f"expected {config.n_users} users, got {len(users)}")
    freqs = config.subcarrier_hz()
    n = config.n_antennas
    sins = np.array([u.sin_angle for u in users])
    gains = np.array([u.gain for u in users], dtype=complex)
    a = steering_matrix(n, sins, freqs, config.carrier_hz)  # (M, N, K)
    h = np.sqrt(n) * gains[None, :, None] * np.conj(np.swapaxes(a, 1, 2))
    if config.apply_pathloss:
        if table is None:
            table = load_config_table(config)
        loss_db = np.array([[path_loss_db(f, u.distance_m, table) for u in users] for f in freqs])
        h = h * (10.0 ** (-loss_db / 20.0))[:, :, None]
    return ChannelSet(matrices=h, subcarrier_hz=freqs, users=tuple(users), carrier_hz=config.carrier_hz)


# ---------------------------------------------------------------------------
# path loss


@dataclass(frozen=True)
class AbsorptionTable:
    """Piecewise-constant molecular absorption coefficient in dB/m.

    ``f_lo``, ``f_hi`` and ``k_abs`` are parallel arrays of contiguous
    segments. Each segment is half-open ``[f_lo, f_hi)`` except the last,
    which also includes its upper edge.
    """

    f_lo: np.ndarray
    f_hi: np.ndarray
    k_abs: np.ndarray

    def __post_init__(self):
        lo, hi, k = (np.asarray(x, dtype=float) for x in (self.f_lo, self.f_hi, self.k_abs))
        if not (lo.shape == hi.shape == k.shape) or lo.ndim != 1 or lo.size == 0:
            raise ValueError("segments must be a non-empty list of (f_lo, f_hi, k_abs) triples")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(np.isfinite(k))):
            raise ValueError("segment values must be finite")
        if np.any(hi <= lo):
            raise ValueError("every segment needs f_hi > f_lo")
        gaps = np.flatnonzero(~np.isclose(lo[1:], hi[:-1], rtol=1e-12, atol=0.0))
        if gaps.size:
            i = gaps[0]
            raise ValueError(f"segments not contiguous between {hi[i]:.6g} Hz and {lo[i + 1]:.6g} Hz")
        if np.any(k < 0):
            raise ValueError("k_abs_db_per_m must be nonnegative")
        object.__setattr__(self, "f_lo", lo)
        object.__setattr__(self, "f_hi", hi)
        object.__setattr__(self, "k_abs", k)

    @classmethod
    def from_segments(cls, segments) -> AbsorptionTable:
        seg = np.asarray(list(segments), dtype=float).reshape(-1, 3)
        return cls(seg[:, 0], seg[:, 1], seg[:, 2])

    @classmethod
    def from_json(cls, path) -> AbsorptionTable:
        with open(path) as fh:
            doc = json.load(fh)
        try:
            rows = [(s["f_lo_hz"], s["f_hi_hz"], s["k_abs_db_per_m"]) for s in doc["segments"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}: malformed absorption table ({exc})") from exc
        return cls.from_segments(rows)

    @classmethod
    def default(cls) -> AbsorptionTable:
        ref = resources.files("terabeam").joinpath("data/absorption_default.json")
        with resources.as_file(ref) as path:
            return cls.from_json(path)

    @classmethod
    def flat(cls, f_lo_hz=0.1e12, f_hi_hz=1e12, k_abs_db_per_m=0.0) -> AbsorptionTable:
        return cls.from_segments([(f_lo_hz, f_hi_hz, k_abs_db_per_m)])

    def to_json(self, path):
        doc = {
            "segments": [
                {"f_lo_hz": float(lo), "f_hi_hz": float(hi), "k_abs_db_per_m": float(k)}
                for lo, hi, k in zip(self.f_lo, self.f_hi, self.k_abs)
            ]
        }
        Path(path).write_text(json.dumps(doc, indent=1))

    @property
    def coverage(self) -> tuple[float, float]:
        return float(self.f_lo[0]), float(self.f_hi[-1])

    def lookup(self, freq_hz) -> np.ndarray:
        """Absorption coefficient of the segment containing each frequency."""
        f = np.asarray(freq_hz, dtype=float)
        lo, hi = self.coverage
        if np.any(~np.isfinite(f)) or np.any(f < lo) or np.any(f > hi):
            raise ValueError(f"frequency outside table coverage [{lo:.6g}, {hi:.6g}] Hz")
        idx = np.searchsorted(self.f_lo, f, side="right") - 1
        return self.k_abs[np.clip(idx, 0, self.k_abs.size - 1)]


def load_config_table(config: SystemConfig) -> AbsorptionTable:
    if config.absorption_table_path:
        return AbsorptionTable.from_json(config.absorption_table_path)
    return AbsorptionTable.default()


def free_space_loss_db(freq_hz, distance_m):
    return 20.0 * np.log10(4.0 * np.pi * np.asarray(freq_hz) * np.asarray(distance_m) / C_LIGHT)


def path_loss_db(freq_hz, distance_m, table: AbsorptionTable):
    """Free-space spreading loss plus molecular absorption, in dB.

    Accepts scalars or broadcastable arrays.
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        raise ValueError("distance_m must be positive")
    loss = free_space_loss_db(freq_hz, d) + table.lookup(freq_hz) * d
    return float(loss) if np.ndim(loss) == 0 else loss


def available_window(distance_m: float, table: AbsorptionTable, threshold_db: float = 10.0) -> list[tuple[float, float]]:
    """Maximal frequency intervals whose absorption loss stays within ``threshold_db``.

    Because the table is piecewise constant the intervals are unions of
    whole segments and are computed exactly.
    """
    if not math.isfinite(distance_m) or distance_m <= 0:
        raise ValueError("distance_m must be positive")
    if not math.isfinite(threshold_db):
        raise ValueError("threshold_db must be finite")
    ok = table.k_abs * distance_m <= threshold_db
    windows = []
    start = None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            windows.append((float(table.f_lo[start]), float(table.f_hi[i - 1])))
            start = None
    if start is not None:
        windows.append((float(table.f_lo[start]), float(table.f_hi[-1])))
    return windows


def allocate_subbands(users: Sequence[UserPath], config: SystemConfig, table: AbsorptionTable) -> list[list[int]]:
    """Greedy distance-aware subcarrier assignment.

    Users take turns from farthest to nearest; on each turn a user claims
    the free subcarrier with the lowest path loss at its own distance
    (lowest index on ties). Returns sorted subcarrier indices per user, in
    the order of ``users``.
    """
    if not users:
        raise ValueError("need at least one user")
    freqs = config.subcarrier_hz()
    loss = np.array([path_loss_db(freqs, u.distance_m, table) for u in users])
    # stable sort keeps input order among equidistant users
    order = sorted(range(len(users)), key=lambda k: -users[k].distance_m)
    free = np.ones(freqs.size, dtype=bool)
    alloc: list[list[int]] = [[] for _ in users]
    remaining = freqs.size
    while remaining:
        for k in order:
            if not remaining:
                break
            cost = np.where(free, loss[k], np.inf)
            pick = int(np.argmin(cost))
            free[pick] = False
            alloc[k].append(pick)
            remaining -= 1
    return [sorted(a) for a in alloc]
