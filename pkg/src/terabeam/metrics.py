"""Rates, beam diagnostics, hardware power and energy efficiency.

Transmit power is normalized to one per subcarrier, so an SNR of ``x`` dB
means a noise variance of ``10**(-x/10)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, PowerProfile, SystemConfig, UserPath, steering_matrix
from .precoders import HardwareDescriptor, PrecoderOutput


@dataclass(frozen=True)
class RateReport:
    per_user_rate_bpshz: np.ndarray
    sum_rate_bpshz: float
    per_subcarrier_rates: np.ndarray


def noise_variance(snr_db):
    return 10.0 ** (-np.asarray(snr_db, dtype=float) / 10.0)


def gain_matrices(channels: ChannelSet, precoder: PrecoderOutput) -> np.ndarray:
    """``|H_m F_m|^2`` per subcarrier; entry ``[m, k, j]`` is user k's power from stream j."""
    return np.abs(channels.matrices @ precoder.f_matrices) ** 2


def sinr_from_gains(gains: np.ndarray, noise_var) -> np.ndarray:
    """SINR array of shape ``(..., M, K)`` from ``(M, K, K)`` gains.

    ``noise_var`` may be an array, in which case its shape is prepended.
    """
    signal = np.diagonal(gains, axis1=-2, axis2=-1)
    interference = gains.sum(axis=-1) - signal
    nv = np.asarray(noise_var, dtype=float)
    nv = nv.reshape(nv.shape + (1,) * signal.ndim)
    return signal / (interference + nv)


def sinr(channels: ChannelSet, precoder: PrecoderOutput, user: int, subcarrier: int, noise_var: float) -> float:
    h = channels.matrices[subcarrier, user]
    f = precoder.f_matrices[subcarrier]
    p = np.abs(h @ f) ** 2
    signal = p[user]
    return float(signal / (p.sum() - signal + noise_var))


def rate_report(gains: np.ndarray, snr_db: float) -> RateReport:
    rates = np.log2(1.0 + sinr_from_gains(gains, noise_variance(snr_db)))  # (M, K)
    per_sub = rates.sum(axis=1)
    return RateReport(
        per_user_rate_bpshz=rates.mean(axis=0),
        sum_rate_bpshz=float(per_sub.mean()),
        per_subcarrier_rates=per_sub,
    )


def sum_rate(channels: ChannelSet, precoder: PrecoderOutput, snr_db: float) -> RateReport:
    """Achievable sum-rate averaged over subcarriers, in bps/Hz."""
    return rate_report(gain_matrices(channels, precoder), snr_db)


def sum_rate_curve(gains: np.ndarray, snr_grid_db) -> np.ndarray:
    """Sum-rate at every SNR of a grid, reusing one set of gain matrices."""
    rates = np.log2(1.0 + sinr_from_gains(gains, noise_variance(snr_grid_db)))
    return rates.sum(axis=-1).mean(axis=-1)


def array_gain_profile(precoder: PrecoderOutput, user: UserPath, config: SystemConfig,
                       column: int = 0, analog: bool = False) -> np.ndarray:
    """Normalized gain of one precoder column toward the user, per subcarrier.

    With ``analog=True`` the analog beamformer column is used instead of
    the effective (post-ZF) precoder column.
    """
    cols = (precoder.analog if analog else precoder.f_matrices)[:, :, column]
    freqs = config.subcarrier_hz()
    a = steering_matrix(cols.shape[1], [user.sin_angle], freqs, config.carrier_hz)[:, :, 0]
    inner = np.abs(np.sum(np.conj(a) * cols, axis=1))
    norms = np.linalg.norm(cols, axis=1)
    return np.divide(inner, norms, out=np.zeros_like(inner), where=norms > 0)


def dirichlet_gain(n_elements: int, delta, sin_angle: float):
    """Closed-form ``|sin(P pi d s / 2) / (P sin(pi d s / 2))|`` with ``d = f/fc - 1``."""
    x = np.pi * np.asarray(delta, dtype=float) * sin_angle / 2.0
    num = np.sin(n_elements * x)
    den = n_elements * np.sin(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = np.abs(num / den)
    return np.where(np.abs(den) < 1e-300, 1.0, g)


def sin_grid(grid_points: int = 8192) -> np.ndarray:
    return np.linspace(-1.0, 1.0, grid_points)


def beam_pattern(weights: np.ndarray, freq_hz: float, config: SystemConfig, grid_points: int = 8192) -> np.ndarray:
    """``|a(theta', f)^H w| / ||w||`` over a uniform ``sin(theta')`` grid."""
    w = np.asarray(weights, dtype=complex)
    grid = sin_grid(grid_points)
    n = np.arange(w.size)
    # a^H w = sum_n exp(+i pi n f/fc s') w_n / sqrt(N)
    phase = np.exp(1j * np.pi * (freq_hz / config.carrier_hz) * np.outer(grid, n))
    return np.abs(phase @ w) / (np.sqrt(w.size) * np.linalg.norm(w))


def beam_peak(weights: np.ndarray, freq_hz: float, config: SystemConfig, grid_points: int = 8192) -> float:
    """Sine of the direction where the beam radiated at ``freq_hz`` peaks."""
    if grid_points < 1024:
        raise ValueError("grid_points must be at least 1024")
    pattern = beam_pattern(weights, freq_hz, config, grid_points)
    return float(sin_grid(grid_points)[np.argmax(pattern)])


def hardware_power(hardware: HardwareDescriptor, profile: PowerProfile) -> float:
    return (hardware.n_baseband * profile.p_baseband_w
            + hardware.n_rf_used * profile.p_rf_chain_w
            + hardware.n_ps * profile.p_ps_w
            + hardware.n_td * profile.p_td_w)


def energy_efficiency(rate: RateReport | float, hardware: HardwareDescriptor, config: SystemConfig) -> float:
    """Delivered throughput over total consumed power, in Gbps/W."""
    r = rate.sum_rate_bpshz if isinstance(rate, RateReport) else float(rate)
    profile = config.power_profile
    total_w = profile.p_transmit_w + hardware_power(hardware, profile)
    return r * config.bandwidth_hz / 1e9 / total_w
