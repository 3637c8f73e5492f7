"""Wideband precoder architectures.

Every hybrid design here is two-stage: an analog beamformer steers one beam
per user, then a per-subcarrier zero-forcing digital precoder removes the
residual inter-user interference on the effective channel ``H_m @ A_m``.
The composite ``F_m = A_m @ D_m`` is scaled to unit Frobenius norm.

Shapes follow :class:`~terabeam.channel.ChannelSet`: channels are
``(M, K, N)``, precoders ``(M, N, K)``, analog beamformers ``(M, N, R)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, steering_matrix

GRAM_COND_LIMIT = 1e12

SCHEMES = (
    "digital",
    "analog",
    "hybrid-full-ps",
    "hybrid-sub-ps",
    "hybrid-full-td",
    "hybrid-sub-td",
    "delay-phase",
)


class SingularChannelError(np.linalg.LinAlgError):
    """Effective channel too ill-conditioned for zero forcing."""

    def __init__(self, cond):
        self.cond = float(cond)
        super().__init__(f"effective channel Gram matrix is singular (condition number {self.cond:.3e} "
                         f"exceeds {GRAM_COND_LIMIT:.0e})")


@dataclass(frozen=True)
class HardwareDescriptor:
    n_rf_used: int
    n_ps: int
    n_td: int
    n_baseband: int = 1

    def __post_init__(self):
        if min(self.n_rf_used, self.n_ps, self.n_td, self.n_baseband) < 0:
            raise ValueError("component counts must be nonnegative")
        if self.n_baseband not in (0, 1):
            raise ValueError("n_baseband must be 0 or 1")


@dataclass(frozen=True)
class PrecoderOutput:
    """Effective per-subcarrier precoders plus what built them.

    ``analog`` holds the analog beamformer per subcarrier (``None`` for
    fully-digital precoding); its columns are what the array-gain diagnostics
    look at.
    """

    f_matrices: np.ndarray
    hardware: HardwareDescriptor
    scheme_name: str
    analog: np.ndarray | None = None


def _herm(x):
    return np.conj(np.swapaxes(x, -1, -2))


def zf_digital(h_eff: np.ndarray) -> np.ndarray:
    """Zero-forcing precoder ``H^H (H H^H)^-1``.

    Works on a single ``(K, R)`` matrix or a stack ``(..., K, R)``.

    Raises
    ------
    SingularChannelError
        If any Gram matrix has condition number above ``1e12``.
    """
    h = np.asarray(h_eff, dtype=complex)
    k, r = h.shape[-2:]
    if k > r:
        raise ValueError(f"zero forcing needs K <= R, got K={k}, R={r}")
    gram = h @ _herm(h)
    cond = np.linalg.cond(gram)
    worst = np.max(cond)
    if not np.isfinite(worst) or worst > GRAM_COND_LIMIT:
        raise SingularChannelError(worst)
    eye = np.broadcast_to(np.eye(k, dtype=complex), gram.shape)
    return _herm(h) @ np.linalg.solve(gram, eye)


def normalize_power(f_raw: np.ndarray) -> np.ndarray:
    """Scale a precoder (or a stack of them) to unit Frobenius norm."""
    f = np.asarray(f_raw, dtype=complex)
    norm = np.linalg.norm(f, axis=(-2, -1), keepdims=True)
    if np.any(norm == 0):
        raise ValueError("cannot normalize an all-zero precoder")
    return f / norm


def _hybrid(channels: ChannelSet, analog: np.ndarray) -> np.ndarray:
    """ZF on ``H_m A_m`` then normalize ``A_m D_m``; ``analog`` is (N, R) or (M, N, R)."""
    h_eff = channels.matrices @ analog
    return normalize_power(analog @ zf_digital(h_eff))


def _block_mask(n_antennas: int, n_blocks: int) -> np.ndarray:
    if n_antennas % n_blocks:
        raise ValueError(f"n_antennas ({n_antennas}) must be divisible by the number of subarrays ({n_blocks})")
    size = n_antennas // n_blocks
    return np.kron(np.eye(n_blocks), np.ones((size, 1)))


def _carrier_beams(channels: ChannelSet) -> np.ndarray:
    return steering_matrix(channels.n_antennas, channels.sin_angles(), [channels.carrier_hz], channels.carrier_hz)[0]


def _ttd_beams(channels: ChannelSet) -> np.ndarray:
    """Exact true-time-delay beams, (M, N, K).

    Element ``n`` is delayed by ``n sin(theta) / (2 fc)`` plus a per-beam
    offset that keeps every delay nonnegative; the offset is a common phase
    per column and does not change gains or the ZF result.
    """
    n = channels.n_antennas
    fc = channels.carrier_hz
    s = channels.sin_angles()
    delays = np.arange(n)[:, None] * s[None, :] / (2 * fc)
    delays = delays - np.minimum(delays.min(axis=0), 0.0)
    f = channels.subcarrier_hz[:, None, None]
    return np.exp(-2j * np.pi * f * delays[None]) / np.sqrt(n)


def fully_digital_zf(channels: ChannelSet) -> PrecoderOutput:
    f = normalize_power(zf_digital(channels.matrices))
    hw = HardwareDescriptor(n_rf_used=channels.n_antennas, n_ps=0, n_td=0)
    return PrecoderOutput(f, hw, "digital")


def analog_beamforming(channels: ChannelSet) -> PrecoderOutput:
    """Single RF chain, one carrier-designed phase-shifter beam at the user's LoS angle."""
    if channels.n_users != 1:
        raise ValueError(f"analog beamforming serves exactly one user, got {channels.n_users}")
    w = _carrier_beams(channels)
    analog = np.broadcast_to(w, (channels.n_subcarriers,) + w.shape)
    hw = HardwareDescriptor(n_rf_used=1, n_ps=channels.n_antennas, n_td=0)
    return PrecoderOutput(analog.copy(), hw, "analog", analog=analog)


def hybrid_full_ps(channels: ChannelSet) -> PrecoderOutput:
    a = _carrier_beams(channels)
    k, n = channels.n_users, channels.n_antennas
    analog = np.broadcast_to(a, (channels.n_subcarriers, n, k))
    return PrecoderOutput(_hybrid(channels, a), HardwareDescriptor(k, k * n, 0), "hybrid-full-ps", analog=analog)


def hybrid_sub_ps(channels: ChannelSet) -> PrecoderOutput:
    """Block-diagonal phase shifters: RF chain ``k`` drives antennas ``kP..(k+1)P-1``."""
    k, n = channels.n_users, channels.n_antennas
    mask = _block_mask(n, k)
    a = _carrier_beams(channels) * mask * np.sqrt(k)
    analog = np.broadcast_to(a, (channels.n_subcarriers, n, k))
    return PrecoderOutput(_hybrid(channels, a), HardwareDescriptor(k, n, 0), "hybrid-sub-ps", analog=analog)


def hybrid_full_td(channels: ChannelSet) -> PrecoderOutput:
    k, n = channels.n_users, channels.n_antennas
    analog = _ttd_beams(channels)
    return PrecoderOutput(_hybrid(channels, analog), HardwareDescriptor(k, 0, k * n), "hybrid-full-td",
                          analog=analog)


def hybrid_sub_td(channels: ChannelSet) -> PrecoderOutput:
    k, n = channels.n_users, channels.n_antennas
    mask = _block_mask(n, k)
    analog = _ttd_beams(channels) * mask[None] * np.sqrt(k)
    return PrecoderOutput(_hybrid(channels, analog), HardwareDescriptor(k, 0, n), "hybrid-sub-td", analog=analog)


def delay_phase_layers(channels: ChannelSet, n_td_per_rf: int) -> tuple[np.ndarray, np.ndarray]:
    """Phase-shifter and time-delay layers of the delay-phase beamformer.

    Returns ``(ps, td)`` with shapes ``(N, K)`` and ``(M, N, K)``; the
    analog beamformer is their elementwise product scaled by ``1/sqrt(N)``.
    Antenna ``n = l P + p`` sits in group ``l`` at offset ``p``. The PS
    layer steers each group toward the user at the carrier using the
    in-group offset, and the delayer of group ``l`` supplies the group
    displacement ``l P sin(theta) / (2 fc)`` as a true delay, so the group
    phase stays aligned at every subcarrier.
    """
    n = channels.n_antennas
    if n_td_per_rf < 1:
        raise ValueError("n_td_per_rf must be at least 1")
    if n % n_td_per_rf:
        raise ValueError(f"n_antennas ({n}) must be divisible by n_td_per_rf ({n_td_per_rf})")
    group = n // n_td_per_rf
    s = channels.sin_angles()
    fc = channels.carrier_hz
    idx = np.arange(n)
    offset, label = idx % group, idx // group
    ps = np.exp(-1j * np.pi * offset[:, None] * s[None, :])
    delays = np.arange(n_td_per_rf)[:, None] * group * s[None, :] / (2 * fc)  # (K_d, K)
    delays = delays - np.minimum(delays.min(axis=0), 0.0)
    f = channels.subcarrier_hz[:, None, None]
    td = np.exp(-2j * np.pi * f * delays[label][None])
    return ps, td


def delay_phase(channels: ChannelSet, n_td_per_rf: int = 32) -> PrecoderOutput:
    k, n = channels.n_users, channels.n_antennas
    ps, td = delay_phase_layers(channels, n_td_per_rf)
    analog = ps[None] * td / np.sqrt(n)
    hw = HardwareDescriptor(k, k * n, k * n_td_per_rf)
    return PrecoderOutput(_hybrid(channels, analog), hw, "delay-phase", analog=analog)


def build_precoder(scheme: str, channels: ChannelSet, n_td_per_rf: int = 32) -> PrecoderOutput:
    """Dispatch on the scheme name used in configs and CSV output."""
    if scheme == "delay-phase":
        return delay_phase(channels, n_td_per_rf)
    try:
        fn = _BUILDERS[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}") from None
    return fn(channels)


_BUILDERS = {
    "digital": fully_digital_zf,
    "analog": analog_beamforming,
    "hybrid-full-ps": hybrid_full_ps,
    "hybrid-sub-ps": hybrid_sub_ps,
    "hybrid-full-td": hybrid_full_td,
    "hybrid-sub-td": hybrid_sub_td,
}
