"""Wideband THz multi-user precoding simulator."""

__version__ = "0.1.0"

from .channel import (
    AbsorptionTable,
    ChannelSet,
    PowerProfile,
    SystemConfig,
    UserPath,
    allocate_subbands,
    array_response,
    available_window,
    gen_channel,
    path_loss_db,
    sample_users,
)
from .metrics import (
    RateReport,
    array_gain_profile,
    beam_peak,
    energy_efficiency,
    hardware_power,
    sinr,
    sum_rate,
)
from .precoders import (
    SCHEMES,
    HardwareDescriptor,
    PrecoderOutput,
    SingularChannelError,
    analog_beamforming,
    build_precoder,
    delay_phase,
    fully_digital_zf,
    hybrid_full_ps,
    hybrid_full_td,
    hybrid_sub_ps,
    hybrid_sub_td,
    normalize_power,
    zf_digital,
)
