"""Location-privacy simulation for mmWave MISO-OFDM localization.

Models a multi-antenna transmitter whose position is estimated by a
legitimate receiver and by an eavesdropper, injects structured artificial
noise through a delay/angle-shifting beamformer, and quantifies the
resulting estimation bounds for both parties.
"""

__version__ = "0.1.0"

from .channel import (
    FakePathParams,
    channel_rows,
    fake_channel,
    fake_channel_rows,
    fourier_vector,
    steering_vector,
    subcarrier_channel,
)
from .crlb import (
    ChannelCrlb,
    FimResult,
    ParameterVector,
    PositionCrlb,
    channel_parameter_vector,
    crlb_channel_domain,
    crlb_position,
    fim,
    finite_difference_jacobian,
    invert_fim,
    jacobian_analytic,
    mean_signal,
    position_parameter_vector,
)
from .experiments import (
    ExperimentConfig,
    default_config,
    default_key,
    default_scenario,
    fig2d_sweep,
    load_config,
    run_sweep,
)
from .geometry import (
    BOB,
    EVE,
    PathParams,
    Scenario,
    aod_of_path,
    channel_params,
    path_gains,
    toa_of_path,
)
from .metrics import (
    SeparationReport,
    delta_min,
    lpl,
    post_san_separation,
    resolvability_check,
    sigma_for_snr,
    snr_db,
)
from .signaling import (
    AOD_SHIFT_SIGN,
    ObservationSet,
    PilotSet,
    SanKey,
    apply_san_to_pilots,
    bob_effective_pilot,
    fake_path_params,
    gaussian_noise_variance,
    generate_pilots,
    san_beamformer,
    synthesize_received,
)
