"""Array response and per-subcarrier channel construction.

The subcarrier channel is a 1 x N_t row: a gain- and delay-weighted sum of
Hermitian-transposed steering vectors, one term per path.  Fake paths use
the identical kernel, so the public and artificial channels agree bit for
bit when given the same parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpatialFrequencyError
from .geometry import PathParams, Scenario


def fourier_vector(length: int, freq: float) -> np.ndarray:
    """[1, e^{-j2pi f}, ..., e^{-j2pi (L-1) f}] as a complex vector."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return np.exp(-2j * np.pi * freq * np.arange(length))


def spatial_frequency(theta: float, d: float, lam: float) -> float:
    """Normalized spatial frequency d*sin(theta)/lambda."""
    return d * np.sin(theta) / lam


def steering_vector(theta: float, num_antennas: int, d: float, lam: float) -> np.ndarray:
    """Array response of a uniform linear array toward angle ``theta``."""
    f = spatial_frequency(theta, d, lam)
    if not -0.5 < f <= 0.5:
        raise SpatialFrequencyError(
            f"spatial frequency {f:.6g} outside (-1/2, 1/2] (theta={theta:.6g}, d={d:.6g}, lam={lam:.6g})"
        )
    return fourier_vector(num_antennas, f)


@dataclass(frozen=True)
class FakePathParams:
    """Artificial path parameters: gains, delays (us), angles (rad).

    Delays are not restricted to the (0, N*T_s] window: a signed delay
    shift may produce fake delays outside it, and only the delay modulo
    N*T_s enters the channel phases.
    """

    gains: np.ndarray
    toas: np.ndarray
    aods: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gains", np.asarray(self.gains, complex).reshape(-1))
        object.__setattr__(self, "toas", np.asarray(self.toas, float).reshape(-1))
        object.__setattr__(self, "aods", np.asarray(self.aods, float).reshape(-1))
        if not (len(self.gains) == len(self.toas) == len(self.aods)):
            raise ValueError("gains, toas, aods must have equal length")

    def __len__(self) -> int:
        return len(self.gains)


def _rows_from_arrays(gains, toas, aods, scenario: Scenario) -> np.ndarray:
    """Channel rows for all subcarriers, shape (N, N_t).

    rows[n, m] = sum_k gamma_k e^{-j2pi n tau_k/(N T_s)} conj(alpha(theta_k))_m
    """
    gains = np.asarray(gains, complex).reshape(-1)
    toas = np.asarray(toas, float).reshape(-1)
    aods = np.asarray(aods, float).reshape(-1)
    n_sub = scenario.num_subcarriers
    n_t = scenario.num_tx_antennas
    if len(gains) == 0:
        return np.zeros((n_sub, n_t), complex)
    m = np.arange(n_t)
    n = np.arange(n_sub)
    sf = scenario.antenna_spacing * np.sin(aods) / scenario.wavelength
    steer_conj = np.exp(2j * np.pi * np.outer(sf, m))            # (K, N_t)
    delay = np.exp(-2j * np.pi * np.outer(n, toas) / scenario.delay_period)  # (N, K)
    return (delay * gains) @ steer_conj


def channel_rows(params: list[PathParams], scenario: Scenario) -> np.ndarray:
    """Public channel rows h^(n) for n = 0..N-1, shape (N, N_t)."""
    gains = [pp.gain for pp in params]
    toas = [pp.toa for pp in params]
    aods = [pp.aod for pp in params]
    return _rows_from_arrays(gains, toas, aods, scenario)


def subcarrier_channel(params: list[PathParams], n: int, scenario: Scenario) -> np.ndarray:
    """Single public channel row h^(n), shape (N_t,)."""
    if not params:
        raise ValueError("params must be non-empty")
    if not 0 <= n < scenario.num_subcarriers:
        raise ValueError(f"subcarrier index {n} outside [0, {scenario.num_subcarriers - 1}]")
    return channel_rows(params, scenario)[n]


def fake_channel_rows(fake: FakePathParams, scenario: Scenario) -> np.ndarray:
    """Artificial channel rows, shape (N, N_t); zero when there are no fake paths."""
    return _rows_from_arrays(fake.gains, fake.toas, fake.aods, scenario)


def fake_channel(fake: FakePathParams, n: int, scenario: Scenario) -> np.ndarray:
    """Single artificial channel row, shape (N_t,)."""
    if not 0 <= n < scenario.num_subcarriers:
        raise ValueError(f"subcarrier index {n} outside [0, {scenario.num_subcarriers - 1}]")
    return fake_channel_rows(fake, scenario)[n]
