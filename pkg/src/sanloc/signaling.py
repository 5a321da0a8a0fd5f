"""Pilot generation, the delay/angle-shifting transmit beamformer, its
receiver-side inverse image, fake-path synthesis, and observation models.

The transmit beamformer I + e^{-j2pi n delta_tau/(N T_s)} diag(alpha(delta_theta))
superimposes on every true path a fake twin whose delay is shifted by
delta_tau and whose sine-angle is shifted by sin(delta_theta).  A receiver
that knows (delta_tau, delta_theta) can apply the same operator to the
pilots instead and sees an undistorted channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import FakePathParams, steering_vector
from .errors import KeyTooLargeError, ScenarioConfigError
from .geometry import PathParams, Scenario

# Sign of the sine-angle shift applied to fake paths, fixed once by the
# requirement that h (I + e^{-j2pi n dt/(NTs)} diag(alpha(da))) s equals
# (h + h_fake) s to machine precision under the Hermitian-transpose
# steering convention used in `channel`.  The equivalence is enforced by
# the oracle suite; flipping this constant makes that check fail.
AOD_SHIFT_SIGN = -1.0

MODE_CLEAN = "clean"
MODE_SAN = "san"
MODE_GAUSSIAN = "gaussian-baseline"
MODES = (MODE_CLEAN, MODE_SAN, MODE_GAUSSIAN)


@dataclass(frozen=True)
class SanKey:
    """Shared secret: signed delay shift (us) and signed angle shift (rad)."""

    delta_tau_us: float
    delta_theta_rad: float

    def __post_init__(self):
        if not (np.isfinite(self.delta_tau_us) and np.isfinite(self.delta_theta_rad)):
            raise ScenarioConfigError("key entries must be finite")

    def validate_for(self, scenario: Scenario) -> None:
        sf = scenario.antenna_spacing * np.sin(self.delta_theta_rad) / scenario.wavelength
        if not abs(sf) < 0.5:
            raise KeyTooLargeError(
                f"key angle shift maps to spatial frequency {sf:.6g}, must satisfy |.| < 1/2"
            )

    def scaled(self, factor: float) -> "SanKey":
        if factor <= 0:
            raise ScenarioConfigError("key scale factor must be positive")
        return SanKey(self.delta_tau_us * factor, self.delta_theta_rad * factor)


@dataclass(frozen=True)
class PilotSet:
    """Unit-circle symbols x, unit-norm beamformers f, and pilots s = f x."""

    symbols: np.ndarray       # (G, N) complex, |x| = 1
    beamformers: np.ndarray   # (G, N, N_t) complex, unit 2-norm per (g, n)
    pilots: np.ndarray        # (G, N, N_t) complex

    @property
    def num_symbols(self) -> int:
        return self.symbols.shape[0]

    @property
    def num_subcarriers(self) -> int:
        return self.symbols.shape[1]

    @property
    def num_antennas(self) -> int:
        return self.beamformers.shape[2]


def generate_pilots(num_symbols: int, num_subcarriers: int, num_antennas: int, rng) -> PilotSet:
    """Pilots: symbols uniform on the unit circle; beamformers sweep the
    discrete-Fourier directions of the array, cycling over the (symbol,
    subcarrier) grid, each with a seeded random overall phase.

    Without transmitter-side channel knowledge no directional design is
    possible; the Fourier sweep covers the angle domain uniformly so every
    subcarrier sees every array direction across the symbol dimension,
    which keeps the per-subcarrier illumination balanced.  Entries are
    unit-circle up to the common 1/sqrt(N_t) norm and every beamformer has
    unit 2-norm.  Deterministic given the rng seed: symbol phases are drawn
    first, then beamformer phases."""
    if min(num_symbols, num_subcarriers, num_antennas) < 1:
        raise ScenarioConfigError("all pilot dimensions must be >= 1")
    rng = np.random.default_rng(rng)
    sym_phase = rng.uniform(0.0, 2 * np.pi, size=(num_symbols, num_subcarriers))
    symbols = np.exp(1j * sym_phase)
    dft = np.exp(
        -2j * np.pi * np.outer(np.arange(num_antennas), np.arange(num_antennas)) / num_antennas
    ) / np.sqrt(num_antennas)
    direction = (
        np.arange(num_symbols)[:, None] + np.arange(num_subcarriers)[None, :]
    ) % num_antennas
    bf_phase = rng.uniform(0.0, 2 * np.pi, size=(num_symbols, num_subcarriers, 1))
    beamformers = dft.T[direction] * np.exp(1j * bf_phase)
    pilots = beamformers * symbols[:, :, None]
    return PilotSet(symbols=symbols, beamformers=beamformers, pilots=pilots)


def _san_phase(n, key: SanKey, delay_period: float):
    return np.exp(-2j * np.pi * np.asarray(n) * key.delta_tau_us / delay_period)


def san_beamformer(f, n: int, key: SanKey, scenario: Scenario) -> np.ndarray:
    """Transmit beamformer with the fake-path operator applied on subcarrier n."""
    key.validate_for(scenario)
    f = np.asarray(f, complex)
    alpha = steering_vector(key.delta_theta_rad, len(f), scenario.antenna_spacing, scenario.wavelength)
    return f + _san_phase(n, key, scenario.delay_period) * (alpha * f)


def bob_effective_pilot(s, n: int, key: SanKey, scenario: Scenario) -> np.ndarray:
    """Receiver-side pilot image under the same operator as `san_beamformer`.

    Applying the operator to s = f x commutes with the scalar symbol, so
    h . san_beamformer(f) x == h . bob_effective_pilot(s) identically.
    """
    return san_beamformer(s, n, key, scenario)


def apply_san_to_pilots(pilots: PilotSet, key: SanKey, scenario: Scenario) -> np.ndarray:
    """Effective pilot grid s_tilde for all (g, n), shape (G, N, N_t).

    Elementwise identical to calling `bob_effective_pilot` per cell.
    """
    key.validate_for(scenario)
    s = pilots.pilots
    alpha = steering_vector(
        key.delta_theta_rad, pilots.num_antennas, scenario.antenna_spacing, scenario.wavelength
    )
    phase = _san_phase(np.arange(pilots.num_subcarriers), key, scenario.delay_period)
    return s + phase[None, :, None] * (alpha[None, None, :] * s)


def fake_path_params(true_params: list[PathParams], key: SanKey, scenario: Scenario) -> FakePathParams:
    """Fake twin of every true path (direct path included).

    The beamformer operator acts on the whole channel, so each of the K+1
    paths spawns one fake path with the same gain, delay tau + delta_tau,
    and sine-angle sin(theta) + AOD_SHIFT_SIGN * sin(delta_theta).
    """
    key.validate_for(scenario)
    gains = np.array([pp.gain for pp in true_params], complex)
    toas = np.array([pp.toa for pp in true_params]) + key.delta_tau_us
    sin_shift = AOD_SHIFT_SIGN * np.sin(key.delta_theta_rad)
    sines = np.sin([pp.aod for pp in true_params]) + sin_shift
    if np.any(np.abs(sines) > 1.0):
        raise KeyTooLargeError(
            "fake-path sine-angle outside [-1, 1]; reduce the key angle shift "
            f"(max |sin| = {np.max(np.abs(sines)):.6g})"
        )
    return FakePathParams(gains=gains, toas=toas, aods=np.arcsin(sines))


def signal_energy(rows: np.ndarray, pilot_grid: np.ndarray) -> float:
    """sum_{g,n} |h^(n) s^(g,n)|^2 for channel rows (N, N_t) and pilots (G, N, N_t)."""
    inner = np.einsum("nm,gnm->gn", rows, pilot_grid)
    return float(np.sum(np.abs(inner) ** 2))


def noiseless_observations(rows: np.ndarray, pilot_grid: np.ndarray) -> np.ndarray:
    """h^(n) s^(g,n) over the whole grid, shape (G, N)."""
    return np.einsum("nm,gnm->gn", rows, pilot_grid)


def gaussian_noise_variance(fake_rows: np.ndarray, pilots: PilotSet) -> float:
    """Average power of the structured-noise term over the pilot grid.

    zeta^2 = sum_{g,n} |h_fake^(n) s^(g,n)|^2 / (N G), the matched variance
    for the unstructured-noise baseline.
    """
    grid = pilots.pilots
    return signal_energy(fake_rows, grid) / (grid.shape[0] * grid.shape[1])


@dataclass(frozen=True)
class ObservationSet:
    """Synthesized received samples for one receiver and one mode."""

    receiver: str
    mode: str
    samples: np.ndarray        # (G, N) complex
    noise_variance: float
    mean: np.ndarray           # noiseless component, (G, N)


def _complex_normal(rng, shape, variance: float) -> np.ndarray:
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_received(
    rows: np.ndarray,
    pilots: PilotSet,
    key: SanKey | None,
    sigma2: float,
    rng,
    receiver: str,
    mode: str,
    scenario: Scenario,
    zeta2: float | None = None,
) -> ObservationSet:
    """Received grid y^(g,n) for the requested mode.

    clean:             y = h s + w
    san:               y = h s_tilde + w   (identical mean for both receivers;
                       the eavesdropper formulation (h + h_fake) s is the
                       same value by the fake-path equivalence)
    gaussian-baseline: y = h s + zeta + w, zeta circular normal with the
                       matched constant variance ``zeta2``.
    """
    if mode not in MODES:
        raise ScenarioConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    if sigma2 <= 0:
        raise ScenarioConfigError("sigma2 must be positive")
    rng = np.random.default_rng(rng)
    if mode == MODE_SAN:
        if key is None:
            raise ScenarioConfigError("san mode requires a key")
        grid = apply_san_to_pilots(pilots, key, scenario)
    else:
        grid = pilots.pilots
    mean = noiseless_observations(rows, grid)
    samples = mean.copy()
    if mode == MODE_GAUSSIAN:
        if zeta2 is None:
            raise ScenarioConfigError("gaussian-baseline mode requires zeta2")
        samples = samples + _complex_normal(rng, mean.shape, zeta2)
    samples = samples + _complex_normal(rng, mean.shape, sigma2)
    return ObservationSet(
        receiver=receiver, mode=mode, samples=samples, noise_variance=sigma2, mean=mean
    )
