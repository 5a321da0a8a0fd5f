"""Scene geometry: positions of the transmitter, receivers, and scatterers,
and the mapping to per-path delays, departure angles, and complex gains.

Units are fixed throughout the library: distances in meters, time in
microseconds, angles in radians.  The propagation speed is therefore given
in m/us (300 by default) so that delays come out directly in microseconds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, ScenarioConfigError

BOB = "bob"
EVE = "eve"
RECEIVERS = (BOB, EVE)

# Transmit-array convention: theta is the two-quadrant arctan of
# (dy/dx) from the transmitter, with dx = 0 mapped to pi/2.  Both signs of
# a vertical geometry give normalized spatial frequency +-1/2, which is the
# same point of the array response, so the tie-break is lossless.
AOD_RANGE = (-np.pi / 2, np.pi / 2)


def _as_point(x, name: str) -> np.ndarray:
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise ScenarioConfigError(f"{name} must be a finite 2-vector, got {x!r}")
    return p


@dataclass(frozen=True)
class Scenario:
    """Static scene plus OFDM system constants.

    Attributes
    ----------
    alice_pos, bob_pos, eve_pos : (2,) arrays, meters.
    scatterers : tuple of (2,) arrays, one per single-bounce path.
    carrier_freq_hz, bandwidth_hz : carrier and occupied bandwidth in Hz.
    num_tx_antennas, num_subcarriers, num_symbols : N_t, N, G.
    lightspeed : propagation speed in m/us.
    antenna_spacing : element spacing in meters; None selects half a
        wavelength.
    """

    alice_pos: np.ndarray
    bob_pos: np.ndarray
    eve_pos: np.ndarray
    scatterers: tuple = ()
    carrier_freq_hz: float = 60e9
    bandwidth_hz: float = 15e6
    num_tx_antennas: int = 16
    num_subcarriers: int = 16
    num_symbols: int = 16
    lightspeed: float = 300.0
    antenna_spacing: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alice_pos", _as_point(self.alice_pos, "alice_pos"))
        object.__setattr__(self, "bob_pos", _as_point(self.bob_pos, "bob_pos"))
        object.__setattr__(self, "eve_pos", _as_point(self.eve_pos, "eve_pos"))
        object.__setattr__(
            self,
            "scatterers",
            tuple(_as_point(v, f"scatterers[{i}]") for i, v in enumerate(self.scatterers)),
        )
        if self.carrier_freq_hz <= 0 or self.bandwidth_hz <= 0 or self.lightspeed <= 0:
            raise ScenarioConfigError("carrier_freq_hz, bandwidth_hz and lightspeed must be positive")
        for name in ("num_tx_antennas", "num_subcarriers", "num_symbols"):
            if int(getattr(self, name)) < 1:
                raise ScenarioConfigError(f"{name} must be >= 1")
        if self.bandwidth_hz / self.carrier_freq_hz >= 0.01:
            warnings.warn(
                "bandwidth/carrier ratio %.3g breaks the narrowband assumption (B << f_c)"
                % (self.bandwidth_hz / self.carrier_freq_hz),
                stacklevel=2,
            )
        if self.antenna_spacing is None:
            object.__setattr__(self, "antenna_spacing", self.wavelength / 2)
        elif self.antenna_spacing <= 0:
            raise ScenarioConfigError("antenna_spacing must be positive")
        # Alice must not sit on any other node.
        others = [("bob_pos", self.bob_pos), ("eve_pos", self.eve_pos)] + [
            (f"scatterers[{i}]", v) for i, v in enumerate(self.scatterers)
        ]
        for name, pos in others:
            if np.linalg.norm(pos - self.alice_pos) == 0.0:
                raise ScenarioConfigError(f"alice_pos coincides with {name}")

    @property
    def num_scatterers(self) -> int:
        return len(self.scatterers)

    @property
    def sampling_period(self) -> float:
        """T_s = 1/B in microseconds."""
        return 1e6 / self.bandwidth_hz

    @property
    def wavelength(self) -> float:
        """lambda_c = c/f_c in meters (c converted from m/us to m/s)."""
        return self.lightspeed * 1e6 / self.carrier_freq_hz

    @property
    def delay_period(self) -> float:
        """N * T_s, the unambiguous delay span in microseconds."""
        return self.num_subcarriers * self.sampling_period

    def receiver_pos(self, receiver: str) -> np.ndarray:
        if receiver == BOB:
            return self.bob_pos
        if receiver == EVE:
            return self.eve_pos
        raise ScenarioConfigError(f"unknown receiver {receiver!r}; expected 'bob' or 'eve'")


@dataclass(frozen=True)
class PathParams:
    """Delay, departure angle, and complex gain of one propagation path."""

    toa: float          # microseconds
    aod: float          # radians, in (-pi/2, pi/2]
    gain: complex
    is_los: bool


def toa_of_path(p, v0, vk, c: float) -> float:
    """Delay of the path transmitter -> scatterer -> receiver, in us.

    ``p`` is the transmitter, ``v0`` the receiver, ``vk`` the scatterer.
    For the direct path pass ``vk = v0``: the scatterer leg collapses to
    zero and the result is the one-way delay.
    """
    p = np.asarray(p, float)
    v0 = np.asarray(v0, float)
    vk = np.asarray(vk, float)
    leg_rx = float(np.linalg.norm(v0 - vk))
    leg_tx = float(np.linalg.norm(p - vk))
    if leg_tx == 0.0:
        raise DegenerateGeometryError("transmitter coincides with the path point")
    return (leg_rx + leg_tx) / c


def aod_of_path(p, vk) -> float:
    """Departure angle of the path toward ``vk``, two-quadrant convention.

    Returns arctan((vk_y - p_y)/(vk_x - p_x)) in (-pi/2, pi/2], with a
    vertical geometry (equal x) mapped to pi/2.
    """
    p = np.asarray(p, float)
    vk = np.asarray(vk, float)
    dx = vk[0] - p[0]
    dy = vk[1] - p[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometryError("transmitter coincides with the path point")
    if dx == 0.0:
        return np.pi / 2
    return float(np.arctan(dy / dx))


def path_lengths(scenario: Scenario, receiver: str) -> np.ndarray:
    """Total propagation length of each path in meters (direct path first)."""
    p = scenario.alice_pos
    v0 = scenario.receiver_pos(receiver)
    lengths = [np.linalg.norm(p - v0)]
    for vk in scenario.scatterers:
        lengths.append(np.linalg.norm(v0 - vk) + np.linalg.norm(p - vk))
    return np.asarray(lengths)


def path_gains(scenario: Scenario, receiver: str, rng) -> np.ndarray:
    """Complex gain of each path under free-space amplitude loss.

    |gamma_k| = lambda_c / (4 pi L_k) with L_k the total path length
    (single-bounce paths use the sum of the two legs, with no extra
    reflection loss).  Phases are drawn uniformly on [0, 2pi) from ``rng``;
    the draw order does not depend on the receiver, so co-located receivers
    under the same stream see the identical channel realization.
    """
    rng = np.random.default_rng(rng)
    lengths = path_lengths(scenario, receiver)
    if np.any(lengths == 0.0):
        raise DegenerateGeometryError("zero-length path in scenario")
    mags = scenario.wavelength / (4 * np.pi * lengths)
    phases = rng.uniform(0.0, 2 * np.pi, size=lengths.shape)
    return mags * np.exp(1j * phases)


def channel_params(scenario: Scenario, receiver: str, rng) -> list[PathParams]:
    """All K+1 paths for one receiver, direct path first.

    Raises ScenarioConfigError naming the offending path when a delay falls
    outside the unambiguous window (0, N*T_s] or a spatial frequency falls
    outside (-1/2, 1/2].
    """
    p = scenario.alice_pos
    v0 = scenario.receiver_pos(receiver)
    gains = path_gains(scenario, receiver, rng)
    points = [v0] + list(scenario.scatterers)
    out = []
    for k, vk in enumerate(points):
        if k > 0 and np.linalg.norm(v0 - vk) == 0.0:
            raise DegenerateGeometryError(f"scatterer {k} coincides with receiver {receiver}")
        toa = toa_of_path(p, v0, vk, scenario.lightspeed)
        aod = aod_of_path(p, vk)
        frac = toa / scenario.delay_period
        if not 0.0 < frac <= 1.0:
            raise ScenarioConfigError(
                f"path {k} ({receiver}): delay {toa:.6g} us outside (0, N*T_s] "
                f"(normalized {frac:.6g})"
            )
        sf = scenario.antenna_spacing * np.sin(aod) / scenario.wavelength
        if not -0.5 < sf <= 0.5:
            raise ScenarioConfigError(
                f"path {k} ({receiver}): spatial frequency {sf:.6g} outside (-1/2, 1/2]"
            )
        out.append(PathParams(toa=toa, aod=aod, gain=complex(gains[k]), is_los=(k == 0)))
    if any(path.toa < out[0].toa for path in out[1:]):
        raise ScenarioConfigError("direct path is not the shortest; geometry is inconsistent")
    return out


def toa_gradients(p, v0, vk, c: float, is_los: bool):
    """d(toa)/d(p) and d(toa)/d(vk) for one path.

    The second gradient is None for the direct path (the receiver position
    is known, not estimated).
    """
    p = np.asarray(p, float)
    v0 = np.asarray(v0, float)
    vk = np.asarray(vk, float)
    if is_los:
        r = np.linalg.norm(p - v0)
        if r == 0.0:
            raise DegenerateGeometryError("transmitter coincides with receiver")
        return (p - v0) / (c * r), None
    r_tx = np.linalg.norm(p - vk)
    r_rx = np.linalg.norm(v0 - vk)
    if r_tx == 0.0 or r_rx == 0.0:
        raise DegenerateGeometryError("zero-length leg in scattered path")
    d_dp = (p - vk) / (c * r_tx)
    d_dvk = ((vk - v0) / r_rx + (vk - p) / r_tx) / c
    return d_dp, d_dvk


def aod_gradients(p, vk):
    """d(aod)/d(p) and d(aod)/d(vk) for one path (two-quadrant branch)."""
    p = np.asarray(p, float)
    vk = np.asarray(vk, float)
    dx = vk[0] - p[0]
    dy = vk[1] - p[1]
    r2 = dx * dx + dy * dy
    if r2 == 0.0:
        raise DegenerateGeometryError("transmitter coincides with the path point")
    d_dp = np.array([dy, -dx]) / r2
    return d_dp, -d_dp
