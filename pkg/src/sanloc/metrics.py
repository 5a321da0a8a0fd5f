"""Separation, resolvability, SNR calibration, and the leakage metric."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CalibrationError,
    LplUndefinedError,
    SeparationUndefinedError,
    ThresholdUndefinedError,
)
from .geometry import PathParams, Scenario
from .signaling import SanKey, fake_path_params


def delta_min(values) -> float:
    """Smallest wrap-around pairwise distance of coordinates on the unit torus."""
    vals = np.mod(np.asarray(values, float).reshape(-1), 1.0)
    if vals.size < 2:
        raise SeparationUndefinedError("minimal separation needs at least two coordinates")
    diff = np.abs(vals[:, None] - vals[None, :])
    dist = np.minimum(diff, 1.0 - diff)
    iu = np.triu_indices(vals.size, k=1)
    return float(np.min(dist[iu]))


def _torus_distance(x: float) -> float:
    frac = float(np.mod(x, 1.0))
    return min(frac, 1.0 - frac)


@dataclass(frozen=True)
class SeparationReport:
    """Minimal separations of the combined true + fake coordinate sets.

    ``delta_min_*`` are exact values over all pairs.  The closed forms
    |delta_tau/(N T_s)| and |d sin(delta_theta)/lambda| describe only the
    true-to-twin distance and match the exact value when the key shifts are
    small against the inter-path spacings; ``closed_form_matches_*`` records
    whether they do.
    """

    delta_min_toa: float
    delta_min_aod: float
    closed_form_toa: float
    closed_form_aod: float
    closed_form_matches_toa: bool
    closed_form_matches_aod: bool
    toa_threshold: float | None = None
    aod_threshold: float | None = None
    toa_resolvable: bool | None = None
    aod_resolvable: bool | None = None


def true_coordinates(params: list[PathParams], scenario: Scenario):
    """Normalized delay and spatial-frequency coordinates of the true paths."""
    toas = np.array([pp.toa for pp in params]) / scenario.delay_period
    freqs = scenario.antenna_spacing * np.sin([pp.aod for pp in params]) / scenario.wavelength
    return toas, freqs


def post_san_separation(params: list[PathParams], key: SanKey, scenario: Scenario) -> SeparationReport:
    """Exact minimal separations after injecting the fake twins.

    Also evaluates the small-shift closed forms (torus-reduced) and flags
    whether the exact values coincide with them.
    """
    fake = fake_path_params(params, key, scenario)
    toas_true, freqs_true = true_coordinates(params, scenario)
    toas_fake = fake.toas / scenario.delay_period
    freqs_fake = scenario.antenna_spacing * np.sin(fake.aods) / scenario.wavelength
    dmin_toa = delta_min(np.concatenate([toas_true, toas_fake]))
    dmin_aod = delta_min(np.concatenate([freqs_true, freqs_fake]))
    cf_toa = _torus_distance(key.delta_tau_us / scenario.delay_period)
    cf_aod = _torus_distance(
        scenario.antenna_spacing * np.sin(key.delta_theta_rad) / scenario.wavelength
    )
    return SeparationReport(
        delta_min_toa=dmin_toa,
        delta_min_aod=dmin_aod,
        closed_form_toa=cf_toa,
        closed_form_aod=cf_aod,
        closed_form_matches_toa=bool(np.isclose(dmin_toa, cf_toa, rtol=1e-9, atol=1e-15)),
        closed_form_matches_aod=bool(np.isclose(dmin_aod, cf_aod, rtol=1e-9, atol=1e-15)),
    )


def resolvability_check(report: SeparationReport, num_subcarriers: int, num_antennas: int) -> SeparationReport:
    """Attach super-resolution thresholds 1/floor((N-1)/8) and 1/floor((N_t-1)/4)."""
    floor_toa = (num_subcarriers - 1) // 8
    floor_aod = (num_antennas - 1) // 4
    if floor_toa == 0 or floor_aod == 0:
        raise ThresholdUndefinedError(
            f"resolvability thresholds undefined for N={num_subcarriers}, N_t={num_antennas}"
        )
    toa_threshold = 1.0 / floor_toa
    aod_threshold = 1.0 / floor_aod
    return replace(
        report,
        toa_threshold=toa_threshold,
        aod_threshold=aod_threshold,
        toa_resolvable=bool(report.delta_min_toa >= toa_threshold),
        aod_resolvable=bool(report.delta_min_aod >= aod_threshold),
    )


def snr_db(rows: np.ndarray, pilot_grid: np.ndarray, sigma2: float) -> float:
    """10 log10( sum_{g,n} |h^(n) s^(g,n)|^2 / (N G sigma^2) )."""
    if sigma2 <= 0:
        raise CalibrationError("sigma2 must be positive")
    from .signaling import signal_energy

    num_symbols, num_subcarriers = pilot_grid.shape[0], pilot_grid.shape[1]
    energy = signal_energy(rows, pilot_grid)
    return 10.0 * np.log10(energy / (num_symbols * num_subcarriers * sigma2))


def sigma_for_snr(target_db: float, rows: np.ndarray, pilot_grid: np.ndarray) -> float:
    """Noise variance that puts the grid at the requested SNR."""
    if not np.isfinite(target_db):
        raise CalibrationError("target SNR must be finite")
    from .signaling import signal_energy

    num_symbols, num_subcarriers = pilot_grid.shape[0], pilot_grid.shape[1]
    energy = signal_energy(rows, pilot_grid)
    if energy <= 0.0:
        raise CalibrationError("zero signal energy; cannot calibrate noise")
    return energy / (num_symbols * num_subcarriers * 10.0 ** (target_db / 10.0))


def lpl(rmse_bob: float, rmse_eve: float) -> float:
    """Location-privacy leakage (rmse_bob - rmse_eve) / rmse_bob.

    Non-positive values mean the eavesdropper does no better than the
    legitimate receiver.
    """
    if rmse_bob <= 0:
        raise LplUndefinedError("reference RMSE must be positive")
    return (rmse_bob - rmse_eve) / rmse_bob
