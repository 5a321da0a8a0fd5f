"""Config-driven experiment runner: SNR sweeps over receivers, modes, and
seeds, with delimited output and a run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .channel import channel_rows, fake_channel_rows
from .crlb import (
    channel_parameter_vector,
    crlb_channel_domain,
    crlb_position,
    fim,
    jacobian_analytic,
    position_parameter_vector,
)
from .errors import ScenarioConfigError
from .geometry import BOB, EVE, RECEIVERS, Scenario, channel_params
from .metrics import delta_min, lpl, post_san_separation, sigma_for_snr, true_coordinates
from .signaling import (
    MODE_CLEAN,
    MODE_GAUSSIAN,
    MODE_SAN,
    MODES,
    AOD_SHIFT_SIGN,
    PilotSet,
    SanKey,
    apply_san_to_pilots,
    fake_path_params,
    gaussian_noise_variance,
    generate_pilots,
    signal_energy,
)

SCHEMA_VERSION = 1

DEFAULT_SNR_GRID = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
DEFAULT_SEEDS = tuple(range(20))


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    key: SanKey
    snr_grid_db: tuple
    seeds: tuple
    modes: tuple
    receivers: tuple

    def __post_init__(self):
        if not self.snr_grid_db:
            raise ScenarioConfigError("sweep.snr_grid_db must be non-empty")
        if not self.seeds:
            raise ScenarioConfigError("sweep.seeds must be non-empty")
        if not self.modes:
            raise ScenarioConfigError("sweep.modes must be non-empty")
        if not self.receivers:
            raise ScenarioConfigError("sweep.receivers must be non-empty")
        for m in self.modes:
            if m not in MODES:
                raise ScenarioConfigError(f"sweep.modes: unknown mode {m!r}")
        for r in self.receivers:
            if r not in RECEIVERS:
                raise ScenarioConfigError(f"sweep.receivers: unknown receiver {r!r}")


def default_scenario() -> Scenario:
    return Scenario(
        alice_pos=[3.0, 0.0],
        bob_pos=[10.0, 5.0],
        eve_pos=[10.0, 5.0],
        scatterers=([8.89, -6.05], [7.45, 8.54]),
        carrier_freq_hz=60e9,
        bandwidth_hz=15e6,
        num_tx_antennas=16,
        num_subcarriers=16,
        num_symbols=16,
        lightspeed=300.0,
    )


def default_key() -> SanKey:
    """Default key shifts: 9.8 ns delay shift and a 1e-8 rad angle shift.

    The delay shift is calibrated so that, with the default scene, the
    eavesdropper's position bound sits 7-9 dB above the legitimate
    receiver's while the legitimate receiver's own penalty stays under
    0.1 dB; larger shifts make the fake paths resolvable, smaller ones
    leak the degradation back onto the legitimate receiver's comb.
    """
    return SanKey(delta_tau_us=-0.0098, delta_theta_rad=1e-8)


def default_config() -> ExperimentConfig:
    return ExperimentConfig(
        scenario=default_scenario(),
        key=default_key(),
        snr_grid_db=DEFAULT_SNR_GRID,
        seeds=DEFAULT_SEEDS,
        modes=MODES,
        receivers=RECEIVERS,
    )


def _require(mapping, key, path, types, default=None, required=False):
    if key not in mapping:
        if required:
            raise ScenarioConfigError(f"config: missing required field {path}.{key}")
        return default
    value = mapping[key]
    if not isinstance(value, types):
        raise ScenarioConfigError(
            f"config: field {path}.{key} has type {type(value).__name__}, expected {types}"
        )
    return value


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from parsed key-value text, filling defaults."""
    if not isinstance(data, dict):
        raise ScenarioConfigError("config: top level must be a mapping")
    known = {"scenario", "key", "sweep", "output"}
    for k in data:
        if k not in known:
            raise ScenarioConfigError(f"config: unknown top-level section {k!r}")
    sc = data.get("scenario", {}) or {}
    if not isinstance(sc, dict):
        raise ScenarioConfigError("config: scenario must be a mapping")
    base = default_scenario()
    known_sc = {
        "alice_pos_m",
        "bob_pos_m",
        "eve_pos_m",
        "scatterers_m",
        "carrier_freq_hz",
        "bandwidth_hz",
        "num_tx_antennas",
        "num_subcarriers",
        "num_symbols",
        "lightspeed_m_per_us",
        "antenna_spacing_m",
    }
    for k in sc:
        if k not in known_sc:
            raise ScenarioConfigError(f"config: unknown field scenario.{k}")
    try:
        scenario = Scenario(
            alice_pos=sc.get("alice_pos_m", base.alice_pos),
            bob_pos=sc.get("bob_pos_m", base.bob_pos),
            eve_pos=sc.get("eve_pos_m", base.eve_pos),
            scatterers=tuple(sc.get("scatterers_m", base.scatterers)),
            carrier_freq_hz=float(_require(sc, "carrier_freq_hz", "scenario", (int, float), base.carrier_freq_hz)),
            bandwidth_hz=float(_require(sc, "bandwidth_hz", "scenario", (int, float), base.bandwidth_hz)),
            num_tx_antennas=int(_require(sc, "num_tx_antennas", "scenario", int, base.num_tx_antennas)),
            num_subcarriers=int(_require(sc, "num_subcarriers", "scenario", int, base.num_subcarriers)),
            num_symbols=int(_require(sc, "num_symbols", "scenario", int, base.num_symbols)),
            lightspeed=float(_require(sc, "lightspeed_m_per_us", "scenario", (int, float), base.lightspeed)),
            antenna_spacing=sc.get("antenna_spacing_m"),
        )
    except ScenarioConfigError as exc:
        raise ScenarioConfigError(f"config: scenario: {exc}") from exc
    kd = data.get("key", {}) or {}
    if not isinstance(kd, dict):
        raise ScenarioConfigError("config: key must be a mapping")
    for k in kd:
        if k not in {"delta_tau_us", "delta_theta_tx_rad"}:
            raise ScenarioConfigError(f"config: unknown field key.{k}")
    base_key = default_key()
    key = SanKey(
        delta_tau_us=float(_require(kd, "delta_tau_us", "key", (int, float), base_key.delta_tau_us)),
        delta_theta_rad=float(
            _require(kd, "delta_theta_tx_rad", "key", (int, float), base_key.delta_theta_rad)
        ),
    )
    sw = data.get("sweep", {}) or {}
    if not isinstance(sw, dict):
        raise ScenarioConfigError("config: sweep must be a mapping")
    for k in sw:
        if k not in {"snr_grid_db", "seeds", "modes", "receivers"}:
            raise ScenarioConfigError(f"config: unknown field sweep.{k}")
    snr_grid = tuple(float(x) for x in sw.get("snr_grid_db", DEFAULT_SNR_GRID))
    seeds = tuple(int(x) for x in sw.get("seeds", DEFAULT_SEEDS))
    modes = tuple(sw.get("modes", MODES))
    receivers = tuple(sw.get("receivers", RECEIVERS))
    return ExperimentConfig(
        scenario=scenario,
        key=key,
        snr_grid_db=snr_grid,
        seeds=seeds,
        modes=modes,
        receivers=receivers,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioConfigError(f"config: file not found: {path}")
    except yaml.YAMLError as exc:
        raise ScenarioConfigError(f"config: cannot parse {path}: {exc}")
    return config_from_dict(data or {})


def config_digest(config: ExperimentConfig) -> str:
    """Stable hash of the physical configuration (output paths excluded)."""
    sc = config.scenario
    payload = {
        "scenario": {
            "alice_pos_m": list(sc.alice_pos),
            "bob_pos_m": list(sc.bob_pos),
            "eve_pos_m": list(sc.eve_pos),
            "scatterers_m": [list(v) for v in sc.scatterers],
            "carrier_freq_hz": sc.carrier_freq_hz,
            "bandwidth_hz": sc.bandwidth_hz,
            "num_tx_antennas": sc.num_tx_antennas,
            "num_subcarriers": sc.num_subcarriers,
            "num_symbols": sc.num_symbols,
            "lightspeed_m_per_us": sc.lightspeed,
            "antenna_spacing_m": sc.antenna_spacing,
        },
        "key": {
            "delta_tau_us": config.key.delta_tau_us,
            "delta_theta_tx_rad": config.key.delta_theta_rad,
        },
        "sweep": {
            "snr_grid_db": list(config.snr_grid_db),
            "seeds": list(config.seeds),
            "modes": list(config.modes),
            "receivers": list(config.receivers),
        },
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# per-seed evaluation


@dataclass
class SeedArtifacts:
    seed: int
    pilots: PilotSet
    effective_pilots: np.ndarray       # receiver-side shifted grid
    params: dict                       # receiver -> list[PathParams]
    rows: dict                         # receiver -> (N, N_t) channel rows
    fake_rows: np.ndarray              # eavesdropper-side fake channel rows
    energy_clean: float
    energy_san: float
    zeta2: float
    sep_san: object
    dmin_toa_clean: float
    dmin_aod_clean: float


def build_seed_artifacts(config: ExperimentConfig, seed: int) -> SeedArtifacts:
    sc = config.scenario
    ss = np.random.SeedSequence(seed)
    pilot_ss, gain_ss = ss.spawn(2)
    pilots = generate_pilots(sc.num_symbols, sc.num_subcarriers, sc.num_tx_antennas, pilot_ss)
    params = {r: channel_params(sc, r, np.random.default_rng(gain_ss)) for r in RECEIVERS}
    rows = {r: channel_rows(params[r], sc) for r in RECEIVERS}
    fake = fake_path_params(params[EVE], config.key, sc)
    fake_rows = fake_channel_rows(fake, sc)
    effective = apply_san_to_pilots(pilots, config.key, sc)
    energy_clean = signal_energy(rows[BOB], pilots.pilots)
    energy_san = signal_energy(rows[BOB], effective)
    zeta2 = gaussian_noise_variance(fake_rows, pilots)
    sep = post_san_separation(params[EVE], config.key, sc)
    toas, freqs = true_coordinates(params[EVE], sc)
    if len(toas) >= 2:
        dmin_toa_clean = delta_min(toas)
        dmin_aod_clean = delta_min(freqs)
    else:
        dmin_toa_clean = dmin_aod_clean = float("nan")
    return SeedArtifacts(
        seed=seed,
        pilots=pilots,
        effective_pilots=effective,
        params=params,
        rows=rows,
        fake_rows=fake_rows,
        energy_clean=energy_clean,
        energy_san=energy_san,
        zeta2=zeta2,
        sep_san=sep,
        dmin_toa_clean=dmin_toa_clean,
        dmin_aod_clean=dmin_aod_clean,
    )


def _cell_bounds(config: ExperimentConfig, art: SeedArtifacts, receiver: str, mode: str, snr: float):
    """Position and channel-domain bounds for one grid cell."""
    sc = config.scenario
    num = sc.num_symbols * sc.num_subcarriers
    if mode == MODE_SAN:
        pilot_grid = art.effective_pilots if receiver == BOB else art.pilots.pilots
        key = None if receiver == BOB else config.key
        energy = art.energy_san
    else:
        pilot_grid = art.pilots.pilots
        key = None
        energy = art.energy_clean
    sigma2 = energy / (num * 10.0 ** (snr / 10.0))
    sigma2_eff = sigma2
    if mode == MODE_GAUSSIAN and receiver == EVE:
        sigma2_eff = sigma2 + art.zeta2

    eta_pos = position_parameter_vector(sc, art.params[receiver], key, receiver)
    jac = jacobian_analytic(eta_pos, pilot_grid, sc)
    pos = crlb_position(fim(jac, sigma2_eff, labels=eta_pos.labels))

    eta_ch = channel_parameter_vector(art.params[receiver], key, receiver)
    ch = crlb_channel_domain(eta_ch, pilot_grid, sc, sigma2_eff)
    return sigma2, sigma2_eff, pos, ch


def evaluate_seed(config: ExperimentConfig, seed: int) -> list[dict]:
    """All result rows for one seed, in (snr, receiver, mode) order."""
    art = build_seed_artifacts(config, seed)
    sc = config.scenario
    kp = sc.num_scatterers + 1
    rows_out = []
    for snr in config.snr_grid_db:
        cells = {}
        for receiver in config.receivers:
            for mode in config.modes:
                sigma2, sigma2_eff, pos, ch = _cell_bounds(config, art, receiver, mode, snr)
                if mode == MODE_SAN:
                    dmin_toa, dmin_aod = art.sep_san.delta_min_toa, art.sep_san.delta_min_aod
                else:
                    dmin_toa, dmin_aod = art.dmin_toa_clean, art.dmin_aod_clean
                row = {
                    "schema_version": SCHEMA_VERSION,
                    "receiver": receiver,
                    "mode": mode,
                    "snr_db": snr,
                    "seed": seed,
                    "peb_m": pos.peb_m,
                    "toa_bound_los_us": ch.toa_bounds_us[0],
                    "toa_bound_los_m": ch.toa_bounds_us[0] * sc.lightspeed,
                    "aod_bound_los_rad": ch.aod_bounds_rad[0],
                    "lpl": None,
                    "gap_db": None,
                    "singular_fim": int(pos.singular or ch.singular),
                    "delta_min_toa": dmin_toa,
                    "delta_min_aod": dmin_aod,
                    "sigma2": sigma2,
                    "zeta2": art.zeta2 if mode == MODE_GAUSSIAN else None,
                }
                for k in range(kp):
                    row[f"toa_bound_path{k}_us"] = ch.toa_bounds_us[k]
                    row[f"aod_bound_path{k}_rad"] = ch.aod_bounds_rad[k]
                cells[(receiver, mode)] = row
        for mode in config.modes:
            bob_row = cells.get((BOB, mode))
            eve_row = cells.get((EVE, mode))
            if bob_row and eve_row and bob_row["peb_m"] > 0:
                eve_row["lpl"] = lpl(bob_row["peb_m"], eve_row["peb_m"])
                eve_row["gap_db"] = 20.0 * math.log10(eve_row["peb_m"] / bob_row["peb_m"])
        for receiver in config.receivers:
            for mode in config.modes:
                rows_out.append(cells[(receiver, mode)])
    return rows_out


def csv_columns(config: ExperimentConfig) -> list[str]:
    kp = config.scenario.num_scatterers + 1
    cols = [
        "schema_version",
        "receiver",
        "mode",
        "snr_db",
        "seed",
        "peb_m",
        "toa_bound_los_us",
        "toa_bound_los_m",
        "aod_bound_los_rad",
    ]
    for k in range(kp):
        cols.append(f"toa_bound_path{k}_us")
        cols.append(f"aod_bound_path{k}_rad")
    cols += ["lpl", "gap_db", "singular_fim", "delta_min_toa", "delta_min_aod", "sigma2", "zeta2"]
    return cols


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


def rows_to_csv_text(rows: list[dict], config: ExperimentConfig) -> str:
    cols = csv_columns(config)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_format_value(row.get(c)) for c in cols])
    return buf.getvalue()


def manifest_text(config: ExperimentConfig, key_scale: float = 1.0) -> str:
    lines = [
        f"tool: sanloc {__version__}",
        f"schema_version: {SCHEMA_VERSION}",
        f"config_sha256: {config_digest(config)}",
        f"aod_shift_sign: {AOD_SHIFT_SIGN:+.0f}",
        f"key_scale: {_format_value(float(key_scale))}",
        f"delta_tau_us: {_format_value(config.key.delta_tau_us)}",
        f"delta_theta_tx_rad: {_format_value(config.key.delta_theta_rad)}",
        f"lightspeed_m_per_us: {_format_value(config.scenario.lightspeed)}",
        "nlos_gain_model: free-space amplitude over total path length, no reflection loss",
        "lpl_rmse_source: crlb position error bound",
        "noise_baseline: constant matched variance across the SNR grid, per seed",
        f"snr_grid_db: {','.join(_format_value(x) for x in config.snr_grid_db)}",
        f"seeds: {','.join(str(s) for s in config.seeds)}",
        f"modes: {','.join(config.modes)}",
        f"receivers: {','.join(config.receivers)}",
    ]
    return "\n".join(lines) + "\n"


def run_sweep(
    config: ExperimentConfig,
    out_dir,
    threads: int = 1,
    key_scale: float = 1.0,
) -> tuple[Path, Path, list[dict]]:
    """Evaluate the whole grid and write results.csv plus manifest.txt.

    Rows are assembled in (seed, snr, receiver, mode) order regardless of
    how many workers execute the per-seed evaluations.
    """
    if key_scale != 1.0:
        config = replace(config, key=config.key.scaled(key_scale))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_seed = list(pool.map(lambda s: evaluate_seed(config, s), config.seeds))
    else:
        per_seed = [evaluate_seed(config, s) for s in config.seeds]
    rows = [row for chunk in per_seed for row in chunk]
    csv_path = out / "results.csv"
    csv_path.write_text(rows_to_csv_text(rows, config))
    manifest_path = out / "manifest.txt"
    manifest_path.write_text(manifest_text(config, key_scale=key_scale))
    return csv_path, manifest_path, rows


def fig2d_sweep(
    config: ExperimentConfig, scale: float, out_dir, threads: int = 1
) -> tuple[Path, Path, list[dict]]:
    """Sweep with both key shift magnitudes scaled by ``scale``."""
    if scale <= 0:
        raise ScenarioConfigError("scale must be positive")
    return run_sweep(config, out_dir, threads=threads, key_scale=scale)
