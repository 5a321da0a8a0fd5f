"""Self-validation: every derived quantity is checked against an
independent oracle (finite differences, direct summation, exhaustive
enumeration, Monte Carlo).  The same checks back the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import channel_rows, fake_channel_rows
from .crlb import (
    channel_parameter_vector,
    fim,
    finite_difference_jacobian,
    jacobian_analytic,
    position_parameter_vector,
)
from .errors import SanlocError
from .geometry import BOB, EVE, Scenario, channel_params
from .metrics import delta_min, sigma_for_snr, snr_db
from .signaling import (
    SanKey,
    apply_san_to_pilots,
    fake_path_params,
    generate_pilots,
    noiseless_observations,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured {self.measured:.3e} vs tolerance {self.tolerance:.0e} {self.detail}"


def random_scenario(rng, num_scatterers=None) -> Scenario:
    """Random non-degenerate scene with all nodes in the forward half-plane
    of the transmitter (keeps the two-quadrant angle branch aside)."""
    while True:
        alice = rng.uniform(-3.0, 3.0, size=2)

        def _node():
            return alice + np.array([rng.uniform(2.5, 12.0), rng.uniform(-9.0, 9.0)])

        bob = _node()
        eve = _node()
        k = rng.integers(0, 3) if num_scatterers is None else num_scatterers
        scatterers = []
        for _ in range(k):
            v = _node()
            if min(np.linalg.norm(v - bob), np.linalg.norm(v - eve)) < 0.5:
                break
            scatterers.append(v)
        if len(scatterers) != k:
            continue
        try:
            sc = Scenario(
                alice_pos=alice,
                bob_pos=bob,
                eve_pos=eve,
                scatterers=tuple(scatterers),
                num_tx_antennas=int(rng.choice([4, 8, 16])),
                num_subcarriers=int(rng.choice([8, 16])),
                num_symbols=int(rng.choice([2, 4])),
            )
            channel_params(sc, BOB, np.random.default_rng(0))
            channel_params(sc, EVE, np.random.default_rng(0))
        except SanlocError:
            continue
        return sc


def random_key(rng, scenario: Scenario) -> SanKey:
    """Key with shifts large enough to be numerically decisive but inside
    the arcsin domain for every path of either receiver."""
    sines = []
    for receiver in (BOB, EVE):
        params = channel_params(scenario, receiver, np.random.default_rng(0))
        sines.extend(np.sin(pp.aod) for pp in params)
    margin = 1.0 - max(abs(s) for s in sines)
    for _ in range(100):
        delta_tau = rng.uniform(0.005, 0.08) * rng.choice([-1.0, 1.0])
        delta_theta = rng.uniform(0.01, 0.25) * rng.choice([-1.0, 1.0])
        if abs(np.sin(delta_theta)) < 0.9 * margin:
            return SanKey(delta_tau_us=delta_tau, delta_theta_rad=delta_theta)
    return SanKey(delta_tau_us=0.01, delta_theta_rad=0.5 * margin)


def _column_relative_errors(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(analytic, axis=0)
    return np.linalg.norm(numeric - analytic, axis=0) / np.maximum(norms, 1e-300)


def check_jacobian_finite_difference(num_scenarios: int = 50, seed: int = 2024) -> CheckResult:
    """Analytic Jacobian columns vs central differences, both domains."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    fims = []
    for i in range(num_scenarios):
        sc = random_scenario(rng)
        key = random_key(rng, sc) if i % 2 == 0 else None
        receiver = EVE if key is not None else BOB
        params = channel_params(sc, receiver, rng)
        pilots = generate_pilots(sc.num_symbols, sc.num_subcarriers, sc.num_tx_antennas, rng)
        grid = pilots.pilots
        for eta in (
            position_parameter_vector(sc, params, key, receiver),
            channel_parameter_vector(params, key, receiver),
        ):
            analytic = jacobian_analytic(eta, grid, sc)
            numeric = finite_difference_jacobian(eta, grid, sc)
            worst = max(worst, float(np.max(_column_relative_errors(analytic, numeric))))
            fims.append(fim(analytic, 1.0, labels=eta.labels).matrix)
    result = CheckResult(
        name="jacobian analytic vs central finite differences",
        measured=worst,
        tolerance=1e-6,
        passed=worst < 1e-6,
        detail=f"({num_scenarios} randomized scenarios, both parameter domains)",
    )
    return result, fims


def check_fim_properties(fims) -> CheckResult:
    """Symmetry and positive semidefiniteness of every evaluated FIM."""
    worst = 0.0
    for j in fims:
        asym = np.max(np.abs(j - j.T)) / max(np.max(np.abs(j)), 1e-300)
        eigs = np.linalg.eigvalsh(j)
        neg = max(0.0, -eigs[0] / max(eigs[-1], 1e-300))
        worst = max(worst, asym, neg)
    return CheckResult(
        name="fim symmetry and positive semidefiniteness",
        measured=worst,
        tolerance=1e-10,
        passed=worst < 1e-10,
        detail=f"({len(fims)} matrices)",
    )


def check_equivalence(num_draws: int = 100, seed: int = 77) -> CheckResult:
    """Beamformed-transmit route vs public-plus-fake-channel route."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_draws):
        sc = random_scenario(rng)
        key = random_key(rng, sc)
        params = channel_params(sc, EVE, rng)
        pilots = generate_pilots(sc.num_symbols, sc.num_subcarriers, sc.num_tx_antennas, rng)
        rows = channel_rows(params, sc)
        lhs = noiseless_observations(rows, apply_san_to_pilots(pilots, key, sc))
        fake = fake_path_params(params, key, sc)
        rhs = noiseless_observations(rows + fake_channel_rows(fake, sc), pilots.pilots)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return CheckResult(
        name="beamformer vs fake-path channel equivalence",
        measured=worst,
        tolerance=1e-10,
        passed=worst < 1e-10,
        detail=f"({num_draws} random scene/key draws)",
    )


def check_delta_min_oracle(num_sets: int = 1000, seed: int = 5) -> CheckResult:
    """Vectorized torus separation vs exhaustive pair enumeration."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_sets):
        vals = rng.uniform(0.0, 1.0, size=rng.integers(2, 9))
        brute = min(
            min(abs(a - b), 1.0 - abs(a - b))
            for i, a in enumerate(vals)
            for b in vals[i + 1 :]
        )
        worst = max(worst, abs(delta_min(vals) - brute))
    return CheckResult(
        name="minimal separation vs exhaustive pairs",
        measured=worst,
        tolerance=1e-12,
        passed=worst < 1e-12,
        detail=f"({num_sets} random coordinate sets)",
    )


def check_snr_round_trip(seed: int = 11) -> CheckResult:
    from .experiments import default_scenario

    sc = default_scenario()
    rng = np.random.default_rng(seed)
    params = channel_params(sc, BOB, rng)
    pilots = generate_pilots(sc.num_symbols, sc.num_subcarriers, sc.num_tx_antennas, rng)
    rows = channel_rows(params, sc)
    worst = 0.0
    for target in (-10.0, 0.0, 20.0):
        sigma2 = sigma_for_snr(target, rows, pilots.pilots)
        worst = max(worst, abs(snr_db(rows, pilots.pilots, sigma2) - target))
    return CheckResult(
        name="snr calibration round trip",
        measured=worst,
        tolerance=1e-6,
        passed=worst < 1e-6,
        detail="(targets -10, 0, 20 dB)",
    )


def check_noise_variance(num_draws: int = 100_000, seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    sigma2 = 2.5
    w = np.sqrt(sigma2 / 2) * (rng.standard_normal(num_draws) + 1j * rng.standard_normal(num_draws))
    measured = abs(float(np.mean(np.abs(w) ** 2)) / sigma2 - 1.0)
    return CheckResult(
        name="empirical complex noise variance",
        measured=measured,
        tolerance=0.02,
        passed=measured < 0.02,
        detail=f"({num_draws} draws)",
    )


def run_all_checks() -> list[CheckResult]:
    jac_check, fims = check_jacobian_finite_difference()
    return [
        jac_check,
        check_fim_properties(fims),
        check_equivalence(),
        check_delta_min_oracle(),
        check_snr_round_trip(),
        check_noise_variance(),
    ]
