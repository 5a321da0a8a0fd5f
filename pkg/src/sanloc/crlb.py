"""Fisher information and Cramer-Rao lower bounds for both receivers.

Two parametrizations are supported.  The position domain estimates the
transmitter position, the scatterer positions, and the complex path gains
(as real/imaginary pairs); the eavesdropper under structured noise
additionally estimates the two key shifts.  The channel domain estimates
the per-path delays and angles directly.

The observation mean is mu^(g,n) = h^(n)(eta) . s_eff^(g,n), where the
effective pilot grid is the receiver-side shifted grid for the legitimate
receiver under structured noise, and the plain grid otherwise; when the
parameter vector carries the key shifts, the mean adds the fake-path
channel reconstructed from the same parameters.  The Fisher information of
the complex Gaussian model is

    J_il = (2/sigma^2) sum_{g,n} Re{ conj(d mu/d eta_i) d mu/d eta_l }.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DerivativeSingularityError, KeyTooLargeError, ScenarioConfigError
from .geometry import (
    PathParams,
    Scenario,
    aod_gradients,
    aod_of_path,
    toa_gradients,
    toa_of_path,
)
from .signaling import AOD_SHIFT_SIGN, SanKey

POSITION_DOMAIN = "position"
CHANNEL_DOMAIN = "channel"


@dataclass(frozen=True)
class ParameterVector:
    """Ordered real parameters of one receiver's estimation problem."""

    domain: str                 # "position" or "channel"
    receiver: str
    num_paths: int              # K + 1, direct path included
    values: np.ndarray
    includes_key: bool
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, float).reshape(-1))
        # position: p (2) + scatterers (2K) + gains (2K+2); channel:
        # delays (K+1) + angles (K+1) + gains (2K+2); both are 4(K+1).
        expected = 4 * self.num_paths + (2 if self.includes_key else 0)
        if self.domain not in (POSITION_DOMAIN, CHANNEL_DOMAIN):
            raise ScenarioConfigError(f"unknown parameter domain {self.domain!r}")
        if self.values.size != expected or len(self.labels) != expected:
            raise ScenarioConfigError(
                f"{self.domain} parameter vector must have {expected} entries, got {self.values.size}"
            )

    @property
    def dim(self) -> int:
        return self.values.size

    def replace_values(self, values) -> "ParameterVector":
        return ParameterVector(
            domain=self.domain,
            receiver=self.receiver,
            num_paths=self.num_paths,
            values=np.asarray(values, float),
            includes_key=self.includes_key,
            labels=self.labels,
        )


def position_parameter_vector(
    scenario: Scenario, params: list[PathParams], key: SanKey | None, receiver: str
) -> ParameterVector:
    """[p, v_1..v_K, Re/Im gamma_0..K, (delta_tau, delta_theta)]."""
    num_paths = len(params)
    if num_paths != scenario.num_scatterers + 1:
        raise ScenarioConfigError(
            f"expected {scenario.num_scatterers + 1} paths for this scenario, got {num_paths}"
        )
    values = list(scenario.alice_pos)
    labels = ["p_x", "p_y"]
    for k, vk in enumerate(scenario.scatterers, start=1):
        values.extend(vk)
        labels.extend([f"v{k}_x", f"v{k}_y"])
    for k, pp in enumerate(params):
        values.extend([pp.gain.real, pp.gain.imag])
        labels.extend([f"re_gamma{k}", f"im_gamma{k}"])
    if key is not None:
        values.extend([key.delta_tau_us, key.delta_theta_rad])
        labels.extend(["delta_tau", "delta_theta"])
    return ParameterVector(
        domain=POSITION_DOMAIN,
        receiver=receiver,
        num_paths=num_paths,
        values=np.array(values),
        includes_key=key is not None,
        labels=tuple(labels),
    )


def channel_parameter_vector(
    params: list[PathParams], key: SanKey | None, receiver: str
) -> ParameterVector:
    """[tau_0..K, theta_0..K, Re/Im gamma_0..K, (delta_tau, delta_theta)]."""
    num_paths = len(params)
    values = [pp.toa for pp in params] + [pp.aod for pp in params]
    labels = [f"tau{k}" for k in range(num_paths)] + [f"theta{k}" for k in range(num_paths)]
    for k, pp in enumerate(params):
        values.extend([pp.gain.real, pp.gain.imag])
        labels.extend([f"re_gamma{k}", f"im_gamma{k}"])
    if key is not None:
        values.extend([key.delta_tau_us, key.delta_theta_rad])
        labels.extend(["delta_tau", "delta_theta"])
    return ParameterVector(
        domain=CHANNEL_DOMAIN,
        receiver=receiver,
        num_paths=num_paths,
        values=np.array(values),
        includes_key=key is not None,
        labels=tuple(labels),
    )


# ---------------------------------------------------------------------------
# decoding and shared response kernels


@dataclass
class _PathState:
    taus: np.ndarray
    sines: np.ndarray
    cosines: np.ndarray
    gains: np.ndarray           # complex, (K+1,)
    delta: tuple | None         # (delta_tau, delta_theta) or None
    # geometry gradients, position domain only
    dtau_dp: np.ndarray | None = None       # (K+1, 2)
    dtau_dv: np.ndarray | None = None       # (K+1, 2); row 0 unused
    dth_dp: np.ndarray | None = None
    dth_dv: np.ndarray | None = None


def _decode(eta: ParameterVector, scenario: Scenario, with_gradients: bool) -> _PathState:
    vals = eta.values
    kp = eta.num_paths
    if eta.domain == CHANNEL_DOMAIN:
        taus = vals[:kp].copy()
        thetas = vals[kp : 2 * kp]
        gains_flat = vals[2 * kp : 4 * kp]
        sines = np.sin(thetas)
        cosines = np.cos(thetas)
        dtau_dp = dtau_dv = dth_dp = dth_dv = None
    else:
        p = vals[0:2]
        num_scatterers = kp - 1
        v0 = scenario.receiver_pos(eta.receiver)
        points = [v0] + [vals[2 + 2 * i : 4 + 2 * i] for i in range(num_scatterers)]
        gains_flat = vals[2 + 2 * num_scatterers : 2 + 2 * num_scatterers + 2 * kp]
        taus = np.empty(kp)
        sines = np.empty(kp)
        cosines = np.empty(kp)
        dtau_dp = np.zeros((kp, 2))
        dtau_dv = np.zeros((kp, 2))
        dth_dp = np.zeros((kp, 2))
        dth_dv = np.zeros((kp, 2))
        for k, vk in enumerate(points):
            taus[k] = toa_of_path(p, v0, vk, scenario.lightspeed)
            theta = aod_of_path(p, vk)
            sines[k] = np.sin(theta)
            cosines[k] = np.cos(theta)
            if with_gradients:
                g_p, g_v = toa_gradients(p, v0, vk, scenario.lightspeed, is_los=(k == 0))
                dtau_dp[k] = g_p
                if g_v is not None:
                    dtau_dv[k] = g_v
                a_p, a_v = aod_gradients(p, vk)
                dth_dp[k] = a_p
                dth_dv[k] = a_v
    gains = gains_flat[0::2] + 1j * gains_flat[1::2]
    delta = tuple(vals[-2:]) if eta.includes_key else None
    return _PathState(
        taus=taus,
        sines=sines,
        cosines=cosines,
        gains=gains,
        delta=delta,
        dtau_dp=dtau_dp,
        dtau_dv=dtau_dv,
        dth_dp=dth_dp,
        dth_dv=dth_dv,
    )


def _fake_arrays(state: _PathState):
    """Fake-twin delays and sine/cosine angles implied by the key entries."""
    delta_tau, delta_theta = state.delta
    taus = state.taus + delta_tau
    sines = state.sines + AOD_SHIFT_SIGN * np.sin(delta_theta)
    if np.any(np.abs(sines) > 1.0):
        raise KeyTooLargeError("fake-path sine-angle outside [-1, 1] at this parameter point")
    cosines = np.sqrt(1.0 - sines**2)
    return taus, sines, cosines


def _grid_responses(taus, sines, cosines, pilot_grid, scenario: Scenario):
    """Per-path response B and its tau/theta derivatives D, C on the grid.

    B[k, g, n] = e^{-j2pi n tau_k/(N T_s)} sum_m e^{+j2pi m d sin(theta_k)/lam} s^(g,n)_m
    """
    n_t = scenario.num_tx_antennas
    n_sub = scenario.num_subcarriers
    m = np.arange(n_t)
    n = np.arange(n_sub)
    spatial = scenario.antenna_spacing / scenario.wavelength
    steer_conj = np.exp(2j * np.pi * spatial * np.outer(sines, m))          # (K, N_t)
    steer_conj_dot = steer_conj * (2j * np.pi * spatial * cosines[:, None] * m[None, :])
    proj = np.einsum("km,gnm->kgn", steer_conj, pilot_grid)
    proj_dot = np.einsum("km,gnm->kgn", steer_conj_dot, pilot_grid)
    delay = np.exp(-2j * np.pi * np.outer(taus, n) / scenario.delay_period)  # (K, N)
    b = delay[:, None, :] * proj
    c = delay[:, None, :] * proj_dot
    d = (-2j * np.pi * n / scenario.delay_period)[None, None, :] * b
    return b, c, d


def mean_signal(eta: ParameterVector, pilot_grid: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Noiseless observation grid mu^(g,n), shape (G, N)."""
    state = _decode(eta, scenario, with_gradients=False)
    b, _, _ = _grid_responses(state.taus, state.sines, state.cosines, pilot_grid, scenario)
    mu = np.einsum("k,kgn->gn", state.gains, b)
    if state.delta is not None:
        ft, fs, fc = _fake_arrays(state)
        bf, _, _ = _grid_responses(ft, fs, fc, pilot_grid, scenario)
        mu = mu + np.einsum("k,kgn->gn", state.gains, bf)
    return mu


def jacobian_analytic(eta: ParameterVector, pilot_grid: np.ndarray, scenario: Scenario) -> np.ndarray:
    """Complex Jacobian d mu / d eta, shape (G*N, dim)."""
    state = _decode(eta, scenario, with_gradients=True)
    b, c, d = _grid_responses(state.taus, state.sines, state.cosines, pilot_grid, scenario)
    kp = eta.num_paths
    gains = state.gains
    if state.delta is not None:
        ft, fs, fc = _fake_arrays(state)
        if np.any(fc == 0.0):
            raise DerivativeSingularityError("fake-path angle at +-pi/2; derivative undefined")
        bf, cf, df = _grid_responses(ft, fs, fc, pilot_grid, scenario)
        # chain factors through theta_fake = arcsin(sin(theta) + sign*sin(delta_theta))
        theta_chain = state.cosines / fc                       # d theta_fake / d theta
        delta_theta = state.delta[1]
        key_chain = AOD_SHIFT_SIGN * np.cos(delta_theta) / fc  # d theta_fake / d delta_theta
        b_eff = b + bf
        d_eff = d + df
        c_eff = c + cf * theta_chain[:, None, None]
    else:
        b_eff, d_eff, c_eff = b, d, c

    cols = []
    if eta.domain == CHANNEL_DOMAIN:
        for k in range(kp):
            cols.append(gains[k] * d_eff[k])
        for k in range(kp):
            cols.append(gains[k] * c_eff[k])
    else:
        gd = np.einsum("k,kgn->kgn", gains, d_eff)
        gc = np.einsum("k,kgn->kgn", gains, c_eff)
        for j in range(2):
            cols.append(
                np.einsum("k,kgn->gn", state.dtau_dp[:, j], gd)
                + np.einsum("k,kgn->gn", state.dth_dp[:, j], gc)
            )
        for k in range(1, kp):
            for j in range(2):
                cols.append(state.dtau_dv[k, j] * gd[k] + state.dth_dv[k, j] * gc[k])
    for k in range(kp):
        cols.append(b_eff[k])
        cols.append(1j * b_eff[k])
    if state.delta is not None:
        cols.append(np.einsum("k,kgn->gn", gains, df))
        cols.append(np.einsum("k,kgn->gn", gains * key_chain, cf))
    return np.stack([col.reshape(-1) for col in cols], axis=1)


def _fd_scale(label: str, value: float, eta: ParameterVector, scenario: Scenario) -> float:
    gains = _decode(eta, scenario, with_gradients=False).gains
    gain_scale = max(np.max(np.abs(gains)), 1e-12)
    if label.startswith(("p_", "v")):
        floor = 1.0
    elif "gamma" in label:
        floor = gain_scale
    elif label.startswith(("tau", "delta_tau")):
        floor = 0.01 * scenario.delay_period
    else:  # theta / delta_theta
        floor = 1e-3
    return max(abs(value), floor)


def finite_difference_jacobian(
    eta: ParameterVector, pilot_grid: np.ndarray, scenario: Scenario, rel_step: float = 1e-6
) -> np.ndarray:
    """Central-difference Jacobian of `mean_signal`, for validating the
    analytic one.  Steps are relative to a per-parameter scale so that
    parameters sitting at or near zero still get a sensible step."""
    base = eta.values
    cols = []
    for i, label in enumerate(eta.labels):
        h = rel_step * _fd_scale(label, base[i], eta, scenario)
        up = base.copy()
        up[i] += h
        dn = base.copy()
        dn[i] -= h
        mu_up = mean_signal(eta.replace_values(up), pilot_grid, scenario)
        mu_dn = mean_signal(eta.replace_values(dn), pilot_grid, scenario)
        cols.append(((mu_up - mu_dn) / (2 * h)).reshape(-1))
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# Fisher information and bounds


@dataclass(frozen=True)
class FimResult:
    matrix: np.ndarray
    labels: tuple

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def fim(jacobian: np.ndarray, sigma2: float, labels: tuple = ()) -> FimResult:
    """J = (2/sigma^2) Re(Jmu^H Jmu); symmetrized exactly."""
    if sigma2 <= 0:
        raise ScenarioConfigError("sigma2 must be positive")
    m = (jacobian.conj().T @ jacobian).real
    j = (2.0 / sigma2) * m
    j = 0.5 * (j + j.T)
    if not labels:
        labels = tuple(f"eta{i}" for i in range(j.shape[0]))
    return FimResult(matrix=j, labels=labels)


# Relative condition number (after unit-diagonal scaling) beyond which the
# inverse switches to a pseudo-inverse and the result is flagged.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class FimInverse:
    covariance: np.ndarray
    singular: bool
    cond: float


def invert_fim(result: FimResult, cond_limit: float = COND_LIMIT) -> FimInverse:
    """Invert with unit-diagonal scaling; fall back to a pseudo-inverse and
    flag the cell when the scaled matrix is numerically singular."""
    j = result.matrix
    diag = np.diag(j).copy()
    if np.any(~np.isfinite(diag)) or np.any(diag <= 0.0):
        cov = np.linalg.pinv(j, hermitian=True)
        return FimInverse(covariance=cov, singular=True, cond=np.inf)
    scale = 1.0 / np.sqrt(diag)
    jn = j * np.outer(scale, scale)
    cond = float(np.linalg.cond(jn))
    singular = not np.isfinite(cond) or cond > cond_limit
    try:
        inv_n = np.linalg.pinv(jn, hermitian=True) if singular else np.linalg.inv(jn)
    except np.linalg.LinAlgError:
        inv_n = np.linalg.pinv(jn, hermitian=True)
        singular = True
    cov = inv_n * np.outer(scale, scale)
    return FimInverse(covariance=cov, singular=singular, cond=cond)


@dataclass(frozen=True)
class PositionCrlb:
    peb_m: float
    singular: bool
    cond: float


def crlb_position(result: FimResult) -> PositionCrlb:
    """Position error bound sqrt([J^-1]_pxpx + [J^-1]_pypy), nuisance
    parameters marginalized by full inversion."""
    ix = result.labels.index("p_x")
    iy = result.labels.index("p_y")
    inv = invert_fim(result)
    var = max(inv.covariance[ix, ix], 0.0) + max(inv.covariance[iy, iy], 0.0)
    return PositionCrlb(peb_m=float(np.sqrt(var)), singular=inv.singular, cond=inv.cond)


@dataclass(frozen=True)
class ChannelCrlb:
    toa_bounds_us: np.ndarray
    aod_bounds_rad: np.ndarray
    singular: bool
    cond: float


def crlb_channel_domain(
    eta: ParameterVector, pilot_grid: np.ndarray, scenario: Scenario, sigma2: float
) -> ChannelCrlb:
    """Per-path delay and angle bounds from the channel-domain FIM."""
    if eta.domain != CHANNEL_DOMAIN:
        raise ScenarioConfigError("expected a channel-domain parameter vector")
    jac = jacobian_analytic(eta, pilot_grid, scenario)
    inv = invert_fim(fim(jac, sigma2, labels=eta.labels))
    kp = eta.num_paths
    var = np.maximum(np.diag(inv.covariance), 0.0)
    return ChannelCrlb(
        toa_bounds_us=np.sqrt(var[:kp]),
        aod_bounds_rad=np.sqrt(var[kp : 2 * kp]),
        singular=inv.singular,
        cond=inv.cond,
    )
