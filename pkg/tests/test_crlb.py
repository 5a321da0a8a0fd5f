import numpy as np
import pytest

from sanloc.channel import channel_rows
from sanloc.crlb import (
    CHANNEL_DOMAIN,
    FimResult,
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
from sanloc.errors import DerivativeSingularityError
from sanloc.geometry import PathParams, Scenario, channel_params
from sanloc.signaling import SanKey, apply_san_to_pilots, generate_pilots, synthesize_received
from sanloc.validate import _column_relative_errors, random_key, random_scenario


@pytest.fixture(scope="module")
def setup(scenario):
    params = channel_params(scenario, "eve", 0)
    pilots = generate_pilots(16, 16, 16, 0)
    return params, pilots


class TestParameterVectors:
    def test_dimensions_and_labels(self, scenario, setup):
        params, _ = setup
        bob = position_parameter_vector(scenario, params, None, "bob")
        assert bob.dim == 2 + 2 * 2 + 2 * 3
        assert bob.labels[:2] == ("p_x", "p_y")
        eve = position_parameter_vector(scenario, params, SanKey(-0.01, 1e-8), "eve")
        assert eve.dim == bob.dim + 2
        assert eve.labels[-2:] == ("delta_tau", "delta_theta")

    def test_channel_domain_order(self, setup, scenario):
        params, _ = setup
        eta = channel_parameter_vector(params, None, "bob")
        assert eta.labels[:3] == ("tau0", "tau1", "tau2")
        assert eta.labels[3:6] == ("theta0", "theta1", "theta2")
        assert np.allclose(eta.values[:3], [pp.toa for pp in params])


class TestMeanSignal:
    def test_zero_gains_zero_mean(self, scenario, setup):
        params, pilots = setup
        silent = [PathParams(toa=pp.toa, aod=pp.aod, gain=0.0, is_los=pp.is_los) for pp in params]
        eta = position_parameter_vector(scenario, silent, None, "bob")
        assert np.allclose(mean_signal(eta, pilots.pilots, scenario), 0.0)

    def test_bob_consistency_with_synthesized(self, scenario, config, setup):
        params, pilots = setup
        rows = channel_rows(params, scenario)
        eff = apply_san_to_pilots(pilots, config.key, scenario)
        obs = synthesize_received(rows, pilots, config.key, 1e-30, 0, "bob", "san", scenario)
        eta = position_parameter_vector(scenario, params, None, "bob")
        mu = mean_signal(eta, eff, scenario)
        assert np.allclose(mu, obs.mean, rtol=1e-10)

    def test_eve_consistency_with_synthesized(self, scenario, config, setup):
        params, pilots = setup
        rows = channel_rows(params, scenario)
        obs = synthesize_received(rows, pilots, config.key, 1e-30, 0, "eve", "san", scenario)
        eta = position_parameter_vector(scenario, params, config.key, "eve")
        mu = mean_signal(eta, pilots.pilots, scenario)
        scale = np.max(np.abs(obs.mean))
        assert np.max(np.abs(mu - obs.mean)) < 1e-10 * max(scale, 1.0)


class TestJacobian:
    def test_gain_column_is_path_response(self, scenario, setup):
        params, pilots = setup
        eta = position_parameter_vector(scenario, params, None, "bob")
        jac = jacobian_analytic(eta, pilots.pilots, scenario)
        idx = eta.labels.index("re_gamma0")
        sc0 = Scenario(
            alice_pos=scenario.alice_pos, bob_pos=scenario.bob_pos, eve_pos=scenario.eve_pos
        )
        single = [PathParams(toa=params[0].toa, aod=params[0].aod, gain=1.0, is_los=True)]
        eta1 = position_parameter_vector(sc0, single, None, "bob")
        response = mean_signal(eta1, pilots.pilots, sc0).reshape(-1)
        # d mu / d Re(gamma_0) equals the unit-gain single-path response
        assert np.allclose(jac[:, idx], response, rtol=1e-12)
        assert np.allclose(jac[:, idx + 1], 1j * response, rtol=1e-12)

    def test_finite_difference_agreement(self):
        rng = np.random.default_rng(10)
        worst = 0.0
        for i in range(8):
            sc = random_scenario(rng)
            key = random_key(rng, sc) if i % 2 else None
            receiver = "eve" if key is not None else "bob"
            params = channel_params(sc, receiver, rng)
            pilots = generate_pilots(sc.num_symbols, sc.num_subcarriers, sc.num_tx_antennas, rng)
            for eta in (
                position_parameter_vector(sc, params, key, receiver),
                channel_parameter_vector(params, key, receiver),
            ):
                an = jacobian_analytic(eta, pilots.pilots, sc)
                fd = finite_difference_jacobian(eta, pilots.pilots, sc)
                worst = max(worst, float(np.max(_column_relative_errors(an, fd))))
        assert worst < 1e-6

    def test_delta_tau_column_formula(self, scenario, config, setup):
        # the key delay column is the -j2pi n/(N Ts) weighted fake response
        params, pilots = setup
        eta = channel_parameter_vector(params, config.key, "eve")
        jac = jacobian_analytic(eta, pilots.pilots, scenario)
        col = jac[:, eta.labels.index("delta_tau")].reshape(16, 16)
        from sanloc.channel import fake_channel_rows
        from sanloc.signaling import fake_path_params, noiseless_observations

        fake = fake_path_params(params, config.key, scenario)
        weight = -2j * np.pi * np.arange(16) / scenario.delay_period
        expected = np.zeros((16, 16), complex)
        for k in range(3):
            one = fake_channel_rows(
                type(fake)(gains=[fake.gains[k]], toas=[fake.toas[k]], aods=[fake.aods[k]]),
                scenario,
            )
            expected += noiseless_observations(one, pilots.pilots) * weight[None, :]
        assert np.allclose(col, expected, rtol=1e-10)

    def test_angle_singularity_raises(self):
        sc = Scenario(alice_pos=[0, 0], bob_pos=[10, 0], eve_pos=[10, 0], scatterers=())
        params = channel_params(sc, "eve", 0)
        # aod = 0; a key shift of exactly -pi/2 puts the fake path at sin = -1
        eta = position_parameter_vector(sc, params, SanKey(0.0, -np.pi / 2), "eve")
        with pytest.raises(DerivativeSingularityError):
            jacobian_analytic(eta, generate_pilots(2, 16, 16, 0).pilots, sc)


class TestFim:
    def test_linear_gaussian_single_parameter(self, rng):
        s = rng.normal(size=32) + 1j * rng.normal(size=32)
        sigma2 = 0.7
        result = fim(s[:, None], sigma2)
        expected = 2 * np.sum(np.abs(s) ** 2) / sigma2
        assert result.matrix[0, 0] == pytest.approx(expected, rel=1e-12)
        inv = invert_fim(result)
        assert inv.covariance[0, 0] == pytest.approx(1 / expected, rel=1e-12)

    def test_noise_scaling(self, rng):
        jac = rng.normal(size=(20, 3)) + 1j * rng.normal(size=(20, 3))
        a = fim(jac, 1.0).matrix
        b = fim(jac, 2.0).matrix
        assert np.allclose(b, a / 2)

    def test_brute_force_two_by_two_grid(self, scenario, config):
        pilots = generate_pilots(2, 2, 4, 0)
        sc = Scenario(
            alice_pos=[3, 0], bob_pos=[10, 5], eve_pos=[10, 5],
            num_tx_antennas=4, num_subcarriers=2, num_symbols=2,
        )
        params = channel_params(sc, "bob", 0)
        eta = position_parameter_vector(sc, params, None, "bob")
        jac = jacobian_analytic(eta, pilots.pilots, sc)
        sigma2 = 0.3
        result = fim(jac, sigma2, labels=eta.labels)
        dim = eta.dim
        brute = np.zeros((dim, dim))
        for i in range(dim):
            for l in range(dim):
                brute[i, l] = (2 / sigma2) * np.sum(
                    np.real(np.conj(jac[:, i]) * jac[:, l])
                )
        assert np.allclose(result.matrix, brute, rtol=1e-12)

    def test_symmetry_and_psd_random_points(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            sc = random_scenario(rng)
            key = random_key(rng, sc)
            params = channel_params(sc, "eve", rng)
            pilots = generate_pilots(sc.num_symbols, sc.num_subcarriers, sc.num_tx_antennas, rng)
            eta = position_parameter_vector(sc, params, key, "eve")
            j = fim(jacobian_analytic(eta, pilots.pilots, sc), 1e-9).matrix
            assert np.array_equal(j, j.T)
            eigs = np.linalg.eigvalsh(j)
            assert eigs[0] >= -1e-10 * max(eigs[-1], 0.0)


class TestCrlbPosition:
    def test_block_diagonal(self):
        lam = 4.0
        j = np.diag([lam, lam, 9.0, 9.0])
        result = FimResult(matrix=j, labels=("p_x", "p_y", "a", "b"))
        out = crlb_position(result)
        assert out.peb_m == pytest.approx(np.sqrt(2 / lam), rel=1e-12)
        assert not out.singular

    def test_more_symbols_never_hurt(self, scenario, config):
        params = channel_params(scenario, "bob", 0)
        pilots = generate_pilots(8, 16, 16, 0)
        eta = position_parameter_vector(scenario, params, None, "bob")
        sigma2 = 1e-9
        jac_small = jacobian_analytic(eta, pilots.pilots[:4], scenario)
        jac_large = jacobian_analytic(eta, pilots.pilots, scenario)
        peb_small = crlb_position(fim(jac_small, sigma2, labels=eta.labels)).peb_m
        peb_large = crlb_position(fim(jac_large, sigma2, labels=eta.labels)).peb_m
        assert peb_large <= peb_small * (1 + 1e-12)

    def test_singular_fim_flagged_not_thrown(self, scenario):
        # duplicated scatterer makes two paths indistinguishable
        sc = Scenario(
            alice_pos=[3, 0], bob_pos=[10, 5], eve_pos=[10, 5],
            scatterers=([8.89, -6.05], [8.89, -6.05]),
        )
        params = channel_params(sc, "bob", 0)
        pilots = generate_pilots(16, 16, 16, 0)
        eta = position_parameter_vector(sc, params, None, "bob")
        result = fim(jacobian_analytic(eta, pilots.pilots, sc), 1e-9, labels=eta.labels)
        out = crlb_position(result)
        assert out.singular
        assert np.isfinite(out.peb_m)

    def test_snr_shift_property(self, scenario, config, setup):
        params, pilots = setup
        eta = position_parameter_vector(scenario, params, config.key, "eve")
        jac = jacobian_analytic(eta, pilots.pilots, scenario)
        peb1 = crlb_position(fim(jac, 1e-9, labels=eta.labels)).peb_m
        peb2 = crlb_position(fim(jac, 1e-8, labels=eta.labels)).peb_m
        assert 20 * np.log10(peb2 / peb1) == pytest.approx(10.0, abs=1e-9)

    def test_knowing_key_never_worse(self, scenario, config, setup):
        # dropping the key columns (a genie who knows them) lowers the bound
        params, pilots = setup
        eta = position_parameter_vector(scenario, params, config.key, "eve")
        jac = jacobian_analytic(eta, pilots.pilots, scenario)
        sigma2 = 1e-9
        peb_full = crlb_position(fim(jac, sigma2, labels=eta.labels)).peb_m
        peb_known = crlb_position(fim(jac[:, :-2], sigma2, labels=eta.labels[:-2])).peb_m
        assert peb_full >= peb_known * (1 - 1e-12)


class TestChannelDomain:
    def test_single_tone_delay_reduction(self, scenario):
        # delay-only model: CRLB(tau) = sigma^2 / (2 sum |dmu/dtau|^2)
        sc = Scenario(alice_pos=[3, 0], bob_pos=[10, 5], eve_pos=[10, 5])
        params = channel_params(sc, "bob", 0)
        pilots = generate_pilots(4, 16, 16, 0)
        eta = channel_parameter_vector(params, None, "bob")
        jac = jacobian_analytic(eta, pilots.pilots, sc)
        col = jac[:, eta.labels.index("tau0")]
        sigma2 = 1e-10
        closed_form = sigma2 / (2 * np.sum(np.abs(col) ** 2))
        kernel = invert_fim(fim(col[:, None], sigma2)).covariance[0, 0]
        assert kernel == pytest.approx(closed_form, rel=1e-12)

    def test_bounds_positive_and_ordered(self, scenario, config, setup):
        params, pilots = setup
        eta = channel_parameter_vector(params, config.key, "eve")
        out = crlb_channel_domain(eta, pilots.pilots, scenario, 1e-9)
        assert out.toa_bounds_us.shape == (3,)
        assert np.all(out.toa_bounds_us > 0)
        assert np.all(out.aod_bounds_rad > 0)
