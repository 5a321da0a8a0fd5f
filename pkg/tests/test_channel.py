import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sanloc.channel import (
    FakePathParams,
    channel_rows,
    fake_channel,
    fake_channel_rows,
    fourier_vector,
    steering_vector,
    subcarrier_channel,
)
from sanloc.errors import SpatialFrequencyError
from sanloc.geometry import PathParams, Scenario


def make_scenario(**kw):
    base = dict(alice_pos=[3, 0], bob_pos=[10, 5], eve_pos=[10, 5])
    base.update(kw)
    return Scenario(**base)


class TestFourierVector:
    def test_zero_frequency(self):
        assert np.allclose(fourier_vector(4, 0.0), np.ones(4))

    def test_half_cycle(self):
        assert np.allclose(fourier_vector(2, 0.5), [1, -1])

    def test_quarter_cycle(self):
        assert np.allclose(fourier_vector(3, 0.25), [1, -1j, -1])

    @given(
        st.integers(min_value=1, max_value=32),
        st.floats(min_value=-0.5, max_value=0.5, allow_nan=False),
    )
    @settings(max_examples=50, deadline=None)
    def test_entry_formula(self, length, freq):
        vec = fourier_vector(length, freq)
        m = np.arange(length)
        assert np.allclose(vec, np.exp(-2j * np.pi * m * freq))
        assert vec[0] == 1.00


class TestSteeringVector:
    def test_broadside_all_ones(self):
        assert np.allclose(steering_vector(0.0, 8, 0.0025, 0.005), np.ones(8))

    def test_endfire_alternates(self):
        vec = steering_vector(np.pi / 2, 6, 0.0025, 0.005)
        assert np.allclose(vec, [1, -1, 1, -1, 1, -1])

    def test_thirty_degrees(self):
        assert np.allclose(
            steering_vector(np.pi / 6, 16, 0.0025, 0.005), fourier_vector(16, 0.25)
        )

    def test_out_of_range_spacing(self):
        with pytest.raises(SpatialFrequencyError):
            steering_vector(np.pi / 2, 8, 0.006, 0.005)


def single_path(gain=1.0, toa=0.1, aod=0.0, is_los=True):
    return PathParams(toa=toa, aod=aod, gain=complex(gain), is_los=is_los)


class TestSubcarrierChannel:
    def test_integer_cycle_all_ones(self):
        # tau equal to the full delay window: n*tau/(N*T_s) = n, phases cancel
        sc = make_scenario(num_tx_antennas=4, num_subcarriers=8)
        params = [single_path(toa=sc.delay_period, aod=0.0)]
        for n in range(8):
            assert np.allclose(subcarrier_channel(params, n, sc), np.ones(4), atol=1e-12)

    def test_dc_subcarrier_sums_steering(self):
        sc = make_scenario(num_tx_antennas=8)
        params = [single_path(toa=0.3, aod=0.4), single_path(gain=0.5j, toa=0.9, aod=-0.2, is_los=False)]
        expected = sum(
            pp.gain * steering_vector(pp.aod, 8, sc.antenna_spacing, sc.wavelength).conj()
            for pp in params
        )
        assert np.allclose(subcarrier_channel(params, 0, sc), expected)

    def test_destructive_cancellation(self):
        sc = make_scenario(num_tx_antennas=4)
        pair = [single_path(gain=1.0, toa=0.2, aod=0.3), single_path(gain=-1.0, toa=0.2, aod=0.3, is_los=False)]
        assert np.allclose(subcarrier_channel(pair, 5, sc), np.zeros(4))

    def test_linearity_over_path_lists(self, rng):
        sc = make_scenario(num_tx_antennas=8, num_subcarriers=16)
        a = [single_path(gain=rng.normal() + 1j * rng.normal(), toa=rng.uniform(0.01, 1), aod=rng.uniform(-1, 1))]
        b = [single_path(gain=rng.normal() + 1j * rng.normal(), toa=rng.uniform(0.01, 1), aod=rng.uniform(-1, 1), is_los=False)]
        assert np.allclose(channel_rows(a + b, sc), channel_rows(a, sc) + channel_rows(b, sc))

    def test_single_path_elementwise_phases(self):
        # entry m of h^(n): gamma e^{-j2pi n tau/(N Ts)} e^{+j2pi m d sin(theta)/lam}
        sc = make_scenario(num_tx_antennas=8, num_subcarriers=16)
        gain, toa, aod = 0.7 - 0.2j, 0.37, 0.5
        rows = channel_rows([single_path(gain, toa, aod)], sc)
        n = np.arange(16)[:, None]
        m = np.arange(8)[None, :]
        expected = (
            gain
            * np.exp(-2j * np.pi * n * toa / sc.delay_period)
            * np.exp(2j * np.pi * m * sc.antenna_spacing * np.sin(aod) / sc.wavelength)
        )
        assert np.allclose(rows, expected, atol=1e-14)

    def test_norm_independent_of_delay(self):
        sc = make_scenario()
        r1 = channel_rows([single_path(toa=0.123)], sc)
        r2 = channel_rows([single_path(toa=0.921)], sc)
        assert np.allclose(np.linalg.norm(r1, axis=1), np.linalg.norm(r2, axis=1))

    def test_index_bounds(self):
        sc = make_scenario()
        with pytest.raises(ValueError):
            subcarrier_channel([single_path()], 16, sc)
        with pytest.raises(ValueError):
            subcarrier_channel([], 0, sc)


class TestFakeChannel:
    def test_no_fake_paths_zero(self):
        sc = make_scenario(num_tx_antennas=4)
        fake = FakePathParams(gains=[], toas=[], aods=[])
        assert np.array_equal(fake_channel(fake, 3, sc), np.zeros(4))

    def test_single_fake_mirrors_true(self):
        sc = make_scenario()
        fake = FakePathParams(gains=[0.3 + 0.1j], toas=[0.44], aods=[0.2])
        true = [single_path(gain=0.3 + 0.1j, toa=0.44, aod=0.2)]
        for n in (0, 3, 15):
            assert np.array_equal(fake_channel(fake, n, sc), subcarrier_channel(true, n, sc))

    def test_identical_parameter_lists_bit_for_bit(self, rng):
        sc = make_scenario()
        gains = rng.normal(size=3) + 1j * rng.normal(size=3)
        toas = rng.uniform(0.01, 1.0, 3)
        aods = rng.uniform(-1.2, 1.2, 3)
        params = [
            PathParams(toa=t, aod=a, gain=complex(g), is_los=(i == 0))
            for i, (g, t, a) in enumerate(zip(gains, toas, aods))
        ]
        fake = FakePathParams(gains=gains, toas=toas, aods=aods)
        assert np.array_equal(channel_rows(params, sc), fake_channel_rows(fake, sc))
