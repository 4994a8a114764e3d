"""Channel draws and received-grid assembly."""

import numpy as np
import pytest

from prach_lab.channel import (
    ChannelRealization,
    assemble_received,
    device_spectrum,
    draw_channel,
    draw_gains,
    rng_stream,
)
from prach_lab.correlation import closed_form_cfo_corr
from prach_lab.receiver import correlate
from prach_lab.scenario import Device, Scenario, prach_format


def _scenario(**overrides):
    base = dict(
        format=prach_format("B2"),
        roots=(51, 138),
        n_cs=13,
        devices=(Device(root=51, cs_index=2, cfo=0.0),),
        n_ant=2,
        coherence="independent",
        snr_db_grid=(0.0,),
        p_fa_des=1e-3,
        seed=7,
    )
    base.update(overrides)
    return Scenario(**base).require_valid()


class TestDrawChannel:
    def test_identical_mode_repeats_slices(self):
        s = _scenario(coherence="identical")
        ch = draw_channel(s, rng_stream(1, 0))
        for m in range(1, s.n_rep):
            assert np.array_equal(ch.gains[:, m, :], ch.gains[:, 0, :])

    def test_independent_mode_uncorrelated_repetitions(self):
        s = _scenario()
        g = draw_gains(s, rng_stream(2, 0), n_occasions=100_000)
        a = g[:, 0, 0, 0]
        b = g[:, 0, 1, 0]
        corr = np.abs(np.mean(a * np.conj(b)))
        assert corr < 0.01

    def test_unit_mean_power(self):
        s = _scenario(coherence="identical")
        g = draw_gains(s, rng_stream(3, 0), n_occasions=250_000)
        power = np.mean(np.abs(g[:, 0, 0, :]) ** 2)
        assert power == pytest.approx(1.0, rel=5e-3)

    def test_rng_stream_reproducible(self):
        s = _scenario()
        g1 = draw_gains(s, rng_stream(9, 4, 2), 10)
        g2 = draw_gains(s, rng_stream(9, 4, 2), 10)
        assert np.array_equal(g1, g2)
        g3 = draw_gains(s, rng_stream(9, 4, 3), 10)
        assert not np.array_equal(g1, g3)


class TestAssembleReceived:
    def test_no_devices_no_noise(self):
        s = _scenario(devices=())
        ch = ChannelRealization(gains=np.zeros((0, s.n_rep, s.n_ant), dtype=complex),
                                coherence=s.coherence)
        grid = assemble_received(s, ch, 0.0, rng_stream(0, 0))
        assert np.all(grid.values == 0)

    def test_single_device_unit_gain(self):
        s = _scenario()
        ch = ChannelRealization(
            gains=np.ones((1, s.n_rep, s.n_ant), dtype=complex), coherence=s.coherence
        )
        grid = assemble_received(s, ch, 0.0, rng_stream(0, 0))
        expected = device_spectrum(s, s.devices[0])
        for m in range(s.n_rep):
            for i in range(s.n_ant):
                assert np.max(np.abs(grid.values[m, i] - expected)) < 1e-12

    def test_offset_device_matches_closed_form_profile(self):
        s = _scenario(devices=(Device(root=51, cs_index=2, cfo=0.3),), n_ant=1,
                      format=prach_format("C0"))
        h = 0.8 - 0.3j
        ch = ChannelRealization(gains=np.full((1, 1, 1), h), coherence=s.coherence)
        grid = assemble_received(s, ch, 0.0, rng_stream(0, 0))
        phi = correlate(grid, 51).phi[0, 0]
        profile = closed_form_cfo_corr(51, 26, 0.3, 51, 139).values
        assert np.max(np.abs(phi - h * profile)) < 1e-9

    def test_energy_accounting(self):
        s = _scenario(devices=(Device(root=51, cs_index=2, cfo=0.2),
                               Device(root=138, cs_index=1, cfo=-0.1)))
        rng = rng_stream(4, 0)
        sigma_w = 0.6
        total = 0.0
        n_occ = 4000
        for _ in range(n_occ):
            ch = draw_channel(s, rng)
            grid = assemble_received(s, ch, sigma_w, rng)
            total += np.mean(np.abs(grid.values[0, 0]) ** 2)
        expected = len(s.devices) * 1.0 + 2.0 * sigma_w**2
        assert total / n_occ == pytest.approx(expected, rel=0.02)

    def test_unit_modulus_spectra_without_offset(self):
        s = _scenario()
        spec = device_spectrum(s, s.devices[0])
        assert np.max(np.abs(np.abs(spec) - 1.0)) < 1e-12
