"""Correlator output statistics and the two combiners."""

import numpy as np
import pytest
from scipy import special

from prach_lab.channel import (
    ChannelRealization,
    assemble_received,
    draw_channel,
    draw_noise_grid,
    rng_stream,
)
from prach_lab.receiver import (
    CorrelatorOutput,
    combine_cc,
    combine_pc,
    correlate,
    device_profiles,
    mu_fast,
)
from prach_lab.channel import ReceivedGrid
from prach_lab.scenario import Device, Scenario, prach_format


def _scenario(**overrides):
    base = dict(
        format=prach_format("C0"),
        roots=(51, 138),
        n_cs=13,
        devices=(Device(root=51, cs_index=2, cfo=0.0),),
        n_ant=1,
        coherence="independent",
        snr_db_grid=(0.0,),
        p_fa_des=1e-3,
        seed=1,
    )
    base.update(overrides)
    return Scenario(**base).require_valid()


class TestCorrelate:
    def test_noiseless_same_root_unit_peak(self):
        s = _scenario()
        ch = ChannelRealization(gains=np.ones((1, 1, 1), dtype=complex), coherence="independent")
        grid = assemble_received(s, ch, 0.0, rng_stream(0, 0))
        phi = correlate(grid, 51).phi[0, 0]
        k_t = s.device_peak_lag(s.devices[0])
        assert abs(phi[k_t] - 1.0) < 1e-12
        assert np.max(np.abs(np.delete(phi, k_t))) < 1e-12

    def test_noiseless_cross_root_constant(self):
        s = _scenario()
        ch = ChannelRealization(gains=np.ones((1, 1, 1), dtype=complex), coherence="independent")
        grid = assemble_received(s, ch, 0.0, rng_stream(0, 0))
        phi = correlate(grid, 138).phi[0, 0]
        assert np.max(np.abs(np.abs(phi) - 1.0 / np.sqrt(139))) < 1e-12

    def test_noise_only_variance(self):
        sigma_w = 0.9
        rng = rng_stream(8, 0)
        samples = []
        for _ in range(800):
            grid = ReceivedGrid(values=draw_noise_grid(sigma_w, (1, 1, 139), rng))
            samples.append(correlate(grid, 51).phi.ravel())
        phi = np.concatenate(samples)
        target = sigma_w**2 / 139
        assert np.var(phi.real) == pytest.approx(target, rel=0.02)
        assert np.var(phi.imag) == pytest.approx(target, rel=0.02)

    def test_length_mismatch(self):
        grid = ReceivedGrid(values=np.zeros((1, 1, 64), dtype=complex))
        with pytest.raises(ValueError):
            correlate(grid, 51)


class TestMuFast:
    def test_equals_full_path_noiseless(self):
        s = _scenario(
            devices=(Device(root=51, cs_index=2, cfo=0.3), Device(root=138, cs_index=1, cfo=-0.2)),
            n_ant=2,
            format=prach_format("B1"),
        )
        rng = rng_stream(3, 1)
        ch = draw_channel(s, rng)
        grid = assemble_received(s, ch, 0.0, rng)
        for u in s.roots:
            mu = mu_fast(s, ch, u)
            full = correlate(grid, u).phi
            assert np.max(np.abs(mu - full)) < 1e-9

    def test_accepts_cached_profiles(self):
        s = _scenario()
        profiles = device_profiles(s, 51)
        ch = draw_channel(s, rng_stream(4, 0))
        assert np.array_equal(mu_fast(s, ch, 51, profiles), mu_fast(s, ch, 51))


class TestCombiners:
    def test_single_repetition_pc_equals_cc(self):
        rng = np.random.default_rng(2)
        phi = rng.standard_normal((1, 3, 10)) + 1j * rng.standard_normal((1, 3, 10))
        out = CorrelatorOutput(phi=phi, root_under_test=51)
        assert np.allclose(combine_pc(out).psi, combine_cc(out).psi, atol=1e-14)

    def test_all_ones(self):
        out = CorrelatorOutput(phi=np.ones((2, 1, 3), dtype=complex), root_under_test=51)
        assert np.allclose(combine_pc(out).psi, 2.0)
        assert np.allclose(combine_cc(out).psi, 4.0)

    def test_identical_channel_noiseless_values(self):
        s = _scenario(format=prach_format("B2"), coherence="identical", n_ant=2)
        ch = draw_channel(s, rng_stream(5, 0))
        grid = assemble_received(s, ch, 0.0, rng_stream(5, 1))
        out = correlate(grid, 51)
        k_t = s.device_peak_lag(s.devices[0])
        h = ch.gains[0, 0, :]  # per-antenna gains, equal across repetitions
        n_rep = s.n_rep
        assert combine_cc(out).psi[k_t] == pytest.approx(
            n_rep**2 * np.sum(np.abs(h) ** 2), rel=1e-10
        )
        assert combine_pc(out).psi[k_t] == pytest.approx(
            n_rep * np.sum(np.abs(h) ** 2), rel=1e-10
        )

    def test_cauchy_schwarz_ordering(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            phi = rng.standard_normal((4, 2, 17)) + 1j * rng.standard_normal((4, 2, 17))
            out = CorrelatorOutput(phi=phi, root_under_test=51)
            cc = combine_cc(out).psi
            pc = combine_pc(out).psi
            assert np.all(cc <= 4 * pc + 1e-12)

    def test_metadata(self):
        out = CorrelatorOutput(phi=np.ones((1, 1, 4), dtype=complex), root_under_test=7)
        assert combine_pc(out).combiner == "pc"
        assert combine_cc(out).combiner == "cc"
        assert combine_pc(out).root == 7


class TestNullDistribution:
    def test_pc_statistic_is_chi_square(self):
        # pins the variance convention: psi / sigma_z^2 ~ chi2_{2 n_ant n_rep}
        s = _scenario(format=prach_format("B1"), n_ant=2, devices=())
        sigma_w = 1.3
        sigma_z2 = sigma_w**2 / 139
        rng = rng_stream(12, 0)
        n_occ = 800  # 800 x 139 lags ~ 1e5 samples
        vals = []
        for _ in range(n_occ):
            grid = ReceivedGrid(values=draw_noise_grid(sigma_w, (2, 2, 139), rng))
            vals.append(combine_pc(correlate(grid, 51)).psi)
        psi = np.concatenate(vals) / sigma_z2
        n = len(psi)
        emp = np.arange(1, n + 1) / n
        model = special.gammainc(4, np.sort(psi) / 2.0)
        ks = np.max(np.abs(emp - model))
        assert ks < 1.95 / np.sqrt(n)  # 99.9% critical value
