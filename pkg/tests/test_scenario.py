"""Scenario configuration, validation, and the file format round trip."""

import numpy as np
import pytest

from prach_lab.scenario import (
    Device,
    Scenario,
    ScenarioError,
    fa_budget,
    format_scenario,
    noise_sigma_from_snr,
    parse_scenario,
    prach_format,
)


class TestPrachFormat:
    @pytest.mark.parametrize(
        "name,length,scs,n_rep",
        [("0", 839, 1.25, 1), ("C0", 139, 15.0, 1), ("B1", 139, 15.0, 2),
         ("B2", 139, 15.0, 4), ("B4", 139, 15.0, 12)],
    )
    def test_table(self, name, length, scs, n_rep):
        f = prach_format(name)
        assert (f.length, f.scs_khz, f.n_rep) == (length, scs, n_rep)

    def test_accepts_integer_zero(self):
        assert prach_format(0).length == 839

    def test_unknown_format(self):
        with pytest.raises(ScenarioError):
            prach_format("A1")


class TestNoiseSigma:
    @pytest.mark.parametrize("snr_db,var", [(0.0, 0.5), (-20.0, 50.0), (10.0, 0.05)])
    def test_variance(self, snr_db, var):
        assert noise_sigma_from_snr(snr_db) ** 2 == pytest.approx(var, rel=1e-12)


class TestFaBudget:
    def test_short_format(self):
        assert fa_budget(1e-3, 2, 139) == pytest.approx(3.5987e-6, rel=1e-4)

    def test_long_format(self):
        assert fa_budget(1e-3, 2, 839) == pytest.approx(5.962e-7, rel=1e-3)

    def test_small_probability_asymptote(self):
        p = 1e-6
        ratio = fa_budget(p, 2, 139) / (p / (2 * 139))
        assert abs(ratio - 1.0) < 1e-3

    def test_round_trip_by_exponentiation(self):
        p_s = fa_budget(1e-3, 2, 139)
        assert 1.0 - (1.0 - p_s) ** (2 * 139) == pytest.approx(1e-3, rel=1e-9)

    def test_monotonicity(self):
        assert fa_budget(2e-3, 2, 139) > fa_budget(1e-3, 2, 139)
        assert fa_budget(1e-3, 4, 139) < fa_budget(1e-3, 2, 139)
        assert fa_budget(1e-3, 2, 839) < fa_budget(1e-3, 2, 139)

    def test_domain(self):
        with pytest.raises(ValueError):
            fa_budget(0.0, 2, 139)


def _fig5_scenario(**overrides):
    base = dict(
        format=prach_format("B1"),
        roots=(51, 138),
        n_cs=13,
        devices=(Device(root=51, cs_index=2, cfo=0.0),),
        n_ant=1,
        coherence="independent",
        snr_db_grid=tuple(np.arange(-30.0, 0.1, 2.0)),
        p_fa_des=1e-3,
        seed=42,
    )
    base.update(overrides)
    return Scenario(**base)


class TestValidation:
    def test_well_formed_scenario(self):
        assert _fig5_scenario().validate() == []

    def test_unknown_root(self):
        issues = _fig5_scenario(devices=(Device(root=7, cs_index=0),)).validate()
        assert any("unknown root" in i.message for i in issues)
        assert any("devices[0].root" == i.field for i in issues)

    def test_cfo_out_of_domain(self):
        issues = _fig5_scenario(devices=(Device(root=51, cs_index=0, cfo=0.7),)).validate()
        assert any("CFO out of detector domain" in i.message for i in issues)

    def test_bad_cs_index(self):
        issues = _fig5_scenario(devices=(Device(root=51, cs_index=10),)).validate()
        assert any("cs_index" in i.field for i in issues)

    def test_require_valid_raises(self):
        with pytest.raises(ScenarioError):
            _fig5_scenario(n_ant=0).require_valid()

    def test_duplicate_roots(self):
        issues = _fig5_scenario(roots=(51, 51)).validate()
        assert any("duplicate" in i.message for i in issues)


class TestDerivedQuantities:
    def test_device_shift_and_peak_lag(self):
        s = _fig5_scenario()
        dev = s.devices[0]
        assert s.device_shift(dev) == 26
        assert s.device_peak_lag(dev) == (139 - 26) % 139

    def test_zero_shift_peaks_at_zero(self):
        s = _fig5_scenario(devices=(Device(root=51, cs_index=0),))
        assert s.device_peak_lag(s.devices[0]) == 0

    def test_expected_inter_defaults_to_population(self):
        s = _fig5_scenario(
            devices=(Device(root=51, cs_index=2), Device(root=138, cs_index=1))
        )
        assert s.expected_inter(51) == 1
        assert s.expected_inter(138) == 1

    def test_expected_inter_override(self):
        s = _fig5_scenario(n_inter_expected=3)
        assert s.expected_inter(51) == 3
        assert s.expected_inter(138) == 3

    def test_true_peaks_map(self):
        s = _fig5_scenario()
        peaks = s.true_peaks()
        assert peaks[51] == {113}
        assert peaks[138] == set()


SAMPLE = """
# one offset device against a quiet second root
format=C0
roots=51,138
n_cs=13
device=root:51,cs:2,cfo:0.3
n_ant=1
coherence=identical
snr_db=-30:0:1
p_fa_des=1e-3
seed=42
"""


class TestFileFormat:
    def test_parse_sample(self):
        s = parse_scenario(SAMPLE)
        assert s.format.name == "C0"
        assert s.roots == (51, 138)
        assert s.devices == (Device(root=51, cs_index=2, cfo=0.3),)
        assert s.coherence == "identical"
        assert s.snr_db_grid[0] == -30.0
        assert s.snr_db_grid[-1] == 0.0
        assert len(s.snr_db_grid) == 31
        assert s.seed == 42

    def test_unknown_key_is_error(self):
        with pytest.raises(ScenarioError):
            parse_scenario(SAMPLE + "\nbogus=1\n")

    def test_unknown_device_field_is_error(self):
        with pytest.raises(ScenarioError):
            parse_scenario("format=C0\nroots=51\ndevice=root:51,cs:0,doppler:1\n")

    def test_missing_required_key(self):
        with pytest.raises(ScenarioError):
            parse_scenario("roots=51\n")

    def test_round_trip(self):
        s = parse_scenario(SAMPLE)
        again = parse_scenario(format_scenario(s))
        assert again.format == s.format
        assert again.devices == s.devices
        assert again.snr_db_grid == s.snr_db_grid
        assert again.p_fa_des == s.p_fa_des

    def test_comma_list_grid(self):
        s = parse_scenario("format=C0\nroots=51,138\nsnr_db=-6,0,6\n")
        assert s.snr_db_grid == (-6.0, 0.0, 6.0)

    def test_invalid_parsed_scenario_raises(self):
        with pytest.raises(ScenarioError):
            parse_scenario("format=C0\nroots=51,138\ndevice=root:51,cs:2,cfo:0.9\n")
