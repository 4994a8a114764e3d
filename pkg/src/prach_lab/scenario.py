"""Declarative configuration of one PRACH-occasion experiment.

A `Scenario` fixes the preamble format, configured roots, cyclic-shift
granularity, transmitting devices (root, shift index, frequency offset),
antenna count, repetition coherence mode, SNR grid, and the false-alarm
budget.  Scenarios are immutable after validation and safe to share.

Scenario files use a line-oriented ``key=value`` format:

    format=C0
    roots=51,138
    n_cs=13
    device=root:51,cs:2,cfo:0.3
    n_ant=1
    coherence=identical
    snr_db=-30:0:1
    p_fa_des=1e-3
    seed=42

``device=`` may repeat.  ``snr_db`` takes either ``start:stop:step``
(inclusive) or a comma-separated list.  Unknown keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import gcd
from typing import NamedTuple, Optional

import numpy as np

from .zadoffchu import CsSet, cs_set, is_odd_prime


class ScenarioError(ValueError):
    pass


class ValidationIssue(NamedTuple):
    field: str
    message: str


@dataclass(frozen=True)
class PrachFormat:
    name: str
    length: int
    scs_khz: float  # informational; all math runs in units of the PRACH SCS
    n_rep: int


_FORMATS = {
    "0": PrachFormat("0", 839, 1.25, 1),
    "C0": PrachFormat("C0", 139, 15.0, 1),
    "B1": PrachFormat("B1", 139, 15.0, 2),
    "B2": PrachFormat("B2", 139, 15.0, 4),
    "B4": PrachFormat("B4", 139, 15.0, 12),
}


def prach_format(name) -> PrachFormat:
    key = str(name)
    if key not in _FORMATS:
        raise ScenarioError(f"unknown PRACH format {name!r}; expected one of {sorted(_FORMATS)}")
    return _FORMATS[key]


@dataclass(frozen=True)
class Device:
    root: int
    cs_index: int
    cfo: float = 0.0
    label: str = ""


@dataclass(frozen=True)
class Scenario:
    format: PrachFormat
    roots: tuple
    n_cs: int
    devices: tuple
    n_ant: int = 1
    coherence: str = "independent"  # or "identical"
    snr_db_grid: tuple = (0.0,)
    p_fa_des: float = 1e-3
    seed: int = 0
    # expected interferer count used for thresholds; None derives it per root
    # from the actual device population
    n_inter_expected: Optional[int] = None
    name: str = "scenario"

    @property
    def length(self) -> int:
        return self.format.length

    @property
    def n_rep(self) -> int:
        return self.format.n_rep

    @property
    def cs(self) -> CsSet:
        return cs_set(self.length, self.n_cs)

    def device_shift(self, dev: Device) -> int:
        return dev.cs_index * self.n_cs

    def device_peak_lag(self, dev: Device) -> int:
        """Correlation lag of the device's main peak at its own root.

        A preamble advanced by kappa samples correlated against the
        unshifted reference peaks at (length - kappa) mod length.
        """
        return (self.length - self.device_shift(dev)) % self.length

    def devices_on_root(self, u: int) -> tuple:
        return tuple(d for d in self.devices if d.root == u)

    def interferers(self, u: int) -> tuple:
        """Devices transmitting with a root other than ``u``."""
        return tuple(d for d in self.devices if d.root != u)

    def expected_inter(self, u: int) -> int:
        if self.n_inter_expected is not None:
            return self.n_inter_expected
        return len(self.interferers(u))

    def true_peaks(self) -> dict:
        """Map root -> set of lags carrying a transmitting device's peak."""
        peaks = {u: set() for u in self.roots}
        for d in self.devices:
            peaks[d.root].add(self.device_peak_lag(d))
        return peaks

    def validate(self) -> list:
        issues = []
        l = self.format.length
        if not is_odd_prime(l):
            issues.append(ValidationIssue("format", f"length {l} is not an odd prime"))
        if self.n_ant < 1:
            issues.append(ValidationIssue("n_ant", f"must be >= 1, got {self.n_ant}"))
        if self.coherence not in ("independent", "identical"):
            issues.append(ValidationIssue("coherence", f"unknown mode {self.coherence!r}"))
        if not self.roots:
            issues.append(ValidationIssue("roots", "at least one root required"))
        if len(set(self.roots)) != len(self.roots):
            issues.append(ValidationIssue("roots", "duplicate roots"))
        for u in self.roots:
            if not (1 <= u < l) or gcd(u, l) != 1:
                issues.append(ValidationIssue("roots", f"invalid root {u} for length {l}"))
        if not 1 <= self.n_cs <= l:
            issues.append(ValidationIssue("n_cs", f"must lie in [1, {l}], got {self.n_cs}"))
        else:
            n_pre = l // self.n_cs
            for i, d in enumerate(self.devices):
                if d.root not in self.roots:
                    issues.append(ValidationIssue(f"devices[{i}].root", f"unknown root {d.root}"))
                if not 0 <= d.cs_index < n_pre:
                    issues.append(
                        ValidationIssue(
                            f"devices[{i}].cs_index",
                            f"must lie in [0, {n_pre - 1}], got {d.cs_index}",
                        )
                    )
                if not abs(d.cfo) < 0.5:
                    issues.append(
                        ValidationIssue(
                            f"devices[{i}].cfo",
                            f"CFO out of detector domain (|eps| < 0.5), got {d.cfo}",
                        )
                    )
        if not 0.0 < self.p_fa_des < 1.0:
            issues.append(ValidationIssue("p_fa_des", f"must lie in (0, 1), got {self.p_fa_des}"))
        if len(self.snr_db_grid) == 0:
            issues.append(ValidationIssue("snr_db_grid", "empty SNR grid"))
        if self.n_inter_expected is not None and self.n_inter_expected < 0:
            issues.append(ValidationIssue("n_inter_expected", "must be >= 0"))
        if self.seed < 0:
            issues.append(ValidationIssue("seed", "must be >= 0"))
        return issues

    def require_valid(self) -> "Scenario":
        issues = self.validate()
        if issues:
            details = "; ".join(f"{i.field}: {i.message}" for i in issues)
            raise ScenarioError(f"invalid scenario: {details}")
        return self


def noise_sigma_from_snr(snr_db: float) -> float:
    """Per-component noise standard deviation for a given per-antenna SNR in dB.

    With unit channel power, SNR = 1 / (2 sigma_w^2), so
    sigma_w^2 = 10^(-snr_db/10) / 2.
    """
    return float(np.sqrt(10.0 ** (-snr_db / 10.0) / 2.0))


def fa_budget(p_fa_des: float, n_root: int, length: int) -> float:
    """Per-lag, per-root false-alarm budget 1 - (1 - p)^(1/(n_root*l))."""
    if not 0.0 < p_fa_des < 1.0:
        raise ValueError(f"p_fa_des must lie in (0, 1), got {p_fa_des}")
    return float(-np.expm1(np.log1p(-p_fa_des) / (n_root * length)))


def _parse_snr_grid(text: str) -> tuple:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ScenarioError(f"snr_db grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ScenarioError(f"snr_db step must be positive, got {step}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            raise ScenarioError(f"empty snr_db grid {text!r}")
        return tuple(round(start + i * step, 10) for i in range(n))
    return tuple(float(p) for p in text.split(","))


def _parse_device(text: str) -> Device:
    fields = {}
    for part in text.split(","):
        if ":" not in part:
            raise ScenarioError(f"bad device field {part!r} in {text!r}")
        key, val = part.split(":", 1)
        fields[key.strip()] = val.strip()
    unknown = set(fields) - {"root", "cs", "cfo", "label"}
    if unknown:
        raise ScenarioError(f"unknown device fields {sorted(unknown)} in {text!r}")
    if "root" not in fields or "cs" not in fields:
        raise ScenarioError(f"device needs root and cs, got {text!r}")
    return Device(
        root=int(fields["root"]),
        cs_index=int(fields["cs"]),
        cfo=float(fields.get("cfo", 0.0)),
        label=fields.get("label", ""),
    )


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    """Parse the line-oriented key=value scenario format."""
    values = {}
    devices = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key == "device":
            devices.append(_parse_device(val))
            continue
        known = {"format", "roots", "n_cs", "n_ant", "coherence", "snr_db",
                 "p_fa_des", "seed", "n_inter_expected", "name"}
        if key not in known:
            raise ScenarioError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val
    for required in ("format", "roots"):
        if required not in values:
            raise ScenarioError(f"missing required key {required!r}")
    s = Scenario(
        format=prach_format(values["format"]),
        roots=tuple(int(u) for u in values["roots"].split(",")),
        n_cs=int(values.get("n_cs", 13)),
        devices=tuple(devices),
        n_ant=int(values.get("n_ant", 1)),
        coherence=values.get("coherence", "independent"),
        snr_db_grid=_parse_snr_grid(values.get("snr_db", "0")),
        p_fa_des=float(values.get("p_fa_des", 1e-3)),
        seed=int(values.get("seed", 0)),
        n_inter_expected=(
            int(values["n_inter_expected"]) if "n_inter_expected" in values else None
        ),
        name=values.get("name", name),
    )
    return s.require_valid()


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read(), name=str(path))


def format_scenario(s: Scenario) -> str:
    """Serialize a scenario back to the key=value file format."""
    lines = [
        f"name={s.name}",
        f"format={s.format.name}",
        "roots=" + ",".join(str(u) for u in s.roots),
        f"n_cs={s.n_cs}",
    ]
    for d in s.devices:
        parts = [f"root:{d.root}", f"cs:{d.cs_index}", f"cfo:{d.cfo:g}"]
        if d.label:
            parts.append(f"label:{d.label}")
        lines.append("device=" + ",".join(parts))
    lines += [
        f"n_ant={s.n_ant}",
        f"coherence={s.coherence}",
        "snr_db=" + ",".join(f"{v:g}" for v in s.snr_db_grid),
        f"p_fa_des={s.p_fa_des:g}",
        f"seed={s.seed}",
    ]
    if s.n_inter_expected is not None:
        lines.append(f"n_inter_expected={s.n_inter_expected}")
    return "\n".join(lines) + "\n"


def with_snr(s: Scenario, snr_db: float) -> Scenario:
    return replace(s, snr_db_grid=(snr_db,))
