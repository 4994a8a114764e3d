"""Correlator bank and the two combining strategies.

The correlator evaluates, for the root under test, the circular
cross-correlation of the received grid against the zero-shift reference at
every lag; `combine_pc` sums the per-repetition, per-antenna powers and
`combine_cc` sums repetitions coherently per antenna before squaring.

The signal part of the correlator output is linear in the device profiles,
so Monte Carlo runs can skip the per-occasion transform: `mu_fast` forms
the noiseless output directly from cached closed-form profiles and equals
`correlate(assemble_received(...))` with the noise turned off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, ReceivedGrid, reference_spectrum
from .correlation import closed_form_cfo_corr
from .scenario import Scenario


@dataclass(frozen=True, eq=False)
class CorrelatorOutput:
    """Correlations indexed (repetition, antenna, lag) for one root."""

    phi: np.ndarray = field(repr=False)
    root_under_test: int


@dataclass(frozen=True, eq=False)
class DecisionStatistic:
    psi: np.ndarray = field(repr=False)
    combiner: str  # "pc" | "cc"
    root: int


def correlate(grid: ReceivedGrid, u_0: int) -> CorrelatorOutput:
    """Per-lag correlation of the grid against the root-u_0 reference.

    Computed in the frequency domain as iDFT(R * conj(ref)) with the 1/l
    correlation normalization; a noiseless unit-gain same-root device
    yields a unit peak, and noise lands at sigma_w^2 / l per component.
    """
    ref = reference_spectrum(u_0, grid.length)
    phi = np.fft.ifft(grid.values * np.conj(ref)[None, None, :], axis=-1)
    return CorrelatorOutput(phi=phi, root_under_test=u_0)


def device_profiles(s: Scenario, u_0: int) -> np.ndarray:
    """Closed-form correlation profile of each device against root u_0."""
    out = np.zeros((len(s.devices), s.length), dtype=complex)
    for g, dev in enumerate(s.devices):
        out[g] = closed_form_cfo_corr(dev.root, s.device_shift(dev), dev.cfo, u_0, s.length).values
    return out


def mu_fast(s: Scenario, ch: ChannelRealization, u_0: int, profiles=None) -> np.ndarray:
    """Noiseless correlator output from cached profiles: sum_g h_g * c_g[k]."""
    if profiles is None:
        profiles = device_profiles(s, u_0)
    return np.einsum("gma,gk->mak", ch.gains, profiles)


def combine_pc(out: CorrelatorOutput) -> DecisionStatistic:
    """Power combining: sum |phi|^2 over repetitions and antennas."""
    psi = np.sum(np.abs(out.phi) ** 2, axis=(0, 1))
    return DecisionStatistic(psi=psi, combiner="pc", root=out.root_under_test)


def combine_cc(out: CorrelatorOutput) -> DecisionStatistic:
    """Coherent combining: sum repetitions, then sum powers over antennas."""
    psi = np.sum(np.abs(np.sum(out.phi, axis=0)) ** 2, axis=0)
    return DecisionStatistic(psi=psi, combiner="cc", root=out.root_under_test)
