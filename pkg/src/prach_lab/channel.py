"""Flat Rayleigh channel realizations and frequency-domain signal assembly.

Channel gains are unit-power complex Gaussians (total power 1, so each
real component has variance 1/2), independent across devices and antennas.
Across repetitions they are either independent or identical depending on
the scenario's coherence mode.

The received grid is held in the frequency domain with spectra normalized
to unit modulus for a zero-offset preamble (DFT / sqrt(l)); additive noise
is drawn per subcarrier with per-component variance sigma_w^2.  Under this
normalization the per-antenna SNR is 1 / (2 sigma_w^2) and the correlator
noise floor comes out at sigma_z^2 = sigma_w^2 / l per lag.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import Device, Scenario
from .zadoffchu import apply_cfo, cyclic_shift, dft, zc_root


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the stream keyed by (seed, *key).

    Streams with distinct keys are statistically independent, so occasions
    and chunks can be drawn in any order or in parallel and still
    reproduce the same results.
    """
    return np.random.Generator(np.random.Philox(key=np.random.SeedSequence((seed, *key)).generate_state(2, np.uint64)))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Per-device gains indexed (device, repetition, antenna)."""

    gains: np.ndarray = field(repr=False)
    coherence: str


@dataclass(frozen=True, eq=False)
class ReceivedGrid:
    """Frequency-domain samples indexed (repetition, antenna, subcarrier)."""

    values: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        return self.values.shape[-1]


def draw_gains(s: Scenario, rng: np.random.Generator, n_occasions: int = 1) -> np.ndarray:
    """Gains of shape (n_occasions, n_dev, n_rep, n_ant), unit mean power."""
    n_dev = len(s.devices)
    if s.coherence == "identical":
        g = rng.standard_normal((n_occasions, n_dev, 1, s.n_ant, 2))
        g = np.repeat(g, s.n_rep, axis=2)
    else:
        g = rng.standard_normal((n_occasions, n_dev, s.n_rep, s.n_ant, 2))
    return (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)


def draw_channel(s: Scenario, rng: np.random.Generator) -> ChannelRealization:
    return ChannelRealization(gains=draw_gains(s, rng, 1)[0], coherence=s.coherence)


def device_spectrum(s: Scenario, dev: Device) -> np.ndarray:
    """Unit-normalized spectrum of the device's shifted, offset preamble."""
    seq = cyclic_shift(zc_root(dev.root, s.length), s.device_shift(dev), shift_index=dev.cs_index)
    return dft(apply_cfo(seq, dev.cfo)) / np.sqrt(s.length)


def reference_spectrum(u: int, length: int) -> np.ndarray:
    """Unit-normalized spectrum of the zero-shift root-u reference."""
    seq = zc_root(u, length)
    return dft(seq.samples) / np.sqrt(length)


def draw_noise_grid(
    sigma_w: float, shape: tuple, rng: np.random.Generator
) -> np.ndarray:
    """Frequency-domain noise, per-component standard deviation sigma_w."""
    w = rng.standard_normal(shape + (2,))
    return sigma_w * (w[..., 0] + 1j * w[..., 1])


def assemble_received(
    s: Scenario, ch: ChannelRealization, sigma_w: float, rng: np.random.Generator
) -> ReceivedGrid:
    """Sum each device's spectrum scaled by its gains, plus noise."""
    values = np.zeros((s.n_rep, s.n_ant, s.length), dtype=complex)
    for g, dev in enumerate(s.devices):
        values += ch.gains[g][:, :, None] * device_spectrum(s, dev)[None, None, :]
    if sigma_w > 0.0:
        values += draw_noise_grid(sigma_w, (s.n_rep, s.n_ant, s.length), rng)
    return ReceivedGrid(values=values)
