"""Zadoff-Chu root sequences, cyclic-shift preambles, and length-l transforms.

Sequence lengths are restricted to odd primes (139 and 839 in the
standardized formats): both the same-root delta identity and the constant
cross-root magnitude require a prime length, so it is validated at
construction instead of silently producing broken correlations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Optional

import numpy as np


class InvalidRootError(ValueError):
    """Root is not coprime to the sequence length."""


def is_odd_prime(n: int) -> bool:
    if n < 3 or n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _check_length(length: int) -> None:
    if not is_odd_prime(length):
        raise ValueError(f"sequence length must be an odd prime, got {length}")


@dataclass(frozen=True, eq=False)
class ZcSequence:
    """A length-l Zadoff-Chu sequence with its root and shift metadata."""

    root: int
    shift_samples: int
    samples: np.ndarray = field(repr=False)
    shift_index: Optional[int] = None

    @property
    def length(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class CsSet:
    """Permitted cyclic shifts ``v * granularity`` for one root."""

    length: int
    granularity: int
    shifts: tuple

    @property
    def n_preambles(self) -> int:
        return len(self.shifts)


def zc_root(u: int, length: int) -> ZcSequence:
    """Root sequence ``x_u[n] = exp(-j pi u n (n+1) / length)``."""
    _check_length(length)
    if not 1 <= u < length:
        raise InvalidRootError(f"root must lie in [1, {length - 1}], got {u}")
    if gcd(u, length) != 1:
        raise InvalidRootError(f"root {u} is not coprime to length {length}")
    n = np.arange(length, dtype=np.int64)
    # reduce the integer phase numerator mod 2*length so exp sees small args
    phase_num = (u * n * (n + 1)) % (2 * length)
    samples = np.exp(-1j * np.pi * phase_num / length)
    return ZcSequence(root=u, shift_samples=0, samples=samples, shift_index=0)


def cyclic_shift(x: ZcSequence, kappa: int, shift_index: Optional[int] = None) -> ZcSequence:
    """Advance ``x`` cyclically: result[n] = x[(n + kappa) mod length]."""
    if not 0 <= kappa < x.length:
        raise ValueError(f"shift must lie in [0, {x.length - 1}], got {kappa}")
    return ZcSequence(
        root=x.root,
        shift_samples=(x.shift_samples + kappa) % x.length,
        samples=np.roll(x.samples, -kappa),
        shift_index=shift_index,
    )


def cs_set(length: int, n_cs: int) -> CsSet:
    """All shifts ``v * n_cs`` for ``v = 0 .. floor(length / n_cs) - 1``."""
    _check_length(length)
    if not 1 <= n_cs <= length:
        raise ValueError(f"granularity must lie in [1, {length}], got {n_cs}")
    count = length // n_cs
    return CsSet(length=length, granularity=n_cs, shifts=tuple(v * n_cs for v in range(count)))


def apply_cfo(x, eps: float) -> np.ndarray:
    """Modulate by a normalized frequency offset: sample n times exp(j 2 pi eps n / l)."""
    samples = x.samples if isinstance(x, ZcSequence) else np.asarray(x)
    if eps == 0.0:
        return samples.copy()
    n = np.arange(len(samples))
    return samples * np.exp(2j * np.pi * eps * n / len(samples))


def dft(x) -> np.ndarray:
    """Forward transform with kernel exp(-j 2 pi n v / l) and no 1/l factor."""
    return np.fft.fft(np.asarray(x, dtype=complex))


def idft(x) -> np.ndarray:
    """Inverse of ``dft`` (carries the 1/l factor)."""
    return np.fft.ifft(np.asarray(x, dtype=complex))
