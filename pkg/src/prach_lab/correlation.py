"""Circular cross-correlation and its closed form under frequency offset.

The correlation convention is

    c[k] = (1/l) * sum_n x[n] * conj(y[(n - k) mod l]),   k = 0 .. l-1,

so a same-root pair shifted by (kappa_1, kappa_2) peaks at lag
``(l + kappa_2 - kappa_1) mod l`` and two distinct roots give constant
magnitude ``1/sqrt(l)`` at every lag.

For a root-u_g sequence advanced by ``kappa`` samples, modulated by a
normalized frequency offset ``eps`` and correlated against the unshifted
root-u_0 reference, the profile collapses to a quadratic Gauss sum:

    c[k] = (1/l) * exp(j pi (-u_g kappa (kappa+1) + u_0 k (k-1)) / l)
                 * G(u_0 - u_g,  u_g kappa + u_0 k + (u_g - u_0)/2 - eps)

with G(a, b) = sum_n exp(j pi a n^2 / l - j 2 pi b n / l).  The published
form of this identity carries a sign ambiguity in the half-integer term of
the Gauss-sum argument; the variant implemented here is the one that
matches the brute-force correlation to machine precision (see tests).

All integer multiples of pi/l are reduced mod 2l in exact integer
arithmetic before evaluating the exponential; naive float reduction breaks
the identity for mixed root parities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Optional

import numpy as np

from .zadoffchu import InvalidRootError, _check_length


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    """Complex correlation values over all lags plus sequence metadata."""

    values: np.ndarray = field(repr=False)
    meta: Optional[tuple] = None  # (u_g, shift_g, u_0, eps_g) when known

    @property
    def length(self) -> int:
        return len(self.values)

    def power(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def circ_corr(x, y, method: str = "fft") -> CorrelationProfile:
    """Circular cross-correlation of two equal-length sequences.

    ``method="fft"`` evaluates iDFT(X * conj(Y)) with the 1/l correlation
    normalization; ``method="direct"`` evaluates the defining sum.  The two
    agree to machine precision and the direct path exists as an oracle.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"sequences must be equal-length 1-d arrays, got {x.shape} vs {y.shape}")
    l = len(x)
    if method == "fft":
        values = np.fft.ifft(np.fft.fft(x) * np.conj(np.fft.fft(y))) / l
    elif method == "direct":
        values = np.array([np.sum(x * np.conj(np.roll(y, k))) for k in range(l)]) / l
    else:
        raise ValueError(f"unknown method {method!r}")
    return CorrelationProfile(values=values)


def gauss_sum(a: int, b: float, length: int) -> complex:
    """Quadratic Gauss sum G(a, b) = sum_n exp(j pi a n^2 / l - j 2 pi b n / l)."""
    n = np.arange(length)
    return complex(np.sum(np.exp(1j * np.pi * (a * n * n) / length - 2j * np.pi * b * n / length)))


def closed_form_cfo_corr(
    u_g: int, shift_g: int, eps_g: float, u_0: int, length: int
) -> CorrelationProfile:
    """Closed-form profile of a shifted, frequency-offset sequence against a reference.

    ``shift_g`` is the cyclic shift in samples applied to the root-``u_g``
    sequence; the reference is the unshifted root-``u_0`` sequence.
    Matches ``circ_corr(apply_cfo(cyclic_shift(zc_root(u_g)), eps), zc_root(u_0))``
    pointwise.
    """
    _check_length(length)
    for u in (u_g, u_0):
        if not 1 <= u < length or gcd(u, length) != 1:
            raise InvalidRootError(f"root {u} is not coprime to length {length}")
    if not 0 <= shift_g < length:
        raise ValueError(f"shift must lie in [0, {length - 1}], got {shift_g}")

    two_l = 2 * length
    k = np.arange(length, dtype=np.int64)
    n = np.arange(length, dtype=np.int64)

    # unit-modulus prefactor, exact integer numerator of pi/l
    pref_num = (-u_g * shift_g * (shift_g + 1) + u_0 * k * (k - 1)) % two_l
    pref = np.exp(1j * np.pi * pref_num / length)

    # Gauss sum per lag: exponent j*pi*(a n^2 - m2[k] n)/l + j*2*pi*eps*n/l,
    # where m2[k] = 2*b_int and b = b_int/2 - eps
    a = u_0 - u_g
    m2 = 2 * u_g * shift_g + 2 * u_0 * k + (u_g - u_0)
    phase_num = (a * n[None, :] * n[None, :] - m2[:, None] * n[None, :]) % two_l
    g = np.exp(1j * np.pi * phase_num / length + 2j * np.pi * eps_g * n[None, :] / length).sum(axis=1)

    return CorrelationProfile(values=pref * g / length, meta=(u_g, shift_g, u_0, eps_g))
