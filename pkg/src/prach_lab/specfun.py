"""Chi-square distribution family and the special functions behind it.

Everything here follows a per-component variance convention: a complex
Gaussian sample "of variance sigma^2" has independent real and imaginary
parts, each with variance sigma^2 (total power 2*sigma^2).  A sum of the
squared magnitudes of `a` such samples is therefore ``sigma^2 * chi2_{2a}``
and is represented as ``ScaledChiSquare(dof_half=a, scale=sigma^2)``.

Scale parameters must stay consistent with that convention when these
distributions are matched against simulated correlator statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special


class ConvergenceError(RuntimeError):
    """A series evaluation did not converge within its iteration cap."""


_MAX_SERIES_TERMS = 100_000
_SERIES_BLOCK = 512


def upper_inc_gamma_reg(a, x):
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a)."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(a <= 0):
        raise ValueError("shape parameter a must be positive")
    if np.any(x < 0):
        raise ValueError("argument x must be nonnegative")
    out = special.gammaincc(a, x)
    if out.ndim == 0:
        return float(out)
    return out


def lower_inc_gamma_reg(a, x):
    """Regularized lower incomplete gamma P(a, x) = 1 - Q(a, x)."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(a <= 0):
        raise ValueError("shape parameter a must be positive")
    if np.any(x < 0):
        raise ValueError("argument x must be nonnegative")
    out = special.gammainc(a, x)
    if out.ndim == 0:
        return float(out)
    return out


def inv_upper_inc_gamma_reg(a, p):
    """Inverse of ``upper_inc_gamma_reg`` in its second argument.

    Returns x >= 0 such that Q(a, x) = p for p in (0, 1).
    """
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(a <= 0):
        raise ValueError("shape parameter a must be positive")
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("probability p must lie strictly inside (0, 1)")
    out = special.gammainccinv(a, p)
    if out.ndim == 0:
        return float(out)
    return out


def _poisson_log_weights(mu: float):
    """Poisson(mu) pmf over a window that carries all mass above ~1e-17.

    Returns (j, log_pmf).  The window is centered on mu with a half-width
    of 9 standard deviations plus a constant floor, which by a Bernstein
    bound leaves less than 1e-16 probability outside.
    """
    if mu <= 0.0:
        return np.array([0]), np.array([0.0])
    half = 9.0 * np.sqrt(mu + 1.0) + 36.0
    lo = max(0, int(np.floor(mu - half)))
    hi = int(np.ceil(mu + half))
    j = np.arange(lo, hi + 1)
    logw = -mu + j * np.log(mu) - special.gammaln(j + 1.0)
    return j, logw


def marcum_q(order: int, a: float, b: float) -> float:
    """Marcum Q function Q_M(a, b) of positive integer order M.

    Equals the probability that a non-central chi-square variable with
    2*M degrees of freedom and non-centrality a^2 exceeds b^2.  Evaluated
    as a Poisson mixture of regularized gamma tails; when the result is
    expected to be large the complementary (lower) mixture is summed
    instead so that neither branch subtracts nearly equal quantities.
    """
    if order < 1 or int(order) != order:
        raise ValueError("order must be a positive integer")
    if a < 0 or b < 0:
        raise ValueError("arguments a and b must be nonnegative")
    if b == 0.0:
        return 1.0
    lam = a * a
    y = 0.5 * b * b
    j, logw = _poisson_log_weights(0.5 * lam)
    w = np.exp(logw)
    shapes = order + j
    if b * b >= 2.0 * order + lam:
        # right tail: sum of small positive terms
        return float(np.sum(w * special.gammaincc(shapes, y)))
    total = float(np.sum(w * special.gammainc(shapes, y)))
    return 1.0 - total


@dataclass(frozen=True)
class ScaledChiSquare:
    """``scale * chi2_{2*dof_half} + offset`` with per-component scale."""

    dof_half: int
    scale: float
    offset: float = 0.0

    def __post_init__(self):
        if self.dof_half < 1 or int(self.dof_half) != self.dof_half:
            raise ValueError("dof_half must be a positive integer")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.offset < 0:
            raise ValueError("offset must be nonnegative")

    @property
    def mean(self) -> float:
        return 2.0 * self.dof_half * self.scale + self.offset

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.offset) / (2.0 * self.scale)
        out = np.where(z > 0, special.gammainc(self.dof_half, np.maximum(z, 0.0)), 0.0)
        if out.ndim == 0:
            return float(out)
        return out

    def ccdf(self, x):
        z = (np.asarray(x, dtype=float) - self.offset) / (2.0 * self.scale)
        out = np.where(z > 0, special.gammaincc(self.dof_half, np.maximum(z, 0.0)), 1.0)
        if out.ndim == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class NoncentralChiSquare:
    """``scale * chi'2_{2*dof_half}(noncentrality)``."""

    dof_half: int
    scale: float
    noncentrality: float

    def __post_init__(self):
        if self.dof_half < 1 or int(self.dof_half) != self.dof_half:
            raise ValueError("dof_half must be a positive integer")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.noncentrality < 0:
            raise ValueError("noncentrality must be nonnegative")

    def ccdf(self, x: float) -> float:
        x = float(x)
        if x <= 0:
            return 1.0
        return marcum_q(self.dof_half, np.sqrt(self.noncentrality), np.sqrt(x / self.scale))

    def cdf(self, x: float) -> float:
        return 1.0 - self.ccdf(x)


@dataclass(frozen=True)
class GeneralizedChiSquareMix:
    """Non-central chi-square whose non-centrality is itself chi-square.

    ``X ~ scale_x * chi'2_{2*alpha}(L)`` with ``L ~ scale_lambda * chi2_{2*beta}``
    and ``beta <= alpha``.  Marginally, X is the independent sum

        scale_x * chi2_{2*(alpha-beta)}  +  scale_x * (1 + scale_lambda) * chi2_{2*beta}

    and its CDF is a negative-binomial mixture of lower gamma tails:

        F(x) = sum_j  NB(j; beta, q) * P(alpha + j, x / (2*scale_x)),
        q = scale_lambda / (1 + scale_lambda).

    ``beta > alpha`` is rejected: the convolution form above requires the
    non-centrality to have no more degrees of freedom than the variable.
    """

    alpha: int
    beta: int
    scale_x: float
    scale_lambda: float

    def __post_init__(self):
        if self.alpha < 1 or int(self.alpha) != self.alpha:
            raise ValueError("alpha must be a positive integer")
        if self.beta < 1 or int(self.beta) != self.beta:
            raise ValueError("beta must be a positive integer")
        if self.beta > self.alpha:
            raise ValueError("beta must not exceed alpha")
        if self.scale_x <= 0:
            raise ValueError("scale_x must be positive")
        if self.scale_lambda < 0:
            raise ValueError("scale_lambda must be nonnegative")

    @property
    def mean(self) -> float:
        return 2.0 * self.scale_x * (self.alpha + self.beta * self.scale_lambda)

    # Above this the negative-binomial series needs tens of thousands of
    # terms (its weight ratio is scale_lambda/(1+scale_lambda)), while the
    # exact partial-fraction form below is perfectly conditioned; under it
    # the series converges in a few hundred terms and the partial fractions
    # degrade as the two gamma scales approach each other.
    _PF_SWITCH = 40.0

    def _pf_terms(self):
        """Exact finite expansion of the two-gamma convolution.

        With a1 = alpha - beta, a2 = beta, th1 = 2 scale_x and
        th2 = 2 scale_x (1 + scale_lambda), the Laplace transform
        (1 + th1 s)^-a1 (1 + th2 s)^-a2 splits into partial fractions whose
        inverse is a signed combination of plain gamma tails:

            ccdf(x) = sum_j A_j Q(j, x/th1) + sum_j B_j Q(j, x/th2).

        Returns (shapes1, A, shapes2, B).
        """
        a1 = self.alpha - self.beta
        a2 = self.beta
        sl = self.scale_lambda
        if a1 == 0:
            return np.array([]), np.array([]), np.array([a2]), np.array([1.0])
        i1 = np.arange(a1)
        log_a = (
            special.gammaln(a2 + i1)
            - special.gammaln(i1 + 1.0)
            - special.gammaln(a2)
            - a2 * np.log(sl)
            + i1 * np.log1p(1.0 / sl)
        )
        sign_a = 1.0 if a2 % 2 == 0 else -1.0
        coeff_a = sign_a * np.exp(log_a)
        shapes_a = a1 - i1

        i2 = np.arange(a2)
        log_b = (
            special.gammaln(a1 + i2)
            - special.gammaln(i2 + 1.0)
            - special.gammaln(a1)
            - a1 * np.log(sl / (1.0 + sl))
            - i2 * np.log(sl)
        )
        coeff_b = np.where(i2 % 2 == 0, 1.0, -1.0) * np.exp(log_b)
        shapes_b = a2 - i2
        return shapes_a, coeff_a, shapes_b, coeff_b

    def _pf_tail(self, x: float, lower: bool) -> float:
        shapes_a, coeff_a, shapes_b, coeff_b = self._pf_terms()
        th1 = 2.0 * self.scale_x
        th2 = 2.0 * self.scale_x * (1.0 + self.scale_lambda)
        tail = special.gammainc if lower else special.gammaincc
        total = float(np.sum(coeff_b * tail(shapes_b, x / th2)))
        if len(shapes_a):
            total += float(np.sum(coeff_a * tail(shapes_a, x / th1)))
        return min(max(total, 0.0), 1.0)

    def _mixture_sum(self, x: float, lower: bool, tail_tol: float) -> float:
        """Sum NB(j) * gamma-tail(alpha+j, x/(2 scale_x)) until the weight
        tail is provably below ``tail_tol`` (weights sum to one and each
        gamma factor is at most one)."""
        y = x / (2.0 * self.scale_x)
        q = self.scale_lambda / (1.0 + self.scale_lambda)
        gamma_tail = special.gammainc if lower else special.gammaincc

        total = 0.0
        # w_0 = (1-q)^beta, then w_{j+1} = w_j * q * (j+beta) / (j+1)
        w_next = (1.0 - q) ** self.beta
        j_start = 0
        while j_start < _MAX_SERIES_TERMS:
            j = np.arange(j_start, min(j_start + _SERIES_BLOCK, _MAX_SERIES_TERMS))
            w = np.empty(len(j))
            w[0] = w_next
            for i in range(1, len(j)):
                w[i] = w[i - 1] * q * (j[i - 1] + self.beta) / (j[i - 1] + 1.0)
            total += float(np.sum(w * gamma_tail(self.alpha + j, y)))
            j_last = int(j[-1])
            w_next = w[-1] * q * (j_last + self.beta) / (j_last + 1.0)
            # geometric bound on the remaining negative-binomial weight
            ratio = q * (j_last + 1 + self.beta) / (j_last + 2.0)
            if ratio < 1.0:
                tail = w_next / (1.0 - ratio)
                if tail <= tail_tol:
                    return total
            j_start = j_last + 1
        raise ConvergenceError(
            f"mixture series did not converge in {_MAX_SERIES_TERMS} terms "
            f"(alpha={self.alpha}, beta={self.beta}, scale_lambda={self.scale_lambda:g})"
        )

    def cdf(self, x: float) -> float:
        x = float(x)
        if x <= 0.0:
            return 0.0
        if self.scale_lambda == 0.0:
            return float(special.gammainc(self.alpha, x / (2.0 * self.scale_x)))
        if self.scale_lambda > self._PF_SWITCH:
            return self._pf_tail(x, lower=True)
        val = self._mixture_sum(x, lower=True, tail_tol=1e-13)
        return min(val, 1.0)

    def ccdf(self, x: float, rel_tol: float = 1e-12) -> float:
        """Upper tail, summed directly so small values keep relative accuracy."""
        x = float(x)
        if x <= 0.0:
            return 1.0
        if self.scale_lambda == 0.0:
            return float(special.gammaincc(self.alpha, x / (2.0 * self.scale_x)))
        if self.scale_lambda > self._PF_SWITCH:
            return self._pf_tail(x, lower=False)
        # two passes: a first estimate sets the absolute tolerance actually needed
        rough = self._mixture_sum(x, lower=False, tail_tol=1e-13)
        tol = max(rel_tol * rough, 1e-16)
        if tol >= 1e-13:
            return min(rough, 1.0)
        return min(self._mixture_sum(x, lower=False, tail_tol=tol), 1.0)


def mix_cdf(d: GeneralizedChiSquareMix, x: float) -> float:
    """CDF of a ``GeneralizedChiSquareMix`` at x (series truncation <= 1e-13)."""
    return d.cdf(x)


def sample_chi2(rng: np.random.Generator, dof_half: int, scale: float, size=None):
    """Draw ``scale * chi2_{2*dof_half}`` variates from an owned generator."""
    if dof_half < 1 or int(dof_half) != dof_half:
        raise ValueError("dof_half must be a positive integer")
    if scale <= 0:
        raise ValueError("scale must be positive")
    return scale * rng.chisquare(2 * dof_half, size=size)
