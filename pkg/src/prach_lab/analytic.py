"""Closed-form detection statistics: per-lag variance profiles, the four
combined-statistic CCDFs, optimal thresholds, frequency-offset per-lag
thresholds, detection probabilities, and the composite replica false-alarm
probability of the offset-aware detector.

Conventions (all per-component variances, channel power normalized to 1):

    sigma_z^2 = sigma_w^2 / l          correlator noise per lag
    sigma^2[k] = sum_g |c_g[k]|^2      variance of the signal part of the
                                       correlator output at lag k, where
                                       c_g is device g's correlation profile
                                       against the root under test

Combined statistic Psi over n_ant antennas and n_rep repetitions:

    combiner  coherence     distribution of Psi at one lag
    --------  -----------   -------------------------------------------------
    pc        independent   (sigma_z^2 + sigma^2/2) * chi2_{2 n_ant n_rep}
    pc        identical     sigma_z^2 * chi2_{2 n_ant (n_rep-1)}
                              + sigma_z^2 (1 + n_rep sigma^2 / (2 sigma_z^2))
                                * chi2_{2 n_ant}      (independent sum)
    cc        independent   n_rep (sigma_z^2 + sigma^2/2) * chi2_{2 n_ant}
    cc        identical     (n_rep sigma_z^2 + n_rep^2 sigma^2/2) * chi2_{2 n_ant}

The pc/identical case is the generalized mixture of `specfun`; the other
three are scaled central chi-squares, so their CCDFs are regularized upper
incomplete gammas and their thresholds invert in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import optimize, special

from . import specfun
from .correlation import closed_form_cfo_corr
from .scenario import Device, Scenario

SIGMA_H2 = 1.0  # total channel power; the normalization everything assumes


class UnsupportedCaseError(ValueError):
    """Requested a closed form outside the derived combiner/coherence set."""


@dataclass(frozen=True)
class CaseParams:
    combiner: str  # "pc" | "cc"
    coherence: str  # "independent" | "identical"
    n_ant: int
    n_rep: int
    sigma_z2: float

    def __post_init__(self):
        if self.combiner not in ("pc", "cc"):
            raise ValueError(f"unknown combiner {self.combiner!r}")
        if self.coherence not in ("independent", "identical"):
            raise ValueError(f"unknown coherence {self.coherence!r}")
        if self.n_ant < 1 or self.n_rep < 1:
            raise ValueError("antenna and repetition counts must be >= 1")
        if self.sigma_z2 <= 0:
            raise ValueError("sigma_z2 must be positive")


def case_for(s: Scenario, sigma_w: float, combiner: str) -> CaseParams:
    return CaseParams(
        combiner=combiner,
        coherence=s.coherence,
        n_ant=s.n_ant,
        n_rep=s.n_rep,
        sigma_z2=sigma_w**2 / s.length,
    )


def _pc_identical_mix(case: CaseParams, sigma2: float) -> specfun.GeneralizedChiSquareMix:
    return specfun.GeneralizedChiSquareMix(
        alpha=case.n_ant * case.n_rep,
        beta=case.n_ant,
        scale_x=case.sigma_z2,
        scale_lambda=case.n_rep * sigma2 / (2.0 * case.sigma_z2),
    )


def ccdf_psi(case: CaseParams, sigma2: float, psi: float) -> float:
    """P(Psi > psi) at one lag whose signal variance is ``sigma2``."""
    if psi < 0:
        raise ValueError("psi must be nonnegative")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if psi == 0.0:
        return 1.0
    z2 = case.sigma_z2
    if case.combiner == "pc":
        if case.coherence == "independent" or case.n_rep == 1:
            denom = 2.0 * z2 + sigma2
            return float(special.gammaincc(case.n_ant * case.n_rep, psi / denom))
        return _pc_identical_mix(case, sigma2).ccdf(psi)
    if case.coherence == "independent":
        denom = case.n_rep * (2.0 * z2 + sigma2)
    else:
        denom = 2.0 * case.n_rep * z2 + case.n_rep**2 * sigma2
    return float(special.gammaincc(case.n_ant, psi / denom))


def threshold(case: CaseParams, sigma2_h0: float, p_fa_sample: float) -> float:
    """Smallest threshold whose null exceedance probability is ``p_fa_sample``."""
    if not 0.0 < p_fa_sample < 1.0:
        raise ValueError("p_fa_sample must lie in (0, 1)")
    z2 = case.sigma_z2
    if case.combiner == "pc":
        if case.coherence == "independent" or case.n_rep == 1:
            g = special.gammainccinv(case.n_ant * case.n_rep, p_fa_sample)
            return float((2.0 * z2 + sigma2_h0) * g)
        return _invert_pc_identical(case, sigma2_h0, p_fa_sample)
    g = special.gammainccinv(case.n_ant, p_fa_sample)
    if case.coherence == "independent":
        return float(case.n_rep * (2.0 * z2 + sigma2_h0) * g)
    return float(case.n_rep * (2.0 * z2 + case.n_rep * sigma2_h0) * g)


def _invert_pc_identical(case: CaseParams, sigma2: float, p: float) -> float:
    mix = _pc_identical_mix(case, sigma2)
    # Markov bound: ccdf(mean / (p/10)) <= p/10 < p, so the root is bracketed
    hi = mix.mean / (p / 10.0)
    try:
        return float(
            optimize.brentq(
                lambda psi: mix.ccdf(psi) - p, 0.0, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200
            )
        )
    except RuntimeError as exc:
        raise specfun.ConvergenceError(f"threshold inversion failed: {exc}") from exc


def p_td(case: CaseParams, sigma2_h1: float, thr: float) -> float:
    """Detection probability: the CCDF under the signal-present variance."""
    return ccdf_psi(case, sigma2_h1, thr)


# ---------------------------------------------------------------------------
# per-lag variance profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class VarianceProfile:
    sigma2: np.ndarray = field(repr=False)
    hypothesis: str  # "H0" | "H1"
    root: int
    target_lag: Optional[int] = None


@lru_cache(maxsize=8192)
def _profile_power(u_g: int, shift: int, eps: float, u_0: int, length: int):
    """|c|^2 profile of one device against one root; treat as read-only."""
    prof = closed_form_cfo_corr(u_g, shift, eps, u_0, length).power()
    prof.setflags(write=False)
    return prof


def device_power_profile(s: Scenario, dev: Device, u_0: int) -> np.ndarray:
    return _profile_power(dev.root, s.device_shift(dev), dev.cfo, u_0, s.length)


def variance_profile(
    s: Scenario,
    u_0: int,
    hypothesis: str = "H0",
    cfo_mode: str = "exact-cfo",
    target: Optional[Device] = None,
) -> VarianceProfile:
    """Per-lag variance of the correlator signal part for the root under test.

    Under H0 the profile sums the contributions of devices on other roots;
    under H1 the target device's own profile is added.  ``no-cfo`` mode
    replaces the exact profiles by their flat zero-offset values using the
    scenario's expected interferer count (the quantity thresholds are
    designed against).
    """
    l = s.length
    if hypothesis not in ("H0", "H1"):
        raise ValueError(f"unknown hypothesis {hypothesis!r}")
    if cfo_mode not in ("exact-cfo", "no-cfo"):
        raise ValueError(f"unknown cfo_mode {cfo_mode!r}")

    target_lag = None
    if hypothesis == "H1":
        if target is None:
            own = s.devices_on_root(u_0)
            if len(own) != 1:
                raise ValueError(
                    f"H1 profile needs an explicit target; root {u_0} has {len(own)} devices"
                )
            target = own[0]
        if target.root != u_0:
            raise ValueError(f"target device transmits root {target.root}, not {u_0}")
        target_lag = s.device_peak_lag(target)

    if cfo_mode == "no-cfo":
        base = SIGMA_H2 * s.expected_inter(u_0) / l
        sigma2 = np.full(l, base)
        if hypothesis == "H1":
            sigma2[target_lag] += SIGMA_H2
    else:
        sigma2 = np.zeros(l)
        for d in s.interferers(u_0):
            sigma2 += SIGMA_H2 * device_power_profile(s, d, u_0)
        if hypothesis == "H1":
            sigma2 = sigma2 + SIGMA_H2 * device_power_profile(s, target, u_0)
    return VarianceProfile(sigma2=sigma2, hypothesis=hypothesis, root=u_0, target_lag=target_lag)


# ---------------------------------------------------------------------------
# offset-aware thresholds and probabilities
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ThresholdSet:
    """Base threshold plus the per-lag offset-aware threshold for one root."""

    root: int
    base: float
    cfo_per_lag: np.ndarray = field(repr=False)

    @property
    def effective(self) -> np.ndarray:
        return np.maximum(self.base, self.cfo_per_lag)


def _require_pc_independent(case: CaseParams) -> None:
    if case.combiner != "pc" or (case.coherence != "independent" and case.n_rep != 1):
        raise UnsupportedCaseError(
            "offset-aware analysis is derived for power combining with "
            "independent repetition channels"
        )


def cfo_threshold_profile(
    case: CaseParams, profile: VarianceProfile, p_fa_sample: float
) -> np.ndarray:
    """Per-lag threshold (2 sigma_z^2 + sigma^2[k]) * Gammainv(n_ant n_rep, p)."""
    _require_pc_independent(case)
    g = special.gammainccinv(case.n_ant * case.n_rep, p_fa_sample)
    return (2.0 * case.sigma_z2 + profile.sigma2) * g


def threshold_set(
    s: Scenario, u_0: int, case: CaseParams, p_fa_sample: float, base_scale: float = 1.0
) -> ThresholdSet:
    """Base (expected-interference) and per-lag offset thresholds for one root."""
    base = base_scale * threshold(case, SIGMA_H2 * s.expected_inter(u_0) / s.length, p_fa_sample)
    prof = variance_profile(s, u_0, "H0", "exact-cfo")
    return ThresholdSet(root=u_0, base=base, cfo_per_lag=cfo_threshold_profile(case, prof, p_fa_sample))


def inter_sample_distance(u: int, length: int) -> int:
    """Cyclic lag spacing between a peak and its offset-induced replicas.

    The smallest d_u >= 0 with (u * d_u) mod l = 1, folded to l - d_u when
    d_u >= l/2 so the result is at most l/2.
    """
    from math import gcd

    if gcd(u, length) != 1:
        raise ValueError(f"root {u} is not coprime to length {length}")
    d_u = pow(u, -1, length)
    return d_u if d_u < length / 2 else length - d_u


def occupancy_profile(s: Scenario, u_0: int) -> np.ndarray:
    """Per-lag variance contributed by every transmitting device at root u_0.

    This is what a detector that has located all devices reconstructs when
    screening a further candidate lag: no lag under test belongs to any of
    them, so they all count as interference there.
    """
    sigma2 = np.zeros(s.length)
    for d in s.devices:
        sigma2 = sigma2 + SIGMA_H2 * device_power_profile(s, d, u_0)
    return sigma2


def total_pfa_analytic(
    s: Scenario,
    case: CaseParams,
    thresholds: dict,
    profiles: Optional[dict] = None,
    exclude_true_peaks: bool = True,
) -> float:
    """1 - prod over roots and lags of (1 - CCDF at the effective threshold).

    ``thresholds`` maps root -> ThresholdSet (or a per-lag array);
    ``profiles`` maps root -> per-lag variance and defaults to the
    all-devices occupancy profile.  Lags carrying a transmitting device's
    peak are excluded by default: an exceedance there is a true detection,
    not a false alarm.
    """
    _require_pc_independent(case)
    n = case.n_ant * case.n_rep
    peaks = s.true_peaks()
    log_ok = 0.0
    for u in s.roots:
        t = thresholds[u]
        eff = t.effective if isinstance(t, ThresholdSet) else np.asarray(t, dtype=float)
        sigma2 = occupancy_profile(s, u) if profiles is None else profiles[u]
        ccdf = special.gammaincc(n, eff / (2.0 * case.sigma_z2 + sigma2))
        if exclude_true_peaks and peaks[u]:
            keep = np.ones(s.length, dtype=bool)
            keep[list(peaks[u])] = False
            ccdf = ccdf[keep]
        if np.any(ccdf >= 1.0):
            return 1.0
        log_ok += float(np.sum(np.log1p(-ccdf)))
    return float(-np.expm1(log_ok))


@dataclass(frozen=True)
class CfoFalseAlarmEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    p1: float  # replica beats the detected true peak
    p2: float  # replica exceeds the threshold, true peak does not
    n_mc: int


def _ncx2_pdf(x, df, lam):
    """Density of chi'2_{df}(lam), vectorized and overflow-safe."""
    r = np.sqrt(lam * x)
    order = df / 2.0 - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 0.5 * np.exp(-(x + lam) / 2.0 + r) * (x / lam) ** (order / 2.0)
    return np.where(x > 0, val * special.ive(order, r), 0.0)


_NCX2_NORMAL_SWITCH = 1e5  # beyond this chndtr's iteration count is prohibitive


def _ncx2_cdf(x, df, lam):
    """CDF of chi'2_{df}(lam); normal limit for huge non-centralities, where
    the exact routine's running time grows with lam and the skewness
    sqrt(8/lam) is already negligible."""
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    lam = np.asarray(lam, dtype=float)
    x, lam = np.broadcast_arrays(x, lam)
    out = np.empty(x.shape)
    big = lam > _NCX2_NORMAL_SWITCH
    if np.any(big):
        z = (x[big] - df - lam[big]) / np.sqrt(2.0 * (df + 2.0 * lam[big]))
        out[big] = special.ndtr(z)
    if np.any(~big):
        out[~big] = special.chndtr(x[~big], df, lam[~big])
    return out


def _ncx2_sf(x, df, lam):
    return np.clip(1.0 - _ncx2_cdf(x, df, lam), 0.0, 1.0)


class ReplicaFalseAlarmModel:
    """Semi-analytic model of one device's replica-selection false alarm.

    Conditioned on the device's channel vector h, the statistics at the
    true-peak lag and at the strongest replica lag are independent scaled
    non-central chi-squares whose non-centralities share the factor
    T = sum |h|^2.  T is drawn once by Monte Carlo (antithetic pairs);
    other devices enter as an independent variance inflation at the two
    lags.  The peak-vs-replica comparison kernel

        pdf_peak(x) * sf_replica(x * s_t / s_f)

    does not depend on any threshold, so it is tabulated per draw on a
    grid covering the peak density's support; evaluating the model at a
    new threshold is then a cheap partial-integral lookup, which is what
    makes threshold adaptation by root-solving affordable.
    """

    _GRID_POINTS = 192

    def __init__(
        self,
        s: Scenario,
        dev: Device,
        case: CaseParams,
        n_mc: int = 20_000,
        rng: Optional[np.random.Generator] = None,
        t_draws: Optional[np.ndarray] = None,
    ):
        _require_pc_independent(case)
        if t_draws is None and n_mc < 10_000:
            raise ValueError("n_mc must be at least 10_000")
        self.case = case
        self.n = case.n_ant * case.n_rep
        self.df = 2 * self.n
        l = s.length
        self.k_t = s.device_peak_lag(dev)
        own = device_power_profile(s, dev, dev.root)
        self.k_f = int(np.argmax(np.where(np.arange(l) == self.k_t, -np.inf, own)))
        self.c2_t = float(own[self.k_t])
        self.c2_f = float(own[self.k_f])
        self.degenerate = self.c2_f <= 1e-30
        inter = variance_profile(s, dev.root, "H0", "exact-cfo").sigma2
        self.s_t = case.sigma_z2 + 0.5 * float(inter[self.k_t])
        self.s_f = case.sigma_z2 + 0.5 * float(inter[self.k_f])

        if t_draws is None:
            if rng is None:
                rng = np.random.default_rng(s.seed)
            half = n_mc // 2
            u = rng.uniform(0.0, 1.0, half)
            # T ~ Gamma(n, 1) = (sigma_h^2 / 2) chi2_{2n}, antithetic pairs
            t_draws = np.concatenate(
                [special.gammaincinv(self.n, u), special.gammaincinv(self.n, 1.0 - u)]
            )
        self.t_draws = np.asarray(t_draws, dtype=float)
        self.n_mc = len(self.t_draws)
        if self.degenerate:
            return

        self.lam_t = np.maximum(self.t_draws * self.c2_t / self.s_t, 1e-10)
        self.lam_f = np.maximum(self.t_draws * self.c2_f / self.s_f, 1e-10)

        # per-draw trapezoid table of the comparison kernel over the peak
        # density's support (mass outside mean +- ~12 sigma is negligible)
        mean_x = self.df + self.lam_t
        sd_x = np.sqrt(2.0 * (self.df + 2.0 * self.lam_t))
        a = np.maximum(mean_x - 12.0 * sd_x - 30.0, 0.0)
        b = mean_x + 14.0 * sd_x + 60.0
        frac = np.linspace(0.0, 1.0, self._GRID_POINTS)
        self._grid_a = a
        self._grid_dx = (b - a) / (self._GRID_POINTS - 1)
        x = a[:, None] + (b - a)[:, None] * frac[None, :]
        kernel = _ncx2_pdf(x, self.df, self.lam_t[:, None])
        # replica tail factor: skip rows where it is flat 0 or flat 1 over
        # the whole grid (the usual situation once the SNR is high, and the
        # exact evaluation is costly exactly there)
        f_mean = self.df + self.lam_f
        f_sd = np.sqrt(2.0 * (self.df + 2.0 * self.lam_f))
        ratio = self.s_t / self.s_f
        tail_zero = a * ratio > f_mean + 14.0 * f_sd + 60.0
        tail_one = b * ratio < np.maximum(f_mean - 14.0 * f_sd - 60.0, 0.0)
        mixed = ~(tail_zero | tail_one)
        kernel[tail_zero] = 0.0
        if np.any(mixed):
            kernel[mixed] *= _ncx2_sf(
                x[mixed] * ratio, self.df, self.lam_f[mixed, None]
            )
        # right-sided cumulative integral: C[:, j] = int_{x_j}^{b} kernel
        seg = 0.5 * (kernel[:, 1:] + kernel[:, :-1]) * self._grid_dx[:, None]
        cum = np.zeros_like(kernel)
        cum[:, :-1] = np.cumsum(seg[:, ::-1], axis=1)[:, ::-1]
        self._kernel = kernel
        self._right_cum = cum

    def _p1_from(self, lo: np.ndarray) -> np.ndarray:
        """Partial integral of the comparison kernel over [lo, inf) per draw."""
        pos = (lo - self._grid_a) / self._grid_dx
        idx = np.clip(np.floor(pos).astype(int), 0, self._GRID_POINTS - 2)
        frac = np.clip(pos - idx, 0.0, None)
        rows = np.arange(self.n_mc)
        c0 = self._right_cum[rows, idx]
        k0 = self._kernel[rows, idx]
        k1 = self._kernel[rows, idx + 1]
        # subtract the trapezoid piece of [x_idx, lo] from the right integral
        k_lo = k0 + (k1 - k0) * np.minimum(frac, 1.0)
        piece = 0.5 * (k0 + k_lo) * np.minimum(frac, 1.0) * self._grid_dx
        out = np.where(pos <= 0.0, c0, c0 - piece)
        return np.where(pos >= self._GRID_POINTS - 1, 0.0, out)

    def evaluate(self, base_threshold: float, eff_threshold_f: float) -> CfoFalseAlarmEstimate:
        """Estimate p1 + p2 for a base threshold and the effective threshold
        at the replica lag."""
        if self.degenerate:
            return CfoFalseAlarmEstimate(0.0, 0.0, 0.0, 0.0, 0.0, self.n_mc)
        p1 = self._p1_from(np.full(self.n_mc, base_threshold / self.s_t))
        p2 = _ncx2_sf(eff_threshold_f / self.s_f, self.df, self.lam_f) * _ncx2_cdf(
            base_threshold / self.s_t, self.df, self.lam_t
        )
        per_draw = p1 + p2
        est = float(np.mean(per_draw))
        se = float(np.std(per_draw, ddof=1) / np.sqrt(self.n_mc))
        return CfoFalseAlarmEstimate(
            estimate=est,
            ci_low=max(0.0, est - 1.96 * se),
            ci_high=est + 1.96 * se,
            p1=float(np.mean(p1)),
            p2=float(np.mean(p2)),
            n_mc=self.n_mc,
        )


def p_fa_cfo_device(
    s: Scenario,
    dev: Device,
    thresholds: dict,
    case: CaseParams,
    n_mc: int = 20_000,
    rng: Optional[np.random.Generator] = None,
    _t_draws: Optional[np.ndarray] = None,
) -> CfoFalseAlarmEstimate:
    """Probability that device ``dev``'s strongest offset replica is selected
    as a peak: the replica beats the detected true peak (p1) or clears the
    effective threshold while the true peak misses the base one (p2)."""
    model = ReplicaFalseAlarmModel(s, dev, case, n_mc=n_mc, rng=rng, t_draws=_t_draws)
    tset = thresholds[dev.root]
    base = tset.base if isinstance(tset, ThresholdSet) else float(tset)
    eff_f = float(tset.effective[model.k_f]) if isinstance(tset, ThresholdSet) else base
    return model.evaluate(base, eff_f)


def p_td_cfo(s: Scenario, dev: Device, thresholds: dict, case: CaseParams) -> float:
    """Detection probability of ``dev`` at its peak lag under the effective threshold."""
    _require_pc_independent(case)
    k_t = s.device_peak_lag(dev)
    prof = variance_profile(s, dev.root, "H1", "exact-cfo", target=dev)
    tset = thresholds[dev.root]
    eff = float(tset.effective[k_t]) if isinstance(tset, ThresholdSet) else float(tset)
    return ccdf_psi(case, float(prof.sigma2[k_t]), eff)


def fa_threshold_set(
    s: Scenario, u_0: int, case: CaseParams, p_fa_sample: float, base_scale: float = 1.0
) -> ThresholdSet:
    """Effective thresholds a fully informed offset-aware detector applies
    at non-peak lags: the per-lag part reconstructs every device's spread."""
    _require_pc_independent(case)
    base = base_scale * threshold(case, SIGMA_H2 * s.expected_inter(u_0) / s.length, p_fa_sample)
    g = special.gammainccinv(case.n_ant * case.n_rep, p_fa_sample)
    per_lag = (2.0 * case.sigma_z2 + occupancy_profile(s, u_0)) * g
    return ThresholdSet(root=u_0, base=base, cfo_per_lag=per_lag)


def _replica_models(
    s: Scenario, case: CaseParams, p_fa_sample: float, n_mc: int,
    rng: Optional[np.random.Generator] = None,
) -> list:
    """One (model, unscaled base, replica-lag offset threshold) per offset
    device; the offset threshold at the replica lag does not scale with the
    base because it comes from the per-lag interference reconstruction."""
    if rng is None:
        rng = np.random.default_rng(s.seed + 7)
    out = []
    for dev in s.devices:
        if dev.cfo == 0.0:
            continue
        model = ReplicaFalseAlarmModel(s, dev, case, n_mc=n_mc, rng=rng)
        base0 = threshold(
            case, SIGMA_H2 * s.expected_inter(dev.root) / s.length, p_fa_sample
        )
        prof = variance_profile(s, dev.root, "H0", "exact-cfo")
        cfo_f = float(cfo_threshold_profile(case, prof, p_fa_sample)[model.k_f])
        out.append((model, base0, cfo_f))
    return out


def predicted_total_pfa(
    s: Scenario,
    case: CaseParams,
    p_fa_sample: float,
    base_scale: float = 1.0,
    n_mc: int = 20_000,
    _models: Optional[list] = None,
) -> float:
    """Predicted occasion false alarm of the offset-aware detector.

    Noise-plus-interference exceedances over the effective thresholds plus
    each transmitting device's replica-selection probability.
    """
    fa_thresholds = {
        u: fa_threshold_set(s, u, case, p_fa_sample, base_scale=base_scale) for u in s.roots
    }
    total = total_pfa_analytic(s, case, fa_thresholds)
    models = _models if _models is not None else _replica_models(s, case, p_fa_sample, n_mc)
    for model, base0, cfo_f in models:
        base = base_scale * base0
        total += model.evaluate(base, max(base, cfo_f)).estimate
    return min(total, 1.0)


def adapt_base_threshold_scale(
    s: Scenario,
    case: CaseParams,
    p_fa_sample: float,
    n_mc: int = 20_000,
    rng: Optional[np.random.Generator] = None,
    bracket: tuple = (0.25, 8.0),
) -> float:
    """Scale factor on the base threshold that returns the predicted total
    false alarm of the offset-aware detector to the configured target.

    The prediction is monotone nonincreasing in the scale; common random
    numbers across evaluations make it deterministic, so the root is found
    by bisection on log-scale.  If even the bracket ends cannot reach the
    target (the per-lag offset thresholds already dominate), the nearest
    bracket end is returned.
    """
    models = _replica_models(s, case, p_fa_sample, n_mc, rng=rng)

    def predicted(scale: float) -> float:
        return predicted_total_pfa(
            s, case, p_fa_sample, base_scale=scale, _models=models
        )

    lo, hi = bracket
    if predicted(lo) <= s.p_fa_des:
        return lo
    if predicted(hi) >= s.p_fa_des:
        return hi
    for _ in range(40):
        mid = float(np.sqrt(lo * hi))
        if predicted(mid) > s.p_fa_des:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-4:
            break
    return float(np.sqrt(lo * hi))
