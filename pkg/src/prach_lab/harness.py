"""Monte Carlo experiment driver.

Runs PRACH occasions over a scenario's SNR grid, tallies per-device
detections and occasion-level false alarms for each requested detector and
combiner, attaches the matching closed-form values where they exist, and
emits rows suitable for CSV output.

Occasions are simulated in fixed-size chunks; each chunk draws from a
counter-based stream keyed by (seed, SNR index, chunk index), and chunk
tallies are integers merged by summation, so results are bit-identical for
any parallelism degree.  The signal part of the correlator output comes
from cached closed-form profiles (no per-occasion transforms); the noise
part is drawn in the frequency domain and correlated per root, which
preserves the exact joint noise statistics across roots.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import analytic, detect
from .channel import reference_spectrum, rng_stream
from .receiver import device_profiles
from .scenario import Device, Scenario, fa_budget, load_scenario, noise_sigma_from_snr

_CHUNK_TARGET = 6_000_000  # complex samples per chunk array


@dataclass(frozen=True)
class RunPlan:
    scenario_path: str
    detectors: tuple = ("baseline",)
    occasions: int = 100_000
    out: Optional[str] = None
    jobs: int = 1
    seed: Optional[int] = None  # overrides the scenario seed
    combiners: tuple = ("pc", "cc")

    def __post_init__(self):
        if self.occasions < 1_000:
            raise ValueError("occasions must be at least 1000")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        for det in self.detectors:
            if det not in ("baseline", "cfo_aware", "cfo_aware_adapted", "conventional"):
                raise ValueError(f"unknown detector {det!r}")
        for comb in self.combiners:
            if comb not in ("pc", "cc"):
                raise ValueError(f"unknown combiner {comb!r}")


@dataclass(frozen=True)
class ResultRow:
    scenario_id: str
    snr_db: float
    detector: str
    combiner: str
    coherence: str
    metric: str  # "p_td" | "p_fa"
    analytic: Optional[float]
    empirical: float
    ci_low: float
    ci_high: float
    n_occasions: int
    seed: int


CSV_FIELDS = [
    "scenario_id", "snr_db", "detector", "combiner", "coherence", "metric",
    "analytic", "empirical", "ci_low", "ci_high", "n_occasions", "seed",
]


@dataclass
class ExperimentResult:
    rows: list = field(default_factory=list)

    def extend(self, rows) -> None:
        self.rows.extend(rows)

    def select(self, **match) -> list:
        out = []
        for r in self.rows:
            if all(getattr(r, k) == v for k, v in match.items()):
                out.append(r)
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_FIELDS)
            for r in self.rows:
                writer.writerow([
                    r.scenario_id,
                    _fmt(r.snr_db),
                    r.detector,
                    r.combiner,
                    r.coherence,
                    r.metric,
                    "" if r.analytic is None else _fmt(r.analytic),
                    _fmt(r.empirical),
                    _fmt(r.ci_low),
                    _fmt(r.ci_high),
                    str(r.n_occasions),
                    str(r.seed),
                ])


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def wilson_ci(k: int, n: int, z: float = 1.959963984540054) -> tuple:
    """95% Wilson score interval for k successes out of n."""
    if n <= 0:
        raise ValueError("n must be positive")
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    hw = z * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, center - hw)
    hi = 1.0 if k == n else min(1.0, center + hw)
    return lo, hi


# ---------------------------------------------------------------------------
# per-chunk simulation
# ---------------------------------------------------------------------------


@dataclass
class DetectorTally:
    n: int = 0
    fa_occasions: int = 0
    fa_lags: int = 0
    detections: Optional[np.ndarray] = None  # int64 per device

    def merge(self, other: "DetectorTally") -> None:
        self.n += other.n
        self.fa_occasions += other.fa_occasions
        self.fa_lags += other.fa_lags
        if self.detections is None:
            self.detections = other.detections
        elif other.detections is not None:
            self.detections = self.detections + other.detections


def _chunk_size(s: Scenario, occasions: int) -> int:
    per_occ = max(1, s.n_rep * s.n_ant * s.length)
    size = max(500, _CHUNK_TARGET // per_occ)
    return min(size, occasions)


@dataclass(frozen=True)
class _PointSetup:
    """Everything a chunk worker needs for one (scenario, SNR) point."""

    s: Scenario
    snr_db: float
    point_idx: int
    seed: int
    detectors: tuple
    combiners: tuple
    sigma_w: float
    p_fa_sample: float
    base_thresholds: dict  # combiner -> {root: float}
    cfo_base_thresholds: dict  # {root: float}, adapted scale already applied
    profiles: dict  # root -> (n_dev, l) complex
    ref_spectra: dict  # root -> (l,) complex
    true_peak_lags: dict  # root -> sorted tuple of lags
    device_peaks: tuple  # (root, k_t) per device
    ctx: Optional[detect.CfoDetectorContext]


def _build_point_setup(
    s: Scenario,
    snr_db: float,
    point_idx: int,
    seed: int,
    detectors: tuple,
    combiners: tuple,
    base_scale: float,
    ctx: Optional[detect.CfoDetectorContext],
) -> _PointSetup:
    sigma_w = noise_sigma_from_snr(snr_db)
    p_s = fa_budget(s.p_fa_des, len(s.roots), s.length)
    base_thresholds = {}
    for comb in combiners:
        case = analytic.case_for(s, sigma_w, comb)
        base_thresholds[comb] = {
            u: analytic.threshold(case, analytic.SIGMA_H2 * s.expected_inter(u) / s.length, p_s)
            for u in s.roots
        }
    cfo_base = {}
    if any(d.startswith("cfo_aware") for d in detectors):
        case = analytic.case_for(s, sigma_w, "pc")
        cfo_base = {
            u: base_scale
            * analytic.threshold(case, analytic.SIGMA_H2 * s.expected_inter(u) / s.length, p_s)
            for u in s.roots
        }
    profiles = {u: device_profiles(s, u) for u in s.roots}
    refs = {u: reference_spectrum(u, s.length) for u in s.roots}
    peaks = s.true_peaks()
    return _PointSetup(
        s=s,
        snr_db=snr_db,
        point_idx=point_idx,
        seed=seed,
        detectors=detectors,
        combiners=combiners,
        sigma_w=sigma_w,
        p_fa_sample=p_s,
        base_thresholds=base_thresholds,
        cfo_base_thresholds=cfo_base,
        profiles=profiles,
        ref_spectra=refs,
        true_peak_lags={u: tuple(sorted(peaks[u])) for u in s.roots},
        device_peaks=tuple((d.root, s.device_peak_lag(d)) for d in s.devices),
        ctx=ctx,
    )


def _simulate_chunk(setup: _PointSetup, chunk_idx: int, n_occ: int) -> dict:
    s = setup.s
    l = s.length
    n_dev = len(s.devices)
    rng = rng_stream(setup.seed, setup.point_idx, chunk_idx)

    if s.coherence == "identical":
        g = rng.standard_normal((n_occ, n_dev, 1, s.n_ant, 2))
        g = np.repeat(g, s.n_rep, axis=2)
    else:
        g = rng.standard_normal((n_occ, n_dev, s.n_rep, s.n_ant, 2))
    h = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
    w = rng.standard_normal((n_occ, s.n_rep, s.n_ant, l, 2))
    noise = setup.sigma_w * (w[..., 0] + 1j * w[..., 1])

    psi = {}  # (combiner, root) -> (n_occ, l) float
    need_cc = "cc" in setup.combiners
    for u in s.roots:
        phi = np.fft.ifft(noise * np.conj(setup.ref_spectra[u])[None, None, None, :], axis=-1)
        if n_dev:
            phi = phi + np.einsum("ogma,gk->omak", h, setup.profiles[u])
        psi[("pc", u)] = np.sum(np.abs(phi) ** 2, axis=(1, 2))
        if need_cc:
            psi[("cc", u)] = np.sum(np.abs(np.sum(phi, axis=1)) ** 2, axis=1)
        del phi

    tallies = {}
    for det_name in setup.detectors:
        if det_name == "baseline":
            for comb in setup.combiners:
                key = (det_name, comb)
                masks = {
                    u: psi[(comb, u)] > setup.base_thresholds[comb][u] for u in s.roots
                }
                tallies[key] = _tally_from_masks(setup, masks, n_occ)
        elif det_name == "conventional":
            n_df = s.n_ant * s.n_rep
            beta = detect.floor_scale(setup.p_fa_sample, n_df)
            masks = {}
            for u in s.roots:
                p = psi[("pc", u)]
                floor = (np.sum(p, axis=1, keepdims=True) - p) / (l - 1)
                masks[u] = p > beta * floor
            tallies[(det_name, "pc")] = _tally_from_masks(setup, masks, n_occ)
        else:  # cfo_aware / cfo_aware_adapted
            tallies[(det_name, "pc")] = _tally_cfo_aware(setup, psi, n_occ)
    return {"n": n_occ, "tallies": tallies}


def _tally_from_masks(setup: _PointSetup, masks: dict, n_occ: int) -> DetectorTally:
    s = setup.s
    detections = np.zeros(len(s.devices), dtype=np.int64)
    for i, (u, k_t) in enumerate(setup.device_peaks):
        detections[i] = int(np.sum(masks[u][:, k_t]))
    fa_any = np.zeros(n_occ, dtype=bool)
    fa_lags = 0
    for u in s.roots:
        fa_mask = masks[u].copy()
        if setup.true_peak_lags[u]:
            fa_mask[:, list(setup.true_peak_lags[u])] = False
        fa_any |= fa_mask.any(axis=1)
        fa_lags += int(fa_mask.sum())
    return DetectorTally(
        n=n_occ, fa_occasions=int(fa_any.sum()), fa_lags=fa_lags, detections=detections
    )


def _tally_cfo_aware(setup: _PointSetup, psi: dict, n_occ: int) -> DetectorTally:
    from scipy import special

    s = setup.s
    ctx = setup.ctx
    case = analytic.case_for(s, setup.sigma_w, "pc")
    gamma = float(special.gammainccinv(case.n_ant * case.n_rep, setup.p_fa_sample))
    two_sz2 = 2.0 * case.sigma_z2

    cand_masks = {u: psi[("pc", u)] > setup.cfo_base_thresholds[u] for u in s.roots}
    any_cand = np.zeros(n_occ, dtype=bool)
    for u in s.roots:
        any_cand |= cand_masks[u].any(axis=1)

    detections = np.zeros(len(s.devices), dtype=np.int64)
    fa_occasions = 0
    fa_lags = 0
    peak_set = {u: set(setup.true_peak_lags[u]) for u in s.roots}
    for idx in np.nonzero(any_cand)[0]:
        classified = {}
        for u in s.roots:
            lags = np.nonzero(cand_masks[u][idx])[0]
            if len(lags):
                classified[u] = detect._group_candidates(
                    psi[("pc", u)][idx], lags, ctx.d_by_root[u]
                )
            else:
                classified[u] = {}
        kept = [
            (u, lag)
            for u in s.roots
            for lag, cls in classified[u].items()
            if cls == detect.TRUE_CANDIDATE
        ]
        rank = {peak: (psi[("pc", peak[0])][idx][peak[1]], -peak[0], -peak[1]) for peak in kept}
        accepted = {u: [] for u in s.roots}
        for u, lag in kept:
            sigma2 = 0.0
            for peak in kept:
                if rank[peak] > rank[(u, lag)]:
                    sigma2 += ctx.interference_at(peak, u, lag)
            if psi[("pc", u)][idx][lag] >= (two_sz2 + sigma2) * gamma:
                accepted[u].append(lag)
        occ_fa = 0
        for u in s.roots:
            for lag in accepted[u]:
                if lag not in peak_set[u]:
                    occ_fa += 1
        fa_lags += occ_fa
        if occ_fa:
            fa_occasions += 1
        for i, (u, k_t) in enumerate(setup.device_peaks):
            if k_t in accepted[u]:
                detections[i] += 1
    return DetectorTally(
        n=n_occ, fa_occasions=fa_occasions, fa_lags=fa_lags, detections=detections
    )


def _chunk_worker(args) -> dict:
    setup, chunk_idx, n_occ = args
    return _simulate_chunk(setup, chunk_idx, n_occ)


# ---------------------------------------------------------------------------
# point and scenario runners
# ---------------------------------------------------------------------------


@dataclass
class PointResult:
    snr_db: float
    tallies: dict  # (detector, combiner) -> DetectorTally
    base_scale: float = 1.0


def simulate_point(
    s: Scenario,
    snr_db: float,
    point_idx: int,
    occasions: int,
    detectors: tuple,
    combiners: tuple,
    jobs: int = 1,
    seed: Optional[int] = None,
    base_scale: float = 1.0,
    ctx: Optional[detect.CfoDetectorContext] = None,
) -> PointResult:
    s.require_valid()
    seed = s.seed if seed is None else seed
    if any(d.startswith("cfo_aware") for d in detectors):
        case = analytic.case_for(s, noise_sigma_from_snr(snr_db), "pc")
        if case.coherence != "independent" and case.n_rep != 1:
            raise analytic.UnsupportedCaseError(
                "the offset-aware detector needs independent repetition channels"
            )
        if ctx is None:
            ctx = detect.CfoDetectorContext.build(s)
    setup = _build_point_setup(
        s, snr_db, point_idx, seed, tuple(detectors), tuple(combiners), base_scale, ctx
    )
    size = _chunk_size(s, occasions)
    bounds = list(range(0, occasions, size))
    tasks = [(setup, i, min(size, occasions - start)) for i, start in enumerate(bounds)]
    merged = {}
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_chunk_worker, tasks, chunksize=1))
    else:
        results = [_chunk_worker(t) for t in tasks]
    for res in results:
        for key, tally in res["tallies"].items():
            if key in merged:
                merged[key].merge(tally)
            else:
                merged[key] = tally
    return PointResult(snr_db=snr_db, tallies=merged, base_scale=base_scale)


def _analytic_p_td(s: Scenario, detector: str, combiner: str, sigma_w: float,
                   base_scale: float) -> Optional[float]:
    """Closed-form detection probability of the first device, when derivable."""
    if not s.devices:
        return None
    if detector == "conventional":
        return None
    target = s.devices[0]
    case = analytic.case_for(s, sigma_w, combiner)
    p_s = fa_budget(s.p_fa_des, len(s.roots), s.length)
    has_cfo = any(d.cfo != 0.0 for d in s.devices)
    if detector.startswith("cfo_aware") or has_cfo:
        if combiner != "pc" or (case.coherence != "independent" and case.n_rep != 1):
            return None
        tset = analytic.threshold_set(s, target.root, case, p_s, base_scale=base_scale)
        if detector == "baseline":
            # fixed threshold only, no per-lag component
            k_t = s.device_peak_lag(target)
            prof = analytic.variance_profile(s, target.root, "H1", "exact-cfo", target=target)
            return analytic.ccdf_psi(case, float(prof.sigma2[k_t]), tset.base)
        return analytic.p_td_cfo(s, target, {target.root: tset}, case)
    sigma2_h0 = analytic.SIGMA_H2 * s.expected_inter(target.root) / s.length
    sigma2_h1 = analytic.SIGMA_H2 * (1.0 + len(s.interferers(target.root)) / s.length)
    thr = base_scale * analytic.threshold(case, sigma2_h0, p_s)
    return analytic.p_td(case, sigma2_h1, thr)


def _analytic_p_fa(s: Scenario, detector: str, combiner: str, sigma_w: float,
                   base_scale: float, cfo_fa_mc: int) -> Optional[float]:
    """Closed-form occasion false alarm, when derivable."""
    has_cfo = any(d.cfo != 0.0 for d in s.devices)
    p_s = fa_budget(s.p_fa_des, len(s.roots), s.length)
    if detector == "baseline" and not has_cfo:
        # every non-peak cell exceeds with exactly the budget probability
        # when the expected interference matches the population
        exact = all(s.expected_inter(u) == len(s.interferers(u)) for u in s.roots)
        if not exact or base_scale != 1.0:
            return None
        cells = len(s.roots) * s.length - len(s.devices)
        return float(-np.expm1(cells * np.log1p(-p_s)))
    if detector.startswith("cfo_aware"):
        case = analytic.case_for(s, sigma_w, "pc")
        if case.coherence != "independent" and case.n_rep != 1:
            return None
        if cfo_fa_mc <= 0:
            return None
        return analytic.predicted_total_pfa(
            s, case, p_s, base_scale=base_scale, n_mc=cfo_fa_mc
        )
    return None


def run_scenario(
    s: Scenario,
    detectors: tuple,
    occasions: int,
    combiners: tuple = ("pc",),
    jobs: int = 1,
    seed: Optional[int] = None,
    cfo_fa_mc: int = 20_000,
) -> ExperimentResult:
    """Simulate every SNR point of a scenario and assemble result rows.

    ``cfo_aware_adapted`` recomputes, per SNR point, the base-threshold
    scale that returns the predicted total false alarm to the target
    before simulating.  Set ``cfo_fa_mc=0`` to skip the semi-analytic
    false-alarm columns for offset scenarios (they cost a Monte Carlo
    integral per point).
    """
    s.require_valid()
    seed = s.seed if seed is None else seed
    result = ExperimentResult()
    ctx = None
    if any(d.startswith("cfo_aware") for d in detectors):
        ctx = detect.CfoDetectorContext.build(s)
    plain = tuple(d for d in detectors if d != "cfo_aware_adapted")
    adapted = "cfo_aware_adapted" in detectors
    for point_idx, snr_db in enumerate(s.snr_db_grid):
        sigma_w = noise_sigma_from_snr(snr_db)
        batches = []  # (detector tuple, combiners, base_scale, point_idx key)
        if plain:
            combs = combiners if "baseline" in plain else ("pc",)
            if "pc" not in combs:
                combs = ("pc",) + combs
            batches.append((plain, combs, 1.0, point_idx))
        if adapted:
            case = analytic.case_for(s, sigma_w, "pc")
            p_s = fa_budget(s.p_fa_des, len(s.roots), s.length)
            scale = analytic.adapt_base_threshold_scale(s, case, p_s)
            batches.append((("cfo_aware_adapted",), ("pc",), scale, point_idx))
        for dets, combs, base_scale, pidx in batches:
            point = simulate_point(
                s, snr_db, pidx, occasions, dets, combs,
                jobs=jobs, seed=seed, base_scale=base_scale, ctx=ctx,
            )
            for (det_key, comb), tally in sorted(point.tallies.items()):
                if det_key == "baseline" and comb not in combiners:
                    continue
                if det_key != "baseline" and comb != "pc":
                    continue
                rows = _rows_for_tally(
                    s, snr_db, det_key, comb, tally, sigma_w, seed, base_scale, cfo_fa_mc
                )
                result.extend(rows)
    return result


def _rows_for_tally(
    s: Scenario,
    snr_db: float,
    detector: str,
    combiner: str,
    tally: DetectorTally,
    sigma_w: float,
    seed: int,
    base_scale: float,
    cfo_fa_mc: int,
) -> list:
    rows = []
    if s.devices:
        k = int(tally.detections[0])
        lo, hi = wilson_ci(k, tally.n)
        rows.append(
            ResultRow(
                scenario_id=s.name,
                snr_db=snr_db,
                detector=detector,
                combiner=combiner,
                coherence=s.coherence,
                metric="p_td",
                analytic=_analytic_p_td(s, detector, combiner, sigma_w, base_scale),
                empirical=k / tally.n,
                ci_low=lo,
                ci_high=hi,
                n_occasions=tally.n,
                seed=seed,
            )
        )
    lo, hi = wilson_ci(tally.fa_occasions, tally.n)
    rows.append(
        ResultRow(
            scenario_id=s.name,
            snr_db=snr_db,
            detector=detector,
            combiner=combiner,
            coherence=s.coherence,
            metric="p_fa",
            analytic=_analytic_p_fa(s, detector, combiner, sigma_w, base_scale, cfo_fa_mc),
            empirical=tally.fa_occasions / tally.n,
            ci_low=lo,
            ci_high=hi,
            n_occasions=tally.n,
            seed=seed,
        )
    )
    return rows


def run(plan: RunPlan) -> ExperimentResult:
    s = load_scenario(plan.scenario_path)
    if plan.seed is not None:
        s = replace(s, seed=plan.seed)
    result = run_scenario(
        s, plan.detectors, plan.occasions, combiners=plan.combiners, jobs=plan.jobs
    )
    if plan.out:
        result.write_csv(plan.out)
    return result


# ---------------------------------------------------------------------------
# device assignment helper and the figure suite
# ---------------------------------------------------------------------------


def assign_random_devices(
    s: Scenario, n_per_root: dict, rng: np.random.Generator, cfo: float = 0.0
) -> Scenario:
    """Populate a scenario with collision-free uniformly drawn preambles."""
    devices = []
    n_pre = s.length // s.n_cs
    for u, count in n_per_root.items():
        if count > n_pre:
            raise ValueError(f"root {u}: {count} devices but only {n_pre} preambles")
        for v in rng.choice(n_pre, size=count, replace=False):
            devices.append(Device(root=u, cs_index=int(v), cfo=cfo))
    return replace(s, devices=tuple(devices))


_ROOTS_139 = (51, 138)
_ROOTS_839 = (51, 838)


def _base_scenario(fmt: str, coherence: str, n_ant: int, devices, snr_grid, name: str,
                   seed: int = 20_240) -> Scenario:
    from .scenario import prach_format

    f = prach_format(fmt)
    roots = _ROOTS_139 if f.length == 139 else _ROOTS_839
    return Scenario(
        format=f,
        roots=roots,
        n_cs=13,
        devices=tuple(devices),
        n_ant=n_ant,
        coherence=coherence,
        snr_db_grid=tuple(snr_grid),
        p_fa_des=1e-3,
        seed=seed,
        name=name,
    ).require_valid()


def _snr_grid(start: float, stop: float, step: float) -> tuple:
    n = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(n))


def figure_suite(name: str, occasions: int, jobs: int = 1, cfo_fa_mc: int = 20_000) -> ExperimentResult:
    """Run one of the predefined experiment suites (fig4 .. fig11)."""
    target = Device(root=51, cs_index=2, cfo=0.0, label="target")
    target_cfo = Device(root=51, cs_index=2, cfo=0.3, label="target")
    inter = Device(root=138, cs_index=3, cfo=0.0, label="interferer")
    inter_cfo = Device(root=138, cs_index=3, cfo=0.3, label="interferer")

    result = ExperimentResult()
    if name == "fig4":
        for fmt in ("B1", "B2"):
            for coh in ("independent", "identical"):
                for n_ant in (1, 2, 4, 8):
                    s = _base_scenario(
                        fmt, coh, n_ant, [target], (-20.0,),
                        name=f"fig4-{fmt}-{coh}-ant{n_ant}",
                    )
                    result.extend(
                        run_scenario(s, ("baseline",), occasions,
                                     combiners=("pc", "cc"), jobs=jobs).rows
                    )
    elif name in ("fig5", "fig6"):
        devices = [target] if name == "fig5" else [target, inter]
        for coh in ("independent", "identical"):
            s = _base_scenario("B1", coh, 1, devices, _snr_grid(-30, 0, 2),
                               name=f"{name}-B1-{coh}")
            result.extend(
                run_scenario(s, ("baseline",), occasions,
                             combiners=("pc", "cc"), jobs=jobs).rows
            )
    elif name in ("fig7", "fig8", "fig9"):
        # fig7 reads the p_td rows, fig8/fig9 the p_fa rows of the same runs
        fmts = ("C0", "0") if name == "fig7" else (("C0",) if name == "fig8" else ("0",))
        for fmt in fmts:
            grid = _snr_grid(-30, 10, 2) if fmt == "C0" else _snr_grid(-36, 4, 2)
            cases = [
                ("eps0", [target]),
                ("eps03", [target_cfo]),
                ("eps03-inter1", [target_cfo, inter_cfo]),
            ]
            for tag, devices in cases:
                s = _base_scenario(fmt, "independent", 1, devices, grid,
                                   name=f"{name}-{fmt}-{tag}")
                result.extend(
                    run_scenario(s, ("cfo_aware", "conventional"), occasions,
                                 combiners=("pc",), jobs=jobs, cfo_fa_mc=cfo_fa_mc).rows
                )
    elif name in ("fig10", "fig11"):
        grid = _snr_grid(-30, 10, 2)
        for n_ant in (1, 2, 4, 8):
            s = _base_scenario("C0", "independent", n_ant, [target_cfo, inter_cfo],
                               grid, name=f"{name}-C0-ant{n_ant}")
            dets = ("cfo_aware", "cfo_aware_adapted") if n_ant == 2 else ("cfo_aware",)
            result.extend(
                run_scenario(s, dets, occasions, combiners=("pc",), jobs=jobs,
                             cfo_fa_mc=cfo_fa_mc).rows
            )
    else:
        raise ValueError(f"unknown figure {name!r}; expected fig4 .. fig11")
    return result
