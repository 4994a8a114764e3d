"""Command-line entry points.

    prach-lab run --scenario occasion.txt --occasions 100000 --out results.csv
    prach-lab figure fig5 --occasions 100000 --out results/
    prach-lab selftest
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np


def _cmd_run(args) -> int:
    from .harness import RunPlan, run

    plan = RunPlan(
        scenario_path=args.scenario,
        detectors=tuple(args.detectors.split(",")),
        occasions=args.occasions,
        out=args.out,
        jobs=args.jobs,
        seed=args.seed,
        combiners=tuple(args.combiners.split(",")),
    )
    t0 = time.time()
    result = run(plan)
    dt = time.time() - t0
    print(f"{len(result.rows)} rows in {dt:.1f} s" + (f" -> {args.out}" if args.out else ""))
    if not args.out:
        for r in result.rows:
            ana = "" if r.analytic is None else f"{r.analytic:.6g}"
            print(
                f"{r.scenario_id} snr={r.snr_db:g} {r.detector}/{r.combiner} "
                f"{r.metric}: emp={r.empirical:.6g} [{r.ci_low:.6g}, {r.ci_high:.6g}]"
                + (f" ana={ana}" if ana else "")
            )
    return 0


def _cmd_figure(args) -> int:
    from .harness import figure_suite

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    result = figure_suite(args.name, args.occasions, jobs=args.jobs)
    path = out_dir / f"{args.name}.csv"
    result.write_csv(path)
    print(f"{args.name}: {len(result.rows)} rows in {time.time() - t0:.1f} s -> {path}")
    return 0


def _check(name: str, ok: bool, detail: str = "") -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    return ok


def _cmd_selftest(_args) -> int:
    from math import gcd

    from scipy import stats

    from . import analytic, specfun
    from .correlation import circ_corr, closed_form_cfo_corr
    from .zadoffchu import apply_cfo, cyclic_shift, dft, idft, zc_root

    ok = True
    rng = np.random.default_rng(7)

    # correlation identities
    l = 139
    x = cyclic_shift(zc_root(51, l), 26)
    prof = circ_corr(x.samples, zc_root(51, l).samples).values
    peak = (l - 26) % l
    delta_ok = abs(prof[peak] - 1.0) < 1e-12 and np.max(
        np.abs(np.delete(prof, peak))
    ) < 1e-12
    ok &= _check("same-root delta identity", bool(delta_ok))
    cross = circ_corr(zc_root(51, l).samples, zc_root(138, l).samples).values
    ok &= _check(
        "cross-root constant magnitude",
        bool(np.max(np.abs(np.abs(cross) - 1 / np.sqrt(l))) < 1e-12),
    )

    # closed form vs brute force
    worst = 0.0
    for _ in range(10):
        u_g, u_0 = (int(v) for v in rng.integers(1, l, 2))
        if gcd(u_g, l) != 1 or gcd(u_0, l) != 1:
            continue
        shift = int(rng.integers(0, l))
        eps = float(rng.uniform(-0.5, 0.5))
        seq = apply_cfo(cyclic_shift(zc_root(u_g, l), shift), eps)
        direct = circ_corr(seq, zc_root(u_0, l).samples).values
        closed = closed_form_cfo_corr(u_g, shift, eps, u_0, l).values
        worst = max(worst, float(np.max(np.abs(closed - direct))))
    ok &= _check("closed-form offset correlation", worst < 1e-9, f"max err {worst:.2e}")

    # transforms and gamma inverses
    z = rng.standard_normal(l) + 1j * rng.standard_normal(l)
    ok &= _check("transform round trip", bool(np.max(np.abs(idft(dft(z)) - z)) < 1e-12))
    a, p = 4.0, 3.5987e-6
    x_inv = specfun.inv_upper_inc_gamma_reg(a, p)
    ok &= _check(
        "incomplete gamma round trip",
        abs(specfun.upper_inc_gamma_reg(a, x_inv) - p) <= 1e-10 * p,
    )
    mq = specfun.marcum_q(1, 1.5, 2.0)
    mq_ref = float(stats.ncx2.sf(4.0, 2, 2.25))
    ok &= _check("marcum Q", abs(mq - mq_ref) < 1e-12, f"{mq:.12f} vs {mq_ref:.12f}")

    mix = specfun.GeneralizedChiSquareMix(alpha=2, beta=2, scale_x=1.0, scale_lambda=3.0)
    red = specfun.ScaledChiSquare(dof_half=2, scale=4.0)
    grid = np.linspace(0.1, 40, 25)
    err = max(abs(mix.cdf(v) - red.cdf(v)) for v in grid)
    ok &= _check("mixture alpha=beta reduction", err < 1e-12, f"max err {err:.2e}")

    # threshold round trips for the four combiner/coherence cases
    worst = 0.0
    for comb in ("pc", "cc"):
        for coh in ("independent", "identical"):
            case = analytic.CaseParams(comb, coh, n_ant=2, n_rep=2, sigma_z2=0.01)
            thr = analytic.threshold(case, 0.05, 3.6e-6)
            worst = max(worst, abs(analytic.ccdf_psi(case, 0.05, thr) / 3.6e-6 - 1.0))
    ok &= _check("threshold round trips", worst < 1e-9, f"max rel err {worst:.2e}")

    # null statistic matches its chi-square law
    from .scenario import Scenario, prach_format
    from .harness import simulate_point

    s = Scenario(
        format=prach_format("C0"), roots=(51, 138), n_cs=13, devices=(),
        n_ant=1, coherence="independent", snr_db_grid=(0.0,), p_fa_des=1e-3,
        seed=11, name="selftest-h0",
    ).require_valid()
    point = simulate_point(s, 0.0, 0, 20_000, ("baseline",), ("pc",))
    tally = point.tallies[("baseline", "pc")]
    p_occ = tally.fa_occasions / tally.n
    expect = 1.0 - (1.0 - 3.5987e-6) ** (2 * 139)
    sigma = np.sqrt(expect * (1 - expect) / tally.n)
    ok &= _check(
        "null false-alarm calibration", abs(p_occ - expect) < 4 * sigma,
        f"emp {p_occ:.2e} vs {expect:.2e}",
    )

    print("selftest:", "OK" if ok else "FAILED")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="prach-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario file")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--occasions", type=int, default=100_000)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--detectors", default="baseline")
    p_run.add_argument("--combiners", default="pc,cc")
    p_run.set_defaults(func=_cmd_run)

    p_fig = sub.add_parser("figure", help="run a predefined experiment suite")
    p_fig.add_argument("name", choices=[f"fig{i}" for i in range(4, 12)])
    p_fig.add_argument("--occasions", type=int, default=100_000)
    p_fig.add_argument("--out", default="results")
    p_fig.add_argument("--jobs", type=int, default=1)
    p_fig.set_defaults(func=_cmd_figure)

    p_self = sub.add_parser("selftest", help="run the built-in oracle checks")
    p_self.set_defaults(func=_cmd_selftest)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
