"""Command-line front end.

Subcommands dispatch straight into the library; the CLI itself adds no
arithmetic.  Exit codes: 0 success, 1 violated library precondition (one-line
diagnostic on stderr), 2 usage errors.  Floating-point output uses repr
formatting, which round-trips exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, harness, normalization
from .harness import ExperimentConfig
from .simulator import SeedSpec, load_field, reconstruct_sheet, sample_increment_field, save_field
from .variations import normalized_variation

OUTPUT_DIR_ENV = "FBSHEET_OUTPUT_DIR"


def _out_path(name: str | None, config: ExperimentConfig | None = None) -> Path:
    if name is None and config is not None:
        name = harness.default_report_name(config)
    base = os.environ.get(OUTPUT_DIR_ENV, "")
    p = Path(name)
    if base and not p.is_absolute():
        return Path(base) / p
    return p


def _parse_grids(text: str) -> tuple:
    grids = []
    for tok in text.split(","):
        tok = tok.strip()
        if "x" in tok:
            n, m = tok.split("x")
            grids.append((int(n), int(m)))
        else:
            grids.append((int(tok), int(tok)))
    return tuple(grids)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, required=True, help="first-axis Hurst exponent in (0,1)")
    p.add_argument("--beta", type=float, required=True, help="second-axis Hurst exponent in (0,1)")
    p.add_argument("--q", type=int, default=2, help="Hermite order (integer >= 2; default 2)")
    p.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit; default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="cap on harness parallelism (default: machine parallelism)")
    p.add_argument("--no-timing", action="store_true",
                   help="write zero wall times for byte-reproducible reports")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fbsheet",
        description="Fractional Brownian sheet simulation and Hermite-variation verification.",
    )
    ap.add_argument("--version", action="version", version=f"fbsheet {__version__} ({harness._git_hash()})")
    ap.add_argument("--config", type=str, default=None,
                    help="JSON file whose keys mirror the flags; explicit flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample one increment field and dump it in binary form")
    _add_common(p)
    p.add_argument("--n", type=int, required=True, help="rows (first axis)")
    p.add_argument("--m", type=int, required=True, help="columns (second axis)")
    p.add_argument("--stream", type=int, default=0, help="replication stream index (default 0)")
    p.add_argument("--out", type=str, required=True, help="output .bin path")

    p = sub.add_parser("variations", help="Hermite variation report of a stored field")
    p.add_argument("--in", dest="infile", type=str, required=True, help="binary field path")
    p.add_argument("--q", type=int, default=2, help="Hermite order (default 2)")

    p = sub.add_parser("constants", help="print the limit constant governing gamma's regime")
    p.add_argument("--gamma", type=float, required=True, help="Hurst exponent in (0,1)")
    p.add_argument("--q", type=int, default=2, help="Hermite order (default 2)")
    p.add_argument("--tol", type=float, default=1e-12,
                   help="certified absolute error for the series constant (default 1e-12)")

    p = sub.add_parser("verify-clt", help="Monte Carlo normality check in the Gaussian regimes")
    _add_common(p)
    p.add_argument("--grids", type=str, required=True, help="comma list of N or NxM, e.g. 32,64,128")
    p.add_argument("--reps", type=int, required=True, help="replications per grid")
    p.add_argument("--out", type=str, default=None, help="report CSV path (default: derived name)")
    p.add_argument("--samples-out", type=str, default=None,
                   help="also write the finest grid's normalized variations as CSV")

    p = sub.add_parser("verify-noncentral", help="exact/MC study of the Hermite-regime convergence")
    _add_common(p)
    p.add_argument("--grids", type=str, required=True, help="dyadically nested list, e.g. 64,128,256")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("covariance", help="partial-sum covariances vs the Hermite sheet kernel")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--points", type=str, default=None,
                   help="semicolon list of t,s pairs, e.g. '1,1;0.5,0.5' (default: built-in five)")
    p.add_argument("--out", type=str, default=None)

    p = sub.add_parser("estimate-hurst", help="recover (alpha, beta) from a simulated sheet")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--scales", type=int, default=3, help="dyadic scales per axis (default 3)")

    return ap


def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand --config file values into flags; explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    with open(path, "r", encoding="utf-8") as fh:
        loaded = json.load(fh)
    injected: list[str] = []
    for key, value in loaded.items():
        flag = f"--{key.replace('_', '-')}"
        if flag in argv:
            continue
        if isinstance(value, bool):
            if value:
                injected.append(flag)
        else:
            injected.extend([flag, str(value)])
    # flags come after the subcommand; --config itself stays harmless
    return argv + injected


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(argv)
    except (OSError, json.JSONDecodeError, IndexError) as exc:
        print(f"fbsheet: bad --config file: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except (ValueError, OSError) as exc:
        print(f"fbsheet: {exc}", file=sys.stderr)
        return 1


def _config_from(args, kind: str, grids) -> ExperimentConfig:
    return ExperimentConfig(
        alpha=args.alpha,
        beta=args.beta,
        q=args.q,
        grid_sizes=grids,
        replications=getattr(args, "reps", 1),
        master_seed=args.seed,
        experiment_kind=kind,
        threads=args.threads,
        measure_time=not args.no_timing,
    )


def _dispatch(args) -> int:
    if args.command == "simulate":
        f = sample_increment_field(args.alpha, args.beta, args.n, args.m,
                                   SeedSpec(args.seed, args.stream))
        save_field(f, _out_path(args.out))
        print(f"wrote {args.n}x{args.m} field to {_out_path(args.out)}")
        return 0

    if args.command == "variations":
        f = load_field(args.infile)
        rep = normalized_variation(f, args.q)
        print("V,tildeV,phi,case,axes_swapped,N,M,q")
        print(
            f"{rep.V!r},{rep.tildeV!r},{rep.phi_used!r},{rep.regime.case_id},"
            f"{rep.regime.axes_swapped},{rep.N},{rep.M},{rep.q}"
        )
        return 0

    if args.command == "constants":
        thr = normalization.regime_threshold(args.q)
        if args.gamma < thr:
            c = normalization.s_gamma(args.gamma, args.q, args.tol)
            print(f"s_gamma,{c.value!r},{c.abs_error_bound!r}")
        elif args.gamma == thr:
            c = normalization.iota(args.q)
            print(f"iota,{c.value!r},{c.abs_error_bound!r}")
        else:
            c = normalization.kappa(args.gamma, args.q)
            print(f"kappa,{c.value!r},{c.abs_error_bound!r}")
        return 0

    if args.command == "verify-clt":
        config = _config_from(args, "clt", _parse_grids(args.grids))
        rows = harness.run_clt_experiment(config)
        out = _out_path(args.out, config)
        harness.write_report_csv(out, config, rows)
        harness.write_metadata_json(out.with_suffix(".json"), config)
        if args.samples_out is not None:
            n, m = config.grid_sizes[-1]
            def one(rep):
                f = sample_increment_field(config.alpha, config.beta, n, m,
                                           SeedSpec(config.master_seed, rep))
                return normalized_variation(f, config.q).tildeV
            samples = [one(rep) for rep in range(config.replications)]
            harness.write_samples_csv(_out_path(args.samples_out), config, (n, m), samples)
        for r in rows:
            print(f"N={r.N} M={r.M} ks={r.ks_distance:.4f} var={r.sample_variance:.4f}")
        print(f"wrote {out}")
        return 0

    if args.command == "verify-noncentral":
        config = _config_from(args, "noncentral", _parse_grids(args.grids))
        report = harness.run_noncentral_study(config)
        out = _out_path(args.out, config)
        harness.write_report_csv(out, config, report.rows)
        harness.write_metadata_json(
            out.with_suffix(".json"),
            config,
            extra={"noncentral_exact": report.exact_levels, "noncentral_cross": report.cross_levels},
        )
        for lev in report.exact_levels:
            print(
                f"N={lev['N']} q!*||h||^2={lev['qfact_h_norm_sq']:.6f} "
                f"step_diff_sq={lev['step_diff_sq']}"
            )
        print(f"wrote {out}")
        return 0

    if args.command == "covariance":
        config = _config_from(args, "noncentral", ((args.n, args.m),))
        points = None
        if args.points:
            points = [tuple(float(v) for v in tok.split(",")) for tok in args.points.split(";")]
        report = harness.covariance_check(config, points)
        if args.out is not None:
            harness.write_covariance_csv(_out_path(args.out), config, report)
        for p in report.pairs:
            print(
                f"({p.p1[0]:g},{p.p1[1]:g})x({p.p2[0]:g},{p.p2[1]:g}): "
                f"mc={p.mc_cov:.5f} exact={p.exact_cov:.5f} se={p.mc_se:.5f}"
            )
        print(f"max_abs_dev={report.max_abs_dev!r}")
        return 0

    if args.command == "estimate-hurst":
        f = sample_increment_field(args.alpha, args.beta, args.n, args.m, SeedSpec(args.seed, 0))
        sheet = reconstruct_sheet(f)
        a_hat, b_hat = harness.estimate_hurst(sheet, levels=args.scales)
        print(f"alpha_hat,{a_hat!r}")
        print(f"beta_hat,{b_hat!r}")
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
