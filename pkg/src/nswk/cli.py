"""Command-line interface: ``nswk <subcommand> ...``.

Exit codes: 0 on success, 1 for input errors, 2 for invariant violations.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io as nio
from .experiments import ExperimentConfig, parse_profile, run_bench, run_fig1, run_fig2
from .model import InvariantViolation, NswkError, dft_grid, make_filter
from .sampling import SamplingPlan, fractional_bandwidth, make_plan, reconstruction_mse, sinc_reconstruct, subsample
from .spectral import (
    averaged_autocorrelation,
    check_assumptions,
    estimate_autocorrelation,
    estimate_generalized_psd,
    estimate_psd,
    max_abs_autocorrelation,
    verify_wk_convergence,
)
from .synthesis import TemporalModel, synthesize

log = logging.getLogger("nswk")


def _floats(text: str) -> list[float]:
    text = text.strip()
    return [float(t) for t in text.split(",") if t.strip()] if text else []


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _sizes(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.split(","):
        p, _, t = tok.strip().partition("x")
        out.append((int(p), int(t)))
    return out


def _out_path(args, default: str) -> Path:
    out = Path(getattr(args, "out", None) or default)
    if out.suffix == "":
        out.mkdir(parents=True, exist_ok=True)
        return out / default
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args) -> ExperimentConfig:
    doc = {}
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
    overrides = {
        "K": args.K,
        "P": args.P,
        "ar": _floats(args.ar) if args.ar is not None else None,
        "ma": _floats(args.ma) if args.ma is not None else None,
        "profile": args.profile,
        "temporal": args.temporal,
        "windows": _ints(args.windows) if args.windows else None,
        "fraction": args.fraction,
        "seed": getattr(args, "seed", None),
        "out_dir": getattr(args, "out", None),
        "warmup": args.warmup,
        "bandwidth_source": args.bandwidth_source,
        "threads": getattr(args, "threads", None),
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(doc)


# --------------------------------------------------------------------------
# subcommand handlers
# --------------------------------------------------------------------------

def cmd_synth(args) -> None:
    cfg = _load_config(args)
    filt = make_filter(cfg.ar, cfg.ma, cfg.truncation_tol)
    profile = parse_profile(cfg.profile, cfg.K + cfg.warmup)
    ens = synthesize(filt, profile, cfg.P, TemporalModel.parse(cfg.temporal), cfg.seed, cfg.warmup, cfg.threads)
    path = _out_path(args, "ensemble.csv")
    nio.write_ensemble(path, ens)
    if args.model_json:
        nio.write_model_json(args.model_json, cfg.ar, cfg.ma, profile.values)
    log.info("wrote %s (P=%d, K=%d)", path, ens.P, ens.K)


def cmd_psd(args) -> None:
    ens = nio.read_ensemble(args.ensemble)
    spec = estimate_psd(ens, args.N, threads=getattr(args, "threads", 1) or 1)
    spec.check()
    nio.write_spectrum(_out_path(args, "psd.csv"), spec)


def cmd_avg_acf(args) -> None:
    ens = nio.read_ensemble(args.ensemble)
    R = estimate_autocorrelation(ens, args.N)
    lag = max_abs_autocorrelation(R) if args.max_abs else averaged_autocorrelation(R, args.normalization)
    nio.write_lag(_out_path(args, "avg_acf.csv"), lag)


def cmd_gen_psd(args) -> None:
    ens = nio.read_ensemble(args.ensemble)
    R = estimate_autocorrelation(ens, args.N)
    grid = dft_grid(args.M) if args.M else None
    bs = estimate_generalized_psd(R, grid, grid)
    nio.write_bispectrum(_out_path(args, "gen_psd.csv"), bs)


def cmd_verify_wk(args) -> None:
    ens = nio.read_ensemble(args.ensemble)
    res = verify_wk_convergence(ens, _ints(args.windows), threads=getattr(args, "threads", 1) or 1)
    path = _out_path(args, "distances.csv")
    with open(path, "w") as fh:
        fh.write("N,sup_distance\n")
        for n, d in res.rows():
            fh.write(f"{n},{d!r}\n")
    for n, d in res.rows():
        print(f"N={n}\tsup_distance={d:.6g}")


def cmd_check(args) -> None:
    ens = nio.read_ensemble(args.ensemble)
    rep = check_assumptions(estimate_autocorrelation(ens))
    nio.write_json(_out_path(args, "assumptions.json"), rep.to_dict())
    print(json.dumps(rep.to_dict()))


def cmd_bandwidth(args) -> None:
    spec = nio.read_spectrum(args.spectrum)
    B = fractional_bandwidth(spec, args.fraction)
    plan = make_plan(B, args.fraction, K=args.K or spec.omegas.size)
    nio.write_json(_out_path(args, "plan.json"), plan.to_dict())
    print(json.dumps(plan.to_dict()))


def _read_plan(path) -> SamplingPlan:
    return SamplingPlan.from_dict(json.loads(Path(path).read_text()))


def cmd_subsample(args) -> None:
    ens = nio.read_ensemble(args.ensemble)
    nio.write_ensemble(_out_path(args, "samples.csv"), subsample(ens, _read_plan(args.plan)))


def cmd_reconstruct(args) -> None:
    samples = nio.read_ensemble(args.samples)
    recon = sinc_reconstruct(samples, _read_plan(args.plan), args.K)
    nio.write_ensemble(_out_path(args, "reconstructed.csv"), recon)


def cmd_mse(args) -> None:
    rep = reconstruction_mse(nio.read_ensemble(args.original), nio.read_ensemble(args.reconstructed))
    nio.write_json(_out_path(args, "mse.json"), rep.to_dict())
    print(f"pooled_mse_percent={rep.pooled:.6g}")


def cmd_experiment(args) -> None:
    cfg = _load_config(args)
    if args.which == "fig1":
        res = run_fig1(cfg)
        for n, d in zip(res["windows"], res["distances"]):
            print(f"N={n}\tsup_distance={d:.6g}")
    else:
        print(json.dumps(run_fig2(cfg), indent=2, sort_keys=True))


def cmd_bench(args) -> None:
    rows = run_bench(_sizes(args.sizes), repeats=args.repeats, seed=getattr(args, "seed", 0) or 0)
    path = _out_path(args, "bench.csv")
    with open(path, "w") as fh:
        fh.write("P,T,psd_seconds,gen_seconds,ratio\n")
        for r in rows:
            fh.write(f"{r.P},{r.T},{r.psd_seconds!r},{r.gen_seconds!r},{r.ratio!r}\n")
    for r in rows:
        print(f"P={r.P}\tT={r.T}\tpsd={r.psd_seconds:.3e}s\tgen={r.gen_seconds:.3e}s\tratio={r.ratio:.1f}")


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--config", help="experiment config JSON", **d)
    p.add_argument("--seed", type=int, help="64-bit seed", **d)
    p.add_argument("--threads", type=int, help="worker threads", **d)
    p.add_argument("--out", help="output file or directory", **d)


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=int)
    p.add_argument("--P", type=int)
    p.add_argument("--ar", help="comma-separated feedback coefficients, e.g. 0.8,0.1")
    p.add_argument("--ma", help="comma-separated feedforward coefficients")
    p.add_argument("--profile", help="paper | const:<v> | file:<path>")
    p.add_argument("--temporal", help="iid | ar1:<rho>")
    p.add_argument("--windows", help="comma-separated window lengths")
    p.add_argument("--fraction", type=float)
    p.add_argument("--warmup", type=int, help="discard this many leading samples")
    p.add_argument("--bandwidth-source", choices=("estimated", "theoretical"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nswk", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("synth", cmd_synth, "synthesize an NS1 ensemble")
    _experiment_flags(p)
    p.add_argument("--model-json", help="also write filter + profile JSON here")

    p = add("psd", cmd_psd, "ensemble periodogram")
    p.add_argument("ensemble")
    p.add_argument("--N", type=int)

    p = add("avg-acf", cmd_avg_acf, "averaged autocorrelation")
    p.add_argument("ensemble")
    p.add_argument("--N", type=int)
    p.add_argument("--normalization", choices=("unbiased", "biased"), default="unbiased")
    p.add_argument("--max-abs", action="store_true", help="emit the maximum absolute autocorrelation instead")

    p = add("gen-psd", cmd_gen_psd, "generalized 2-D PSD")
    p.add_argument("ensemble")
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int, help="size of the centered DFT grid (default K)")

    p = add("verify-wk", cmd_verify_wk, "sup-norm convergence table")
    p.add_argument("ensemble")
    p.add_argument("--windows", required=True)

    p = add("check-assumptions", cmd_check, "boundedness and summability diagnostics")
    p.add_argument("ensemble")

    p = add("bandwidth", cmd_bandwidth, "fractional bandwidth and sampling plan")
    p.add_argument("spectrum")
    p.add_argument("--fraction", type=float, default=0.9)
    p.add_argument("--K", type=int, help="signal length for the decimation cap")

    p = add("subsample", cmd_subsample, "keep every M-th sample")
    p.add_argument("ensemble")
    p.add_argument("--plan", required=True)

    p = add("reconstruct", cmd_reconstruct, "sinc reconstruction")
    p.add_argument("samples")
    p.add_argument("--plan", required=True)
    p.add_argument("--K", type=int)

    p = add("mse", cmd_mse, "normalized reconstruction error")
    p.add_argument("original")
    p.add_argument("reconstructed")

    p = add("experiment", cmd_experiment, "run a figure experiment")
    p.add_argument("which", choices=("fig1", "fig2"))
    _experiment_flags(p)

    p = add("bench", cmd_bench, "PSD vs generalized-PSD timing")
    p.add_argument("--sizes", default="64x256,64x512,64x1024", help="comma-separated PxT pairs")
    p.add_argument("--repeats", type=int, default=5)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (NswkError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
