"""Command-line front end: parameter sweeps with CSV or JSON output.

Subcommands: drf, adx, pcm, critical, simulate.  Every run is deterministic
given its full flag set.  CSV goes to stdout by default; --json emits a
single document with a `meta` block and a `records` array (schema
``adx-lab.v1``).

Exit status: 0 on success, 1 on input errors, 2 on numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .errors import AdxError, ConvergenceError, InputError
from .pcm import CQ_UNIFORM_ENTROPY, pcm_distortion, pcm_optimal_rate
from .sampling import (adx_lower_bound, allocate_branches, allpass,
                       critical_rate, d_si, lpf, mmse_si,
                       ou_critical_rate_closed_form, verify_achievability)
from .simulate import empirical_mmse_si, run_pcm_pipeline, synthesize
from .spectra import Psd, make_psd, total_variance
from .waterfill import shannon_drf

SCHEMA = "adx-lab.v1"


# ---------------------------------------------------------------------------
# Flag micro-syntaxes
# ---------------------------------------------------------------------------

def parse_psd(text: str, f_max=None, grid_step=None) -> Psd:
    """`kind:key=val,key=val`, e.g. flat:W=0.5 | ou:f0=2 | piecewise:file=psd.txt"""
    kind, _, rest = text.partition(":")
    params: dict = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not _ or not key:
                raise InputError(f"malformed PSD parameter {item!r}")
            params[key] = val if key == "file" else float(val)
    if kind in ("tri", "triangle"):
        kind = "triangular"
    if kind == "multimodal" and ("center" in params or "width" in params):
        params = {"lobes": ((params.get("center", 0.35),
                             params.get("width", 0.1)),)}
    return make_psd(kind, params, f_max=f_max, grid_step=grid_step)


def parse_range(text: str) -> list[float]:
    """`start:stop:count`, optional `log:` prefix, or a single number."""
    logspace = text.startswith("log:")
    if logspace:
        text = text[4:]
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise InputError(f"range must be start:stop:count, got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise InputError("range count must be >= 1")
    if logspace:
        if start <= 0 or stop <= 0:
            raise InputError("log range endpoints must be positive")
        return list(np.geomspace(start, stop, count))
    return list(np.linspace(start, stop, count))


# ---------------------------------------------------------------------------
# Output encoding
# ---------------------------------------------------------------------------

def emit(records: list[dict], meta: dict, as_json: bool, stream) -> None:
    if as_json:
        json.dump({"schema": SCHEMA, "meta": meta, "records": records},
                  stream, indent=2)
        stream.write("\n")
        return
    if not records:
        return
    writer = csv.writer(stream, lineterminator="\n")
    cols = list(records[0].keys())
    writer.writerow(cols)
    for rec in records:
        writer.writerow([repr(rec[c]) if isinstance(rec[c], float) else rec[c]
                         for c in cols])


def _meta(args, **extra) -> dict:
    meta = {"tool": "adx-lab", "version": __version__,
            "command": args.command, "psd": args.psd,
            "grid_step": args.grid_step, "f_max": args.f_max}
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_drf(args, psd) -> tuple[list[dict], dict]:
    records = []
    for rate in parse_range(args.rate):
        sol = shannon_drf(psd, rate)
        records.append({
            "R": float(rate), "theta": sol.theta, "distortion": sol.distortion,
            "f_R": sol.active_set.measure,
        })
    return records, _meta(args, rate=args.rate)


def cmd_critical(args, psd) -> tuple[list[dict], dict]:
    records = []
    for rate in parse_range(args.rate):
        rec = {"R": float(rate), "f_R": critical_rate(psd, rate)}
        if psd.kind == "ou":
            rec["f_R_closed_form"] = ou_critical_rate_closed_form(
                psd.params["f0"], rate)
        records.append(rec)
    return records, _meta(args, rate=args.rate)


def cmd_adx(args, psd) -> tuple[list[dict], dict]:
    mode = args.filter
    records = []
    for f_s in parse_range(args.fs):
        f_s = float(f_s)
        if mode == "lpf":
            point = d_si(psd, lpf(f_s / 2), f_s, args.rate)
            branches = 1
        elif mode == "allpass":
            point = d_si(psd, allpass(), f_s, args.rate)
            branches = 1
        elif mode == "optimal":
            point = adx_lower_bound(psd, f_s, args.rate)
            config = allocate_branches(psd, f_s, args.l_max)
            branches = len(config.branches)
        elif mode.startswith("branches:"):
            l_max = int(mode.split(":", 1)[1])
            config = allocate_branches(psd, f_s, l_max)
            point = verify_achievability(psd, config, args.rate)
            branches = len(config.branches)
        else:
            raise InputError(f"unknown filter mode {mode!r}")
        records.append({
            "f_s": f_s, "R": args.rate, "mmse_part": point.mmse_part,
            "lossy_part": point.lossy_part, "total": point.total,
            "branches": branches,
        })
    return records, _meta(args, rate=args.rate, fs=args.fs, filter=mode)


def cmd_pcm(args, psd) -> tuple[list[dict], dict]:
    records = []
    for f_s in parse_range(args.fs):
        point = pcm_distortion(psd, float(f_s), args.rate, args.cq)
        records.append({
            "f_s": float(f_s), "R": args.rate,
            "bits_per_sample": point.bits_per_sample,
            "d_smp": point.d_smp, "d_qnt": point.d_qnt, "total": point.total,
        })
    meta = _meta(args, rate=args.rate, fs=args.fs, c_q=args.cq)
    if args.optimum:
        f_star, best = pcm_optimal_rate(psd, args.rate, args.cq)
        meta["f_s_optimal"] = f_star
        meta["total_at_optimum"] = best.total
    return records, meta


def cmd_simulate(args, psd) -> tuple[list[dict], dict]:
    ensemble = synthesize(psd, args.duration, args.dense_rate, args.trials,
                          args.seed)
    records = []
    for f_s in parse_range(args.fs):
        f_s = float(f_s)
        if args.pipeline == "pcm":
            emp = run_pcm_pipeline(ensemble, psd, f_s, args.rate,
                                   quantizer_mode=args.quantizer)
            analytic = pcm_distortion(psd, f_s, args.rate).total
            records.append({
                "f_s": f_s, "R": args.rate, "empirical": emp.total,
                "stderr": emp.stderr, "d_smp": emp.d_smp, "d_qnt": emp.d_qnt,
                "analytic_pcm": analytic, "trials": emp.trials,
            })
        else:
            est = empirical_mmse_si(ensemble, psd, allpass(), f_s)
            records.append({
                "f_s": f_s, "empirical_mmse": est.value, "stderr": est.stderr,
                "analytic_mmse": mmse_si(psd, allpass(), f_s),
                "trials": est.trials,
            })
    meta = _meta(args, rate=getattr(args, "rate", None), fs=args.fs,
                 trials=args.trials, seed=args.seed, duration=args.duration,
                 dense_rate=args.dense_rate, pipeline=args.pipeline,
                 quantizer=args.quantizer, sigma2=total_variance(psd))
    return records, meta


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adx-lab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--psd", required=True,
                       help="kind:key=val,... e.g. flat:W=0.5, tri:W=0.5, "
                            "ou:f0=1, multimodal:center=0.35,width=0.1, "
                            "piecewise:file=PATH")
        p.add_argument("--grid-step", type=float, default=None, dest="grid_step")
        p.add_argument("--f-max", type=float, default=None, dest="f_max")
        p.add_argument("--json", action="store_true",
                       help="emit one JSON document instead of CSV")

    p = sub.add_parser(
        "drf", help="distortion-rate function sweep over R",
        epilog="CSV columns: R, theta (water level), distortion, "
               "f_R (measure of the preserved band).")
    common(p)
    p.add_argument("--rate", required=True, help="R or start:stop:count")
    p.set_defaults(func=cmd_drf)

    p = sub.add_parser(
        "critical", help="critical sampling rate f_R over R",
        epilog="CSV columns: R, f_R; plus f_R_closed_form for the ou kind.")
    common(p)
    p.add_argument("--rate", required=True, help="R or start:stop:count")
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser(
        "adx", help="sampled-system distortion over f_s",
        epilog="CSV columns: f_s, R, mmse_part, lossy_part, total, "
               "branches (branch count used).")
    common(p)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--fs", required=True, help="f_s or start:stop:count")
    p.add_argument("--filter", default="lpf",
                   help="lpf | allpass | optimal | branches:L")
    p.add_argument("--l-max", type=int, default=8, dest="l_max",
                   help="branch budget used by the 'optimal' mode report")
    p.set_defaults(func=cmd_adx)

    p = sub.add_parser(
        "pcm", help="PCM distortion over f_s",
        epilog="CSV columns: f_s, R, bits_per_sample, d_smp, d_qnt, total.")
    common(p)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--fs", required=True)
    p.add_argument("--cq", type=float, default=CQ_UNIFORM_ENTROPY)
    p.add_argument("--optimum", action="store_true",
                   help="also report the distortion-minimizing f_s in meta")
    p.set_defaults(func=cmd_pcm)

    p = sub.add_parser(
        "simulate", help="Monte Carlo cross-check",
        epilog="CSV columns, pipeline=pcm: f_s, R, empirical, stderr, d_smp, "
               "d_qnt, analytic_pcm, trials.  pipeline=mmse: f_s, "
               "empirical_mmse, stderr, analytic_mmse, trials.")
    common(p)
    p.add_argument("--pipeline", choices=("pcm", "mmse"), default="pcm")
    p.add_argument("--rate", type=float, default=8.0)
    p.add_argument("--fs", required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=256.0)
    p.add_argument("--dense-rate", type=float, default=4.0, dest="dense_rate")
    p.add_argument("--quantizer", choices=("entropy", "fixed", "none"),
                   default="entropy")
    p.set_defaults(func=cmd_simulate)
    return parser


def run(argv=None, stream=None) -> int:
    stream = stream if stream is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        psd = parse_psd(args.psd, f_max=args.f_max, grid_step=args.grid_step)
        records, meta = args.func(args, psd)
        emit(records, meta, args.json, stream)
        return 0
    except ConvergenceError as exc:
        print(f"adx-lab: numerical non-convergence: {exc}", file=sys.stderr)
        return 2
    except (InputError, AdxError, FileNotFoundError, ValueError) as exc:
        print(f"adx-lab: {exc}", file=sys.stderr)
        return 1


def render(argv) -> str:
    """Run a command and return its textual output (used by tests)."""
    buf = io.StringIO()
    status = run(argv, stream=buf)
    if status != 0:
        raise AdxError(f"command failed with status {status}")
    return buf.getvalue()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
