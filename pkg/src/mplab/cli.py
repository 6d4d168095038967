"""Command-line front end: ``mplab <subcommand> [flags]``.

Every subcommand is a pure function of its flags and config file.  Floats
are printed with 17 significant digits so that reruns are byte-identical.
The exit status is 0 exactly when every requested check passes.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from ._errors import ContractError, DomainError
from .bounds import SmoothingParams, smoothing_rhs_for_sample
from .ensemble import EnsembleConfig, load_config, sample_matrix
from .experiments import (
    map_trials,
    run_rate_experiment,
    run_stieltjes_experiment,
    run_truncation_experiment,
)
from .mp_law import MPLaw, mp_cdf_vec, mp_pdf, mp_stieltjes, mp_stieltjes_sym, sym_cdf, sym_pdf
from .spectral import spectral_sample
from .verify import LEVELS, report_json, run_suite

LAW_QUANTITIES = ("pdf", "cdf", "stieltjes", "sym", "sym_pdf", "mp_stieltjes")


def fmt(x):
    return format(float(x) + 0.0, ".17g")


def parse_complex(text):
    """Read ``1+0.5i`` / ``0+1j`` / ``2`` as a complex number."""
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def parse_grid(text):
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:num, got {text!r}")
        return list(np.linspace(float(parts[0]), float(parts[1]), int(parts[2])))
    return [float(v) for v in text.split(",") if v]


def parse_int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def parse_complex_list(text):
    return [parse_complex(v) for v in text.split(",") if v]


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args):
    """Config from ``--config`` with any explicit flags layered on top."""
    base = load_config(args.config).to_dict() if getattr(args, "config", None) else {}
    base.pop("schema_version", None)
    if getattr(args, "n", None) is not None:
        n = args.n[0] if isinstance(args.n, list) else args.n
        if "n" in base and args.p is None and args.y is None:
            base["p"] = int(round(n * base["p"] / base["n"]))
        base["n"] = n
    if getattr(args, "y", None) is not None:
        base["y"] = args.y
        base.pop("p", None)
    if getattr(args, "p", None) is not None:
        base["p"] = args.p
        base.pop("y", None)
    if getattr(args, "trials", None) is not None:
        base["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        base["base_seed"] = args.seed
    if "n" not in base or ("p" not in base and "y" not in base):
        raise ContractError("need --config or --n with --p/--y")
    return EnsembleConfig.from_dict(base)


def cmd_law(args):
    law = MPLaw(args.y)
    what = args.what
    if what in ("stieltjes", "mp_stieltjes"):
        if not args.z:
            raise ContractError(f"--what {what} needs --z")
        f = mp_stieltjes_sym if what == "stieltjes" else mp_stieltjes
        lines = ["u,v,re,im"]
        for z in args.z:
            s = complex(f(law, z))
            lines.append(f"{fmt(z.real)},{fmt(z.imag)},{fmt(s.real)},{fmt(s.imag)}")
    else:
        if not args.x:
            raise ContractError(f"--what {what} needs --x")
        f = {"pdf": mp_pdf, "cdf": mp_cdf_vec, "sym": sym_cdf, "sym_pdf": sym_pdf}[what]
        lines = ["x,value"] + [f"{fmt(x)},{fmt(f(law, x))}" for x in args.x]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_simulate(args):
    config = _config(args)
    h = config.config_hash()
    samples = map_trials(lambda t: spectral_sample(sample_matrix(config, t), h, t).to_dict(), range(config.trials))
    doc = {"schema_version": 1, "config": config.to_dict(), "config_hash": h, "samples": samples}
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return 0


def cmd_verify(args):
    records = run_suite(args.level, args.seed, poison=args.poison)
    for r in records:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.check_name} statistic={fmt(r.statistic)} bound={fmt(r.bound)}")
    failed = [r.check_name for r in records if not r.passed]
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report_json(records, args.level, args.seed) + "\n")
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"all {len(records)} checks passed")
    return 0


def cmd_rate(args):
    config = _config(args)
    grid = args.n or [128, 256, 512, 1024]
    fit = run_rate_experiment(config, grid, out_dir=args.out)
    sys.stdout.write(fit.to_csv())
    print(f"slope={fmt(fit.slope)} intercept={fmt(fit.intercept)} r_squared={fmt(fit.r_squared)}")
    return 0


def cmd_bound(args):
    config = _config(args)
    law = MPLaw(config.y)
    params = SmoothingParams.for_law(law, config.n, A0=args.a0)
    sample = spectral_sample(sample_matrix(config, args.trial))
    report = smoothing_rhs_for_sample(sample, law, params)
    doc = report.to_dict()
    doc["config"] = config.to_dict()
    doc["trial_index"] = args.trial
    doc["params"] = {"v": params.v, "V": params.V, "eps": params.eps, "H": params.H, "C1": params.C1, "C2": params.C2}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0 if report.holds else 1


def cmd_stieltjes(args):
    config = _config(args)
    grid = args.n if args.n else [config.n]
    zs = args.z or [complex(1.0, 0.5)]
    table = run_stieltjes_experiment(config, zs, grid, A0=args.a0, out_dir=args.out)
    sys.stdout.write(table.to_csv())
    if table.skipped:
        print(f"warning: {len(table.skipped)} (z, n) point(s) outside G skipped", file=sys.stderr)
    return 0


def cmd_truncate(args):
    config = _config(args)
    report = run_truncation_experiment(config, out_dir=args.out)
    print(
        f"n={report.n} p={report.p} level={fmt(report.level)} mean_zeroed={fmt(report.mean_zeroed)} "
        f"mean_distance={fmt(report.mean_distance)} bai_holds={report.bai_holds} "
        f"interlacing_holds={report.interlacing_holds}"
    )
    return 0 if report.bai_holds and report.interlacing_holds else 1


def _add_config_flags(p, n_list=False):
    p.add_argument("--config", help="JSON ensemble config")
    if n_list:
        p.add_argument("--n", type=parse_int_list, help="row counts, comma-separated")
    else:
        p.add_argument("--n", type=int, help="rows")
    p.add_argument("--p", type=int, help="columns")
    p.add_argument("--y", type=float, help="ratio n/p; sets p = round(n/y)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="base seed")


def build_parser():
    parser = argparse.ArgumentParser(prog="mplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("law", help="evaluate the limiting law")
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--what", choices=LAW_QUANTITIES, default="pdf")
    p.add_argument("--x", type=parse_grid, help="points: a,b,c or start:stop:num")
    p.add_argument("--z", type=parse_complex_list, help="complex points, e.g. 1+0.5i,0+1i")
    p.add_argument("--out", help="CSV path (stdout by default)")
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("simulate", help="sample spectra and write them as JSON")
    _add_config_flags(p)
    p.add_argument("--out", help="JSON path (stdout by default)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the invariant suites")
    p.add_argument("--level", choices=sorted(LEVELS), default="fast")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--poison", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("rate", help="Delta_n over an n grid and the log-log fit")
    _add_config_flags(p, n_list=True)
    p.add_argument("--out", help="output directory for the JSON record and CSV")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("bound", help="smoothing bound on a single trial")
    _add_config_flags(p)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--a0", type=float, default=1.0, help="v0 = a0/n")
    p.add_argument("--out", help="JSON path (stdout by default)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("stieltjes", help="transform error on the region G")
    _add_config_flags(p, n_list=True)
    p.add_argument("--z", type=parse_complex_list)
    p.add_argument("--a0", type=float, default=1.0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_stieltjes)

    p = sub.add_parser("truncate", help="truncation effect on the ESD")
    _add_config_flags(p)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_truncate)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ContractError, DomainError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"mplab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
