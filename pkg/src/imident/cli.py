"""``identify`` command line: simulate, run, report."""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import yaml

from .config import ALGORITHMS, ExperimentConfig, load_config
from .harness import make_reference, report, run_experiment
from .motor import write_waveform_csv


def _load(path):
    return load_config(path) if path else ExperimentConfig()


def cmd_simulate(args):
    config = _load(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = write_waveform_csv(make_reference(config), out / "reference.csv")
    print(path)


def cmd_run(args):
    config = _load(args.config)
    overrides = {}
    if args.algo and args.algo != "all":
        overrides["algorithms"] = (args.algo,)
    elif args.algo == "all":
        overrides["algorithms"] = ALGORITHMS
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.budget is not None:
        overrides["budget"] = args.budget
    if args.workers is not None:
        overrides["workers"] = args.workers
    config = replace(config, **overrides)
    result = run_experiment(config, args.out, deterministic=args.deterministic)
    _print_stats(result.stats)


def cmd_config(args):
    sys.stdout.write(yaml.safe_dump(ExperimentConfig().to_flat(), sort_keys=False))


def cmd_report(args):
    _print_stats(report(args.in_dir))


def _print_stats(stats):
    print(f"{'algo':<6} {'average':>12} {'std':>12} {'min':>12} {'max':>12} {'median':>12}")
    for s in stats.values():
        print(f"{s.algo:<6} {s.average:12.6g} {s.std:12.6g} {s.min:12.6g} {s.max:12.6g} "
              f"{s.median:12.6g}")
    for s in stats.values():
        if s.deviation is not None:
            print(f"{s.algo:<6} % dev " + " ".join(f"{d:9.4g}" for d in s.deviation))


def build_parser():
    p = argparse.ArgumentParser(prog="identify",
                                description="Induction motor parameter identification workbench")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write the reference waveform CSV")
    s.add_argument("--config", help="flat YAML experiment config")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("run", help="run optimizers and write results")
    r.add_argument("--config", help="flat YAML experiment config")
    r.add_argument("--algo", choices=[*ALGORITHMS, "all"])
    r.add_argument("--seed", type=int, help="base seed")
    r.add_argument("--runs", type=int)
    r.add_argument("--budget", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--deterministic", action="store_true",
                   help="sequential runs, byte-stable output files")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("report", help="recompute tables from a results directory")
    t.add_argument("--in", dest="in_dir", required=True)
    t.set_defaults(func=cmd_report)

    c = sub.add_parser("config", help="print the default config file")
    c.set_defaults(func=cmd_config)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
