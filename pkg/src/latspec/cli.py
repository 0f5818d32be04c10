"""Command line interface: one subcommand per experiment.

    latspec <experiment> --config cfg.json [--out DIR] [--jobs N]
                         [--seed-override S]

The default output root comes from $LATSPEC_OUT_ROOT (falling back to
./out); artifacts land in <root>/<experiment>/<run-id>/.
"""

import argparse
import sys

from .errors import ConfigError
from .experiments import (
    EXIT_CONFIG_ERROR,
    EXPERIMENT_NAMES,
    run_experiment,
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="latspec",
        description="spectral / transport experiments on lattice Schrodinger operators",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENT_NAMES:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=None, help="output root directory")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel worker hint (never changes the payload)")
        p.add_argument("--seed-override", type=int, default=None, dest="seed_override")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        result = run_experiment(
            args.config,
            out_root=args.out,
            jobs=args.jobs,
            seed_override=args.seed_override,
            experiment=args.experiment,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    if "error" in result.summary:
        err = result.summary["error"]
        print(f"numerical error in {err.get('op')}: {err.get('message')}",
              file=sys.stderr)
    else:
        verdict = "ok" if result.summary.get("all_gates_passed") else "GATE FAILURE"
        print(f"{result.summary['experiment']} [{result.summary['run_id']}]: "
              f"{verdict} -> {result.run_dir}")
        for gate in result.summary.get("gates", []):
            mark = "pass" if gate["passed"] else "FAIL"
            print(f"  [{mark}] {gate['name']}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
