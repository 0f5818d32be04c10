"""latspec-figs <run-dir> <kind> <output-path> [--no-theory]"""

import argparse
import sys

from .artifacts import ArtifactError
from .render import FIGURE_KINDS, FigureRequest, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="latspec-figs",
        description="render a figure from a latspec run directory",
    )
    parser.add_argument("run_dir", help="artifact directory with data.csv + summary.json")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("output", help="output image path (.png; .svg written too)")
    parser.add_argument("--no-theory", action="store_true",
                        help="suppress the closed-form overlay curves")
    args = parser.parse_args(argv)
    try:
        paths = render(FigureRequest(
            run_dir=args.run_dir,
            kind=args.kind,
            output=args.output,
            theory_overlays=not args.no_theory,
        ))
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print("\n".join(paths))
    return 0


if __name__ == "__main__":
    sys.exit(main())
