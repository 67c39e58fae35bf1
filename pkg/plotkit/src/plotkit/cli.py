"""Batch plot command: ``plot <kind> --in <csv...> --out <image>``.

Runs headless (Agg backend); exit code 0 on success, 2 on bad usage or
schema/column problems.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import EmptyCsvError, MissingColumnError
from .render import KINDS, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__.splitlines()[0])
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path (png, pdf, svg)")
    parser.add_argument(
        "--schema",
        help="schema.json describing the CSVs (default: schema.json next to the first input)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(
            args.kind,
            [Path(p) for p in args.inputs],
            Path(args.out),
            Path(args.schema) if args.schema else None,
        )
    except (MissingColumnError, EmptyCsvError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
