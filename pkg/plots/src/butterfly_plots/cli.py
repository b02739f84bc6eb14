"""Entry point: plot <variant> <inputs...> -o <image>."""

import argparse
import sys

from .io import SchemaError
from .render import VARIANTS, render


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render hofsim CSV datasets to PNG figures.",
    )
    parser.add_argument("variant", choices=sorted(VARIANTS),
                        help="figure variant")
    parser.add_argument("inputs", nargs="+", help="input CSV file(s)")
    parser.add_argument("-o", "--output", required=True, help="output PNG path")
    args = parser.parse_args(argv)
    try:
        render(args.variant, args.inputs, args.output)
    except FileNotFoundError as exc:
        parser.exit(1, f"plot: {exc}\n")
    except (SchemaError, ValueError) as exc:
        parser.exit(1, f"plot: {exc}\n")
    print(args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
