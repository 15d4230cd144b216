"""export-net command line tool."""

from __future__ import annotations

import argparse
import sys

from .convert import ExportError, export_checkpoint


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="export-net",
        description="Convert a dense Keras/PyTorch checkpoint to interchange JSON",
    )
    parser.add_argument("--in", dest="infile", required=True)
    parser.add_argument("--framework", choices=("keras", "torch"), required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        export_checkpoint(args.infile, args.framework, args.out)
    except (ExportError, OSError) as exc:
        print(f"export-net: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
