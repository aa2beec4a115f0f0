"""plotkit <analyze-dir> --out figs/ --band std"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FigureSpec, render_figure
from .reader import MissingInputError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render the four-panel ensemble figure from analyze outputs",
    )
    parser.add_argument("analyze_dir", type=str)
    parser.add_argument("--out", type=str, default="figs",
                        help="output directory for the image")
    parser.add_argument("--band", choices=("std", "stderr"), default="std")
    parser.add_argument("--name", type=str, default="four_panel.png")
    args = parser.parse_args(argv)

    spec = FigureSpec(
        input_dir=args.analyze_dir,
        output_path=str(Path(args.out) / args.name),
        band=args.band,
    )
    try:
        path = render_figure(spec)
    except MissingInputError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
