"""One command per figure kind, each reading a run directory.

Every entry point takes ``--in`` (a directory written by the simulator
CLI) and ``--out`` (the image path) plus optional axis overrides.  Exit
codes: 0 on success, 1 when the artifacts are missing, stale, or empty,
2 on usage errors (argparse's default).
"""

from __future__ import annotations

import argparse
import sys

from .errors import PlotError
from .figures import FigureSpec, render

__all__ = ["main_disorder", "main_heatmap", "main_propagation", "main_spectrum"]


def _run(kind: str, argv: list[str] | None) -> int:
    parser = argparse.ArgumentParser(
        prog=f"nlssh-plot-{kind}",
        description=f"render the {kind} figure from a run directory",
    )
    parser.add_argument(
        "--in", dest="input_dir", required=True, metavar="DIR",
        help="run directory holding manifest.json and its CSV artifacts",
    )
    parser.add_argument(
        "--out", dest="output_path", required=True, metavar="IMAGE",
        help="image file to write (.png)",
    )
    parser.add_argument("--x-label", default=None)
    parser.add_argument("--y-label", default=None)
    args = parser.parse_args(argv)
    try:
        result = render(
            FigureSpec(
                kind=kind,
                input_dir=args.input_dir,
                output_path=args.output_path,
                x_label=args.x_label,
                y_label=args.y_label,
            )
        )
    except PlotError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {result.path} ({result.masked_cells} masked cells)")
    return 0


def main_propagation(argv: list[str] | None = None) -> int:
    return _run("propagation", argv)


def main_spectrum(argv: list[str] | None = None) -> int:
    return _run("spectrum", argv)


def main_heatmap(argv: list[str] | None = None) -> int:
    return _run("heatmap", argv)


def main_disorder(argv: list[str] | None = None) -> int:
    return _run("disorder", argv)
