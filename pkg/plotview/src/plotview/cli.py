"""Command-line batch renderer: plotview <kind> <inputs...> -o out.png.

Exit codes: 0 success, 1 usage problem or unreadable file, 2 input that
parses but violates the documented CSV schemas (the column diff goes to
stderr).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import figures
from .readers import (SchemaError, read_convergence, read_density_snapshot,
                      read_diagnostics)

KINDS = ("density-polar", "density-cartesian", "energy", "control-map",
         "convergence")


def series_label(path: Path) -> str:
    """Legend label for one diagnostics file: its run directory, or the stem."""
    if path.stem == "diagnostics" and path.parent.name not in ("", "."):
        return path.parent.name
    return path.stem


def render(kind: str, inputs: list, out_path: str) -> Path:
    """Dispatch one job; raises on bad input counts or schema violations."""
    paths = [Path(p) for p in inputs]
    for p in paths:
        if not p.is_file():
            raise FileNotFoundError(f"input not found: {p}")
    if kind != "energy" and len(paths) != 1:
        raise ValueError(f"{kind} takes exactly one input file, got {len(paths)}")

    if kind == "density-polar":
        rho, meta = read_density_snapshot(paths[0])
        return figures.density_polar(rho, meta, out_path)
    if kind == "density-cartesian":
        rho, meta = read_density_snapshot(paths[0])
        return figures.density_cartesian(rho, meta, out_path)
    if kind == "energy":
        series = [(series_label(p), read_diagnostics(p)) for p in paths]
        return figures.energy(series, out_path)
    if kind == "control-map":
        return figures.control_map(read_diagnostics(paths[0]), out_path)
    return figures.convergence(read_convergence(paths[0]), out_path)


class _Parser(argparse.ArgumentParser):
    """argparse that funnels usage problems into the exit-1 path."""

    def error(self, message):
        raise ValueError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="plotview",
        description="Render figures from simulator CSV output")
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument("inputs", nargs="+",
                        help="input CSV file(s); energy overlays several "
                             "diagnostics files, other kinds take one file")
    parser.add_argument("-o", "--output", required=True, metavar="OUT.png",
                        help="image file to write")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = render(args.kind, args.inputs, args.output)
    except SchemaError as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
