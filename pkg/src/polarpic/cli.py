"""Command-line front end: run, converge, presets.

Exit codes: 0 success, 1 configuration problem (bad flags, bad config file),
2 numerical failure (the failing step index goes to stderr).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .driver import (MODES, PRESETS, RunConfig, convergence_study,
                     preset_config, run)
from .errors import ConfigError, IntegrationInstabilityError

# which flag sets each RunConfig field (grid-style flags cover two fields)
FIELD_FLAGS = {
    "n_particles": "--particles",
    "m_r": "--grid", "m_theta": "--grid",
    "n_r": "--control-cells", "n_theta": "--control-cells",
    "dt": "--dt", "t_f": "--tf",
    "seed": "--seed", "mode": "--mode", "b_const": "--b-const",
    "r_min": "--r-min", "r_max": "--r-max",
    "ring_center": "--ring-center", "ring_falloff": "--ring-falloff",
    "perturbation": "--perturbation", "mode_number": "--mode-number",
    "alpha_r": "--alpha-r", "alpha_v": "--alpha-v",
    "beta_r": "--beta-r", "beta_v": "--beta-v",
    "gamma": "--gamma", "control_bound": "--control-bound",
    "r_target": "--r-target", "v_r_target": "--v-r-target",
    "snapshot_times": "--snapshots",
    "particle_snapshots": "--particle-snapshots",
    "out_dir": "--out", "comment": "--comment",
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _pair(text: str):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected AxB, got {text!r}")


def _times(text: str):
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated times, got {text!r}")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    """Every RunConfig field, defaulting to 'leave as configured'."""
    p.add_argument("--particles", type=int, help="particle count")
    p.add_argument("--grid", type=_pair, metavar="MRxMT",
                   help="field grid, e.g. 64x64")
    p.add_argument("--control-cells", type=_pair, metavar="NRxNT",
                   help="control partition, e.g. 4x1")
    p.add_argument("--dt", type=float, help="time step")
    p.add_argument("--tf", type=float, help="final time")
    p.add_argument("--seed", type=int, help="RNG seed")
    p.add_argument("--mode", choices=MODES, help="control mode")
    p.add_argument("--b-const", type=float, help="field value in uncontrolled mode")
    p.add_argument("--r-min", type=float, help="inner wall radius")
    p.add_argument("--r-max", type=float, help="outer wall radius")
    p.add_argument("--ring-center", type=float, help="initial ring center radius")
    p.add_argument("--ring-falloff", type=float, help="initial ring Gaussian falloff")
    p.add_argument("--perturbation", type=float, help="angular perturbation amplitude")
    p.add_argument("--mode-number", type=int, help="angular perturbation mode")
    p.add_argument("--alpha-r", type=float, help="radius tracking weight")
    p.add_argument("--alpha-v", type=float, help="radial-velocity tracking weight")
    p.add_argument("--beta-r", type=float, help="radius spread weight")
    p.add_argument("--beta-v", type=float, help="radial-velocity spread weight")
    p.add_argument("--gamma", type=float, help="control regularization")
    p.add_argument("--control-bound", type=float, help="clamp bound on B")
    p.add_argument("--r-target", type=float, help="target radius")
    p.add_argument("--v-r-target", type=float, help="target radial velocity")
    p.add_argument("--snapshots", type=_times, metavar="T1,T2,...",
                   help="density snapshot times")
    p.add_argument("--particle-snapshots", action="store_true", default=None,
                   help="also dump particle CSVs at snapshot times")
    p.add_argument("--out", help="output directory")
    p.add_argument("--comment", help="free-form note stored in emitted configs")


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    updates = {}
    simple = {
        "particles": "n_particles", "dt": "dt", "tf": "t_f", "seed": "seed",
        "mode": "mode", "b_const": "b_const", "r_min": "r_min", "r_max": "r_max",
        "ring_center": "ring_center", "ring_falloff": "ring_falloff",
        "perturbation": "perturbation", "mode_number": "mode_number",
        "alpha_r": "alpha_r", "alpha_v": "alpha_v", "beta_r": "beta_r",
        "beta_v": "beta_v", "gamma": "gamma", "control_bound": "control_bound",
        "r_target": "r_target", "v_r_target": "v_r_target",
        "snapshots": "snapshot_times", "particle_snapshots": "particle_snapshots",
        "out": "out_dir", "comment": "comment",
    }
    for arg_name, field_name in simple.items():
        value = getattr(args, arg_name)
        if value is not None:
            updates[field_name] = value
    if args.grid is not None:
        updates["m_r"], updates["m_theta"] = args.grid
    if args.control_cells is not None:
        updates["n_r"], updates["n_theta"] = args.control_cells
    import dataclasses
    return dataclasses.replace(config, **updates)


def _resolve_config(args) -> RunConfig:
    if args.config is not None and args.preset is not None:
        raise ConfigError("--config and --preset are mutually exclusive")
    if args.config is not None:
        base = RunConfig.from_json(args.config)
    elif args.preset is not None:
        base = preset_config(args.preset)
    else:
        base = RunConfig()
    config = _apply_overrides(base, args)
    config.validate()
    return config


def cmd_run(args) -> int:
    config = _resolve_config(args)
    if args.emit_config:
        Path(args.emit_config).parent.mkdir(parents=True, exist_ok=True)
        config.to_json(args.emit_config)
    result = run(config)
    n_rows = len(result.records)
    if n_rows:
        last = result.records[-1]
        print(f"completed {config.n_steps()} steps to t={last.t:g}; "
              f"final boundary energy {last.e_b:.6e}")
    else:
        print("no steps taken (t_f = 0); wrote initial snapshot only")
    if config.out_dir:
        print(f"output in {config.out_dir}")
    return 0


def cmd_converge(args) -> int:
    config = preset_config("validate")
    config = _apply_overrides(config, args)
    config.validate()
    result = convergence_study(config, nt_values=args.nt_list, nt_ref=args.nt_ref)
    print(result.table())
    if config.out_dir:
        print(f"table written to {config.out_dir}/convergence.csv")
    return 0


def cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        config = preset_config(name)
        print(f"{name}: {config.comment}")
        print(f"    mode={config.mode} N={config.n_particles} "
              f"grid={config.m_r}x{config.m_theta} dt={config.dt} tf={config.t_f}")
    return 0


def _nt_list(text: str):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polarpic",
                     description="Annular plasma PIC runs with feedback-controlled "
                                 "magnetic confinement")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one simulation")
    p_run.add_argument("--config", help="JSON config file")
    p_run.add_argument("--preset", choices=sorted(PRESETS), help="built-in config")
    p_run.add_argument("--emit-config", metavar="PATH",
                       help="write the fully resolved config JSON before running")
    _add_config_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge", help="time-step self-convergence study")
    p_conv.add_argument("--nt-list", type=_nt_list, default=(64, 128, 256, 512),
                        help="coarse step counts (default 64,128,256,512)")
    p_conv.add_argument("--nt-ref", type=int, default=4096,
                        help="reference step count (default 4096)")
    _add_config_flags(p_conv)
    p_conv.set_defaults(func=cmd_converge)

    p_pre = sub.add_parser("presets", help="list built-in configs")
    p_pre.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except IntegrationInstabilityError as exc:
        where = f" at step {exc.step}" if exc.step is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
