"""Command line front end.

Subcommands: run a configured scenario, verify the advection-field
identities, run the full invariant suite, measure convergence, and render
figures for a finished run.  Exit codes: 0 success, 1 configuration or
usage error, 2 step failure during a march, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import PRESET_NAMES, parse_config_text, preset_text
from .errors import CompatibilityError, ConfigError
from .verification import (
    all_passed,
    beta_checks,
    convergence_study,
    run_invariant_suite,
    run_scenario_suite,
    temporal_order_check,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_STEP_FAILURE = 2
EXIT_INVARIANT = 3



def load_config(spec):
    """Config from a filesystem path, or from a bundled preset name."""
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    if spec in PRESET_NAMES:
        return parse_config_text(preset_text(spec))
    raise ConfigError(
        f"config {spec!r} is neither a file nor a bundled preset "
        f"(presets: {', '.join(PRESET_NAMES)})")


def _apply_overrides(cfg, args):
    if args.t_final is not None:
        cfg.run.t_final = args.t_final
    if args.max_steps is not None:
        cfg.run.max_steps = args.max_steps
    if args.snapshot_every is not None:
        cfg.run.snapshot_every = args.snapshot_every
    if args.seed is not None:
        cfg.run.seed = args.seed
    if args.output_dir is not None:
        cfg.run.output_dir = args.output_dir
    if args.limiter is not None:
        cfg.numerics.limiter = args.limiter == "on"
    if args.cfl_safety is not None:
        cfg.numerics.cfl_safety = args.cfl_safety
    if args.rk is not None:
        cfg.numerics.rk = args.rk
    if args.alpha is not None:
        if args.alpha == "auto":
            cfg.numerics.alpha = "auto"
        else:
            try:
                cfg.numerics.alpha = float(args.alpha)
            except ValueError:
                raise ConfigError(
                    f"--alpha expects 'auto' or a number, got {args.alpha!r}")
    _validate_overrides(cfg)
    return cfg


def _validate_overrides(cfg):
    problems = []
    if cfg.run.t_final <= 0:
        problems.append("--t-final must be positive")
    if cfg.run.max_steps <= 0:
        problems.append("--max-steps must be positive")
    if cfg.run.snapshot_every < 0:
        problems.append("--snapshot-every must be nonnegative")
    if not 0.0 < cfg.numerics.cfl_safety <= 1.0:
        problems.append("--cfl-safety must lie in (0, 1]")
    a = cfg.numerics.alpha
    if not isinstance(a, str) and not 0.0 < a < 1.0:
        problems.append("--alpha must lie strictly between 0 and 1")
    if problems:
        raise ConfigError("invalid flags:\n  " + "\n  ".join(problems))


def _print_results(groups, out=sys.stdout):
    ok = True
    for name, results in groups:
        print(f"== {name} ==", file=out)
        for r in results:
            print("  " + r.line(), file=out)
        ok = ok and all_passed(results)
    return ok


def cmd_run(args):
    cfg = _apply_overrides(load_config(args.config), args)
    from .runner import run_simulation

    try:
        result, paths = run_simulation(cfg, output_dir=cfg.run.output_dir)
    except CompatibilityError as exc:
        print(f"error: initial state incompatible with the doping: {exc}",
              file=sys.stderr)
        return EXIT_CONFIG
    print(f"status: {result.status}")
    print(f"steps: {result.steps}  final t: {result.t:.6g}")
    if result.records:
        last = result.records[-1]
        print(f"mass: {last.mass!r}  entropy: {last.entropy_norm!r}")
    if result.flattened_at is not None:
        rec = result.records[result.flattened_at]
        print(f"current flattened at step {result.flattened_at + 1} "
              f"(t = {rec.t:.6g})")
    print(f"diagnostics: {paths['diagnostics']}")
    print(f"snapshot: {paths['final_snapshot']}")
    if result.status != "ok":
        print(f"error: {result.error}", file=sys.stderr)
        return EXIT_STEP_FAILURE
    return EXIT_OK


def cmd_verify_beta(args):
    results = beta_checks(seed=args.seed if args.seed is not None else 20260822)
    ok = _print_results([("advection-field identities", results)])
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_verify_invariants(args):
    groups = run_invariant_suite(threads=args.threads)
    if args.scenarios:
        groups += run_scenario_suite()
    ok = _print_results(groups)
    print("all invariant batteries passed" if ok
          else "invariant violations detected")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_convergence(args):
    levels = tuple(32 * 2**i for i in range(args.levels))
    rows, orders = convergence_study(levels=levels, threads=args.threads)
    print(f"{'N_x':>6} {'error':>14} {'steps':>7} {'order':>7}")
    for i, row in enumerate(rows):
        order = f"{orders[i - 1]:7.3f}" if i > 0 else "      -"
        print(f"{row['n_x']:>6} {row['error']:>14.6e} {row['steps']:>7} {order}")
    temporal = temporal_order_check()
    print(temporal.line())
    if args.output_dir is not None:
        os.makedirs(args.output_dir, exist_ok=True)
        table = os.path.join(args.output_dir, "convergence.csv")
        with open(table, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("n_x,error,steps,dt\n")
            for row in rows:
                fh.write(f"{row['n_x']},{row['error']!r},"
                         f"{row['steps']},{row['dt']!r}\n")
        from .report import render_convergence_figure

        made = render_convergence_figure(rows, args.output_dir)
        print(f"wrote {table}")
        for path in made:
            print(f"wrote {path}")
    ok = all(o >= 1.5 for o in orders) and temporal.passed
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_report(args):
    from .report import render_report

    try:
        made = render_report(args.run_dir, out_dir=args.output_dir)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in made:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bpdg",
        description=("Positivity-preserving kinetic transport solver with "
                     "a self-consistent field"),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="march a configured scenario")
    run.add_argument("--config", required=True,
                     help=f"config file path or preset name "
                          f"({', '.join(PRESET_NAMES)})")
    run.add_argument("--output-dir", default=None)
    run.add_argument("--t-final", type=float, default=None)
    run.add_argument("--max-steps", type=int, default=None)
    run.add_argument("--limiter", choices=("on", "off"), default=None)
    run.add_argument("--cfl-safety", type=float, default=None)
    run.add_argument("--rk", choices=("1", "2", "3"), default=None)
    run.add_argument("--snapshot-every", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--alpha", default=None,
                     help="'auto' or a fixed split in (0, 1)")
    run.set_defaults(func=cmd_run)

    beta = sub.add_parser("verify-beta",
                          help="advection-field identity spot checks")
    beta.add_argument("--seed", type=int, default=None)
    beta.set_defaults(func=cmd_verify_beta)

    inv = sub.add_parser("verify-invariants",
                         help="full numeric invariant suite")
    inv.add_argument("--threads", type=int, default=1)
    inv.add_argument("--scenarios", action="store_true",
                     help="also run the long entropy and positivity marches")
    inv.set_defaults(func=cmd_verify_invariants)

    conv = sub.add_parser("convergence", help="refinement order study")
    conv.add_argument("--levels", type=int, default=2,
                      help="number of refinement levels starting at N_x = 32")
    conv.add_argument("--threads", type=int, default=1)
    conv.add_argument("--output-dir", default=None,
                      help="write convergence.csv and a figure here")
    conv.set_defaults(func=cmd_convergence)

    rep = sub.add_parser("report", help="render figures for a finished run")
    rep.add_argument("run_dir", help="directory a run wrote outputs into")
    rep.add_argument("--output-dir", default=None,
                     help="figure destination (default: the run directory)")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) is not None and \
            getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "levels", 1) < 1:
        print("error: --levels must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
