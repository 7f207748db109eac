"""Command-line entry point.

Subcommands map one-to-one to the scripted experiments::

    cohesive-pf profile-1d      --out r/        # cohesive law + profile CSV
    cohesive-pf bar-1d          [--config c]    # 1D surface-energy test
    cohesive-pf recovery-check                  # refinement-limit check
    cohesive-pf square-2d  --mesh-variant A --preset reduced
    cohesive-pf lshape-2d  --mesh-variant B --steps 6
    cohesive-pf domain-trace                    # strength-surface boundary

Exit codes: 0 = all targets met, 1 = a target missed, 2 = usage or
runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import experiments, svgplot
from .config import ConfigError, RunConfig, material_from_config, parse_config, \
    scenario_defaults
from .energetics import optimal_profile, phi_analytic


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="cohesive-pf",
                     description="cohesive phase-field fracture experiments")
    sub = parser.add_subparsers(dest="scenario", metavar="subcommand")
    for name in ("profile-1d", "bar-1d", "recovery-check", "square-2d",
                 "lshape-2d", "domain-trace"):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key/value config file")
        p.add_argument("--mesh-variant", choices=("A", "B"), default=None)
        p.add_argument("--preset", choices=("full", "reduced"), default=None)
        p.add_argument("--out", default=None, help="report directory")
        p.add_argument("--seed", type=int, default=None, help="reserved")
        p.add_argument("--steps", type=int, default=None)
    return parser


def _load_config(args) -> RunConfig:
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read(), scenario=args.scenario,
                               preset=args.preset)
    else:
        cfg = scenario_defaults(args.scenario, args.preset or "full")
    if args.mesh_variant is not None:
        cfg.diag = args.mesh_variant
    if args.steps is not None:
        if args.steps <= 0:
            raise ConfigError("--steps must be strictly positive")
        cfg.steps = args.steps
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    else:
        cfg.out_dir = f"out-{args.scenario}"
    return cfg


def _print_report(report) -> int:
    for line in report.lines():
        print(line)
    if not report.targets:
        print(f"[DONE] {report.scenario}: no reproduction targets at this preset")
    return 0 if report.passed else 1


def _snapshot_callback(cfg: RunConfig):
    from .experiments import _write_state_vtk

    os.makedirs(cfg.out_dir, exist_ok=True)

    def on_step(rec, state):
        if rec.step % cfg.stride == 0:
            _write_state_vtk(cfg.out_dir, state.u.mesh, state, rec.step)

    return on_step


def _run_profile_1d(cfg: RunConfig) -> int:
    m = material_from_config(cfg)
    jumps = np.linspace(0.0, cfg.u_max, cfg.steps + 1)
    rows = []
    for j in jumps:
        z0, _ = optimal_profile(j, m)
        rows.append((j, phi_analytic(j, m), z0))
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "phi.csv"), "w", encoding="utf-8") as fh:
        fh.write("j,phi_analytic,z0\n")
        for j, phi, z0 in rows:
            fh.write(f"{j:.12g},{phi:.12g},{z0:.12g}\n")
    plot = svgplot.LinePlot(title="cohesive law", xlabel="opening j",
                            ylabel="surface energy")
    plot.add([r[0] for r in rows], [r[1] for r in rows], label="phi")
    plot.write(os.path.join(cfg.out_dir, "plot_phi.svg"))
    print(f"[DONE] profile-1d: wrote {cfg.out_dir}/phi.csv "
          f"({len(rows)} samples, phi_max {rows[-1][1]:.6g})")
    return 0


def _run_domain_trace(cfg: RunConfig) -> int:
    m = material_from_config(cfg)
    trace = experiments.elastic_domain_trace(m, n_points=cfg.steps)
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "domain.csv"), "w", encoding="utf-8") as fh:
        fh.write("p,t\n")
        for pt in trace.points:
            fh.write(f"{pt.p:.12g},{pt.t:.12g}\n")
        fh.write(f"# Q,{trace.Q.p:.12g},{trace.Q.t:.12g}\n")
        fh.write(f"# theta_degrees,{trace.theta_degrees:.12g}\n")
    plot = svgplot.LinePlot(title="elastic domain", xlabel="pressure p",
                            ylabel="shear t")
    plot.add([pt.p for pt in trace.points], [pt.t for pt in trace.points],
             label="boundary")
    plot.add([trace.Q.p], [trace.Q.t], label="Q", markers=True)
    plot.write(os.path.join(cfg.out_dir, "plot_domain.svg"))
    print(f"[DONE] domain-trace: Q = ({trace.Q.p:.4g}, {trace.Q.t:.4g}) at "
          f"theta = {trace.theta_degrees:.1f} deg")
    return 0


def main(argv=None) -> int:
    """Run one scenario; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.scenario is None:
            parser.print_usage(sys.stderr)
            return 2
        cfg = _load_config(args)

        if args.scenario == "profile-1d":
            return _run_profile_1d(cfg)
        if args.scenario == "domain-trace":
            return _run_domain_trace(cfg)

        m = material_from_config(cfg)
        on_step = _snapshot_callback(cfg) if cfg.stride > 0 else None
        if args.scenario == "bar-1d":
            report = experiments.bar_1d(m=m, steps=cfg.steps, u_max=cfg.u_max,
                                        length=cfg.length)
        elif args.scenario == "recovery-check":
            report = experiments.recovery_check()
        elif args.scenario == "square-2d":
            report = experiments.square_test(
                loads_xy=(cfg.Ux, cfg.Uy), mesh_variant=cfg.diag, m=m,
                preset=cfg.preset, steps=cfg.steps, tol=cfg.tol,
                max_iter=cfg.max_iter, on_step=on_step)
        else:
            report = experiments.lshape_test(
                mesh_variant=cfg.diag, steps=cfg.steps, m=m, preset=cfg.preset,
                u_max=cfg.u_max, tol=cfg.tol, max_iter=cfg.max_iter,
                on_step=on_step)
        report.write(cfg.out_dir, stride=cfg.stride)
        return _print_report(report)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
