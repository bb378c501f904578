"""Command-line entry point.

Subcommands::

    run            simulate a preset or JSON config and write CSV outputs
    sweep-epsilon  repeat a run for epsilon in {1e-1, 1e-2, 5e-4}
    oracle         tabulate an analytic density and CDF
    graphon        report degrees and norms of a kernel

Exit status is 0 on success, 2 for configuration errors and 3 for failures
during the run.
"""

from __future__ import annotations

import argparse
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import PRESETS, build_model, config_hash, emit, load_config
from .diagnostics import DiagnosticsFrame
from .errors import ConfigError, DivergenceError, DomainError, QuadratureError, SchemeError

__all__ = ["main", "write_trajectory", "write_snapshot", "run_experiment", "SWEEP_EPSILONS"]

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
SWEEP_EPSILONS = (1e-1, 1e-2, 5e-4)
TRAJECTORY_HEADER = ",".join(DiagnosticsFrame.FIELDS)
SNAPSHOT_HEADER = "x_bin_lo,x_bin_hi,w_bin_lo,w_bin_hi,density"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def write_trajectory(path, frames):
    with open(path, "w", newline="") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        for fr in frames:
            fh.write(",".join(_fmt(v) for v in fr.row()) + "\n")


def write_snapshot(path, hist):
    with open(path, "w", newline="") as fh:
        fh.write(SNAPSHOT_HEADER + "\n")
        for row in hist.rows():
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _versions():
    import numba
    import scipy

    return {
        "graphon_opinion": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def run_experiment(cfg, out_dir=None, name="trajectory"):
    """Run ``cfg`` and write trajectory, snapshots, config and manifest.

    Returns the :class:`~graphon_opinion.kinetic_mc.RunResult`.
    """
    from .kinetic_mc import run

    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = run(cfg)
    traj = out / f"{name}.csv"
    write_trajectory(traj, result.frames)
    files = [traj.name]
    prefix = "snapshot" if name == "trajectory" else f"{name}_snapshot"
    for t, hist in sorted(result.snapshots.items()):
        p = out / f"{prefix}_t{t:g}.csv"
        write_snapshot(p, hist)
        files.append(p.name)
    cfg_name = "config.json" if name == "trajectory" else f"{name}_config.json"
    (out / cfg_name).write_text(emit(cfg))
    manifest = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - t0,
        "n_steps": result.meta["n_steps"],
        "dt": result.meta["dt"],
        "sigma_trunc": result.meta["sigma"],
        "parallel": cfg.parallel,
        "warning_steps": result.warning_steps,
        "files": files + [cfg_name],
    }
    man = "manifest.json" if name == "trajectory" else f"{name}_manifest.json"
    (out / man).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return result


class RunFailure(RuntimeError):
    """Raised from a failure after the configuration was accepted."""


def _execute(cfg, out_dir=None, name="trajectory"):
    try:
        return run_experiment(cfg, out_dir, name)
    except Exception as exc:
        raise RunFailure(str(exc)) from exc


def _overrides(args):
    ov = {}
    if getattr(args, "seed", None) is not None:
        ov["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        ov["output_dir"] = args.out
    if getattr(args, "epsilon", None) is not None:
        ov["epsilon"] = args.epsilon
    if getattr(args, "threads", None) is not None:
        ov["threads"] = args.threads
        ov["parallel"] = True
    if getattr(args, "sequential", False):
        ov["parallel"] = False
    for item in getattr(args, "set", None) or ():
        key, _, raw = item.partition("=")
        try:
            ov[key] = json.loads(raw)
        except json.JSONDecodeError:
            ov[key] = raw
    return ov


def _load(args, extra=None):
    source = args.config if args.config is not None else args.preset
    if args.config is not None and args.preset is not None:
        raise ConfigError("give either --preset or --config, not both")
    ov = _overrides(args)
    ov.update(extra or {})
    return load_config(source, ov)


def _cmd_run(args):
    cfg = _load(args)
    res = _execute(cfg)
    last = res.frames[-1] if res.frames else res.initial
    print(
        f"{len(res.frames)} steps -> {cfg.output_dir}: mean={last.mean:.6g} "
        f"variance={last.variance:.6g} entropy_w={last.entropy_w:.6g}"
    )
    return EXIT_OK


def _cmd_sweep(args):
    if args.epsilon is not None:
        raise ConfigError("sweep-epsilon sets epsilon itself", "epsilon")
    base = _load(args)
    for eps in SWEEP_EPSILONS:
        cfg = base.replace(epsilon=eps, dt=None)
        res = _execute(cfg, base.output_dir, name=f"trajectory_eps{eps:g}")
        last = res.frames[-1]
        print(f"epsilon={eps:g}: entropy_w={last.entropy_w:.6g} variance={last.variance:.6g}")
    return EXIT_OK


def _cmd_oracle(args):
    from .oracle import beta_equilibrium, uniform_target, QuasiEquilibrium

    w = np.linspace(-1.0, 1.0, args.points)
    if args.kind == "beta":
        q = beta_equilibrium(args.lam, args.mean_ratio)
        dens, cdf = q.density(w), q.cdf(w)
    elif args.kind == "quasi":
        q = QuasiEquilibrium.from_exponents(args.alpha_minus, args.alpha_plus)
        dens, cdf = q.density(w), q.cdf(w)
    else:
        u = uniform_target()
        dens, cdf = np.full_like(w, u.density), u.cdf(w)
    lines = ["w,density,cdf"] + [f"{_fmt(a)},{_fmt(b)},{_fmt(c)}" for a, b, c in zip(w, dens, cdf)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_graphon(args):
    cfg = _load(args)
    g = build_model(cfg).graphon
    base = g.base
    xs = np.linspace(0.0, 1.0, args.points + 1)[1:]
    report = {"kind": base.kind, "params": base.describe(), "sigma_trunc": g.sigma}
    report["in_degree"] = {_fmt(x): float(g.in_degree(x)) for x in xs}
    norms = {}
    for p in (1.0, 2.0, math.inf):
        try:
            norms[str(p)] = float(base.p_norm(p))
        except DivergenceError:
            norms[str(p)] = "divergent"
    report["p_norm"] = norms
    report["p_norm_truncated"] = {str(p): float(g.p_norm(p)) for p in (1.0, 2.0, math.inf)}
    print(json.dumps(report, indent=2, default=str))
    return EXIT_OK


def _common(p, with_run=True):
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--config", help="JSON config file (flat keys)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config key (JSON value)")
    if with_run:
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--threads", type=int, help="run the threaded kernel on N threads")
        p.add_argument("--sequential", action="store_true", help="force the sequential kernel")


def build_parser():
    parser = argparse.ArgumentParser(prog="graphon-opinion", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="simulate and write CSV outputs")
    _common(p)
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("sweep-epsilon", help="repeat a run over the epsilon sweep")
    _common(p)
    p.set_defaults(func=_cmd_sweep)
    p = sub.add_parser("oracle", help="tabulate an analytic density")
    p.add_argument("kind", choices=["beta", "uniform", "quasi"])
    p.add_argument("--lam", type=float, default=0.25)
    p.add_argument("--mean-ratio", type=float, default=0.0)
    p.add_argument("--alpha-minus", type=float, default=0.0)
    p.add_argument("--alpha-plus", type=float, default=0.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_oracle)
    p = sub.add_parser("graphon", help="degree and norm report")
    _common(p, with_run=False)
    p.add_argument("--points", type=int, default=8)
    p.set_defaults(func=_cmd_graphon)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command in ("run", "sweep-epsilon", "graphon") and args.preset is None and args.config is None:
        print("error: give --preset or --config", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except RunFailure as exc:
        print(f"runtime error: {exc.__cause__}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, SchemeError, DomainError, DivergenceError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, QuadratureError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
