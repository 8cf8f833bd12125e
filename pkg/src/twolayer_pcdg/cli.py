"""Command line entry point: ``run``, ``list-cases`` and ``convergence``."""
from __future__ import annotations

import argparse
import sys

from .cases import list_cases
from .errors import ConfigError, DomainError, SolverError
from .harness import RunConfig, convergence_csv, run_case, run_convergence

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3

# config-file keys and the converters applied to their values
_KEYS = {
    "case": str, "nx": int, "ny": int, "k": int, "cfl": float, "tend": float,
    "scheme": str, "limiter-M": float, "no-limiter": None, "positivity": None, "out": str,
    "ref": str,
    "g": float, "r": float, "meshes": str,
}


def read_config_file(path):
    """Parse ``key = value`` lines (``#`` comments, keys spelled like the CLI flags)."""
    values = {}
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        conv = _KEYS[key]
        try:
            if conv is None:
                values[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                values[key] = conv(val)
        except ValueError:
            raise ConfigError(f"{path}:{n}: bad value {val!r} for {key}") from None
    return values


def _common(p):
    p.add_argument("--config", help="key = value file; command line flags take precedence")
    p.add_argument("--case")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--k", type=int, choices=(1, 2))
    p.add_argument("--cfl", type=float)
    p.add_argument("--tend", type=float)
    p.add_argument("--scheme", choices=("still", "moving"))
    p.add_argument("--limiter-M", dest="limiter_M", type=float)
    p.add_argument("--no-limiter", dest="no_limiter", action="store_true", default=None)
    p.add_argument("--positivity", action="store_true", default=None,
                   help="rescale cells whose depths nearly vanish (2D dam breaks)")
    p.add_argument("--g", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--ref", help="none | initial | self:<nx> | file:<path>")
    p.add_argument("--out", help="output directory for CSV and metadata")


def build_parser():
    parser = argparse.ArgumentParser(prog="twolayer-pcdg",
                                     description="Well-balanced DG solvers for two-layer shallow water")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="run one case"))
    sub.add_parser("list-cases", help="list the case presets")
    conv = sub.add_parser("convergence", help="self-convergence study over several meshes")
    _common(conv)
    conv.add_argument("--meshes", help="comma separated cell counts, e.g. 25,50,100")
    return parser


def _merged(args):
    opts = read_config_file(args.config) if args.config else {}
    for key in _KEYS:
        attr = key.replace("-", "_")
        val = getattr(args, attr, None)
        if val is not None:
            opts[key] = val
    if "case" not in opts:
        raise ConfigError("a case is required (--case or case = ... in the config file)")
    return opts


def _config(opts):
    return RunConfig(
        case=opts["case"], scheme=opts.get("scheme"), nx=opts.get("nx"), ny=opts.get("ny"),
        k=opts.get("k"), cfl=opts.get("cfl"), t_end=opts.get("tend"), g=opts.get("g"),
        r=opts.get("r"), limiter_M=opts.get("limiter-M", 0.0),
        limiter=False if opts.get("no-limiter") else None,
        positivity=True if opts.get("positivity") else None, out=opts.get("out"),
        ref=opts.get("ref"))


def _print_errors(rep):
    for name in rep.l1:
        print(f"  {name:>3}: L1 {rep.l1[name]:.3e}  Linf {rep.linf[name]:.3e}")


def cmd_run(opts):
    res = run_case(_config(opts))
    cfg = res.config
    print(f"{cfg.case}: scheme={cfg.scheme} nx={cfg.nx} k={cfg.k} t_end={cfg.t_end} "
          f"steps={len(res.reports)} wall={res.wall_time:.1f}s")
    if res.errors is not None:
        print(f"errors against reference '{cfg.ref}':")
        _print_errors(res.errors)
    for f in res.files:
        print(f"wrote {f}")


def cmd_convergence(opts):
    if "meshes" not in opts:
        raise ConfigError("--meshes is required for a convergence study")
    try:
        meshes = [int(s) for s in opts["meshes"].split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad mesh list {opts['meshes']!r}") from None
    if len(meshes) < 1:
        raise ConfigError("need at least one mesh")
    cfg = _config(opts)
    overrides = {k: getattr(cfg, k) for k in ("scheme", "k", "cfl", "t_end", "g", "r", "ref",
                                             "limiter", "limiter_M", "positivity")}
    reports, text, _ = run_convergence(cfg.case, meshes, **overrides)
    print(text)
    if cfg.out:
        from pathlib import Path
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{cfg.case}_convergence.csv"
        convergence_csv(reports, path)
        print(f"wrote {path}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list-cases":
            for name, desc in list_cases():
                print(f"{name:<34} {desc}")
            return EXIT_OK
        opts = _merged(args)
        if args.command == "run":
            cmd_run(opts)
        else:
            cmd_convergence(opts)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, DomainError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
