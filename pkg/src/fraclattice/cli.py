"""Command-line interface.

Subcommands: ``kernel``, ``apply``, ``solve``, ``heat``, ``converge``,
``figure`` and ``pairs``.  Grids are written as CSV (default) or JSON, to
``--output``, to ``$FRACLATTICE_OUTPUT_DIR/<name>`` when that variable is
set, or to stdout.

Exit codes: 0 success, 1 usage error, 2 domain or numerical error,
3 failed or degenerate convergence study.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import convergence, gridops, kernels1d, kernels2d, reference
from .errors import ConfigError, DomainError, FracLatticeError

__all__ = ["main", "RunConfig", "FIGURES", "read_grid_file", "build_parser"]

OUTPUT_DIR_ENV = "FRACLATTICE_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_STUDY = 0, 1, 2, 3

# Reference figure configurations: near sum only, far sum ignored.
FIGURES = {
    1: dict(command="apply", pair="gaussian", s=0.25, h=0.1, n=1000, range=(-20, 20), dim=1),
    2: dict(command="apply", pair="algebraic", s=0.4, h=0.1, n=1000, range=(-50, 50), dim=1),
    3: dict(command="solve", pair="algebraic", s=0.4, h=0.1, n=1000, range=(-50, 50), dim=1),
    4: dict(command="apply", pair="ball-1s", s=0.25, h=0.1, n=1000, range=(-20, 20), dim=1),
    5: dict(command="solve", pair="ball-1s", s=0.25, h=0.1, n=20, range=(-20, 20), dim=1),
    6: dict(command="apply", pair="ball-2s", s=0.25, h=0.1, n=1000, range=(-20, 20), dim=1),
    7: dict(command="solve", pair="ball-2s", s=0.25, h=0.1, n=20, range=(-20, 20), dim=1),
    8: dict(command="apply", pair="ball-1s", s=0.25, h=0.1, n=500, range=(-20, 20), dim=2),
    9: dict(command="solve", pair="ball-1s", s=0.25, h=0.1, n=40, range=(-20, 20), dim=2),
    10: dict(command="apply", pair="ball-2s", s=0.25, h=0.1, n=500, range=(-20, 20), dim=2),
    11: dict(command="solve", pair="ball-2s", s=0.25, h=0.1, n=40, range=(-20, 20), dim=2),
    12: dict(command="apply", pair="riesz2d", s=0.3, h=0.1, n=500, range=(-20, 20), dim=2,
             alpha=0.5, offset="half"),
    13: dict(command="solve", pair="riesz2d", s=0.3, h=0.1, n=500, range=(-20, 20), dim=2,
             alpha=0.5, offset="half"),
}


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Validated settings for one grid-producing run."""

    command: str
    s: float
    h: float = 0.1
    n: int = 100
    range: tuple = (-20, 20)
    dim: int = 1
    offset: str = "none"
    pair: Optional[str] = None
    input: Optional[str] = None
    alpha: float = 0.5
    tail: str = "ignore"
    m: Optional[int] = None
    kernel_source: Optional[str] = None
    crossover: int = 12
    f2_form: str = "exact"
    t: Optional[float] = None
    k: Optional[int] = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.command not in ("apply", "solve", "heat"):
            raise ConfigError(f"unknown command {self.command!r}")
        if (self.pair is None) == (self.input is None):
            raise ConfigError("give exactly one of --pair or --input")
        if self.dim not in (1, 2):
            raise ConfigError(f"--dim must be 1 or 2, got {self.dim}")
        if not self.h > 0:
            raise ConfigError(f"--h must be positive, got {self.h}")
        lo, hi = self.range
        if lo > hi:
            raise ConfigError(f"empty range {lo}:{hi}")
        if self.offset not in ("none", "half"):
            raise ConfigError(f"--offset must be 'none' or 'half', got {self.offset!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"--format must be csv or json, got {self.format!r}")
        if self.command == "heat":
            if self.t is None:
                raise ConfigError("heat needs --t")
            gridops.HeatConfig(self.t, self.k)
            return self
        if self.command == "apply" and not 0 < self.s < 1:
            raise DomainError(f"apply needs s in (0, 1), got {self.s}")
        if self.command == "solve" and not 0 < self.s < 0.5:
            raise DomainError(f"solve needs s in (0, 1/2), got {self.s}")
        self.operator_config()
        return self

    def window(self) -> gridops.GridWindow:
        lo, hi = self.range
        ranges = tuple((lo, hi) for _ in range(self.dim))
        offset = tuple(self.offset == "half" for _ in range(self.dim))
        return gridops.GridWindow(self.h, ranges, offset)

    def operator_config(self) -> gridops.OperatorConfig:
        return gridops.OperatorConfig(self.s, self.n, self.tail, M=self.m,
                                      kernel_source=self.kernel_source,
                                      crossover=self.crossover, f2_form=self.f2_form)

    def header(self) -> list:
        doc = {k: v for k, v in asdict(self).items() if v is not None and k != "extra"}
        doc.update(self.extra)
        return [f"{k}={_fmt_value(v)}" for k, v in sorted(doc.items())]


def _fmt_value(v):
    if isinstance(v, (tuple, list)):
        return ":".join(str(x) for x in v)
    return str(v)


# --------------------------------------------------------------------------
# Input files
# --------------------------------------------------------------------------

def read_grid_file(path: str, dim: int = 1) -> gridops.LatticeSampler:
    """Read a user grid: CSV with index column(s) and a ``value`` column.

    Header lines start with ``#`` and hold ``key=value`` hints.  ``tail=zero``
    (the default) declares the data zero outside the listed indices and
    therefore compactly supported; ``tail=unknown`` treats missing values
    as zero but declares no support, so only ``ignore`` and ``sampled``
    tails apply.
    """
    hints = {}
    rows = []
    with open(path, newline="") as fh:
        body = []
        for line in fh:
            if line.startswith("#"):
                for part in line[1:].split():
                    if "=" in part:
                        key, val = part.split("=", 1)
                        hints[key.strip()] = val.strip()
            elif line.strip():
                body.append(line)
    reader = csv.DictReader(body)
    idx_cols = ["j"] if dim == 1 else ["j1", "j2"]
    if reader.fieldnames is None or not set(idx_cols + ["value"]) <= set(reader.fieldnames):
        raise ConfigError(f"{path}: expected columns {idx_cols + ['value']}")
    for rec in reader:
        try:
            rows.append(tuple(int(rec[c]) for c in idx_cols) + (float(rec["value"]),))
        except ValueError as exc:
            raise ConfigError(f"{path}: bad row {rec}: {exc}") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    tail = hints.get("tail", "zero")
    if tail not in ("zero", "unknown"):
        raise ConfigError(f"{path}: tail hint must be 'zero' or 'unknown', got {tail!r}")
    arr = np.array(rows)
    idx = arr[:, :-1].astype(np.int64)
    vals = arr[:, -1]
    radius = int(np.abs(idx).max())
    support = radius if tail == "zero" else None
    dense = np.zeros((2 * radius + 1,) * dim)
    dense[tuple((idx + radius).T)] = vals

    if dim == 1:
        def func(j):
            ok = np.abs(j) <= radius
            return np.where(ok, dense[np.clip(j + radius, 0, 2 * radius)], 0.0)
    else:
        def func(j1, j2):
            ok = (np.abs(j1) <= radius) & (np.abs(j2) <= radius)
            return np.where(ok, dense[np.clip(j1 + radius, 0, 2 * radius),
                                      np.clip(j2 + radius, 0, 2 * radius)], 0.0)
    return gridops.LatticeSampler(func, dim, support_radius=support)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _pair(cfg: RunConfig) -> reference.SolutionPair:
    return reference.get_pair(cfg.pair, cfg.s, cfg.dim, cfg.alpha)


def run_grid(cfg: RunConfig) -> gridops.GridFunction:
    """Compute the grid for an ``apply``, ``solve`` or ``heat`` run."""
    cfg.validate()
    w = cfg.window()
    if cfg.command == "heat":
        if cfg.pair is not None:
            pair = _pair(cfg)
            u = convergence.restrict(pair.u, w, pair.u_support, pair.u_decay)
        else:
            u = read_grid_file(cfg.input, cfg.dim)
        return gridops.heat_apply(u, w, gridops.HeatConfig(cfg.t, cfg.k))
    op_cfg = cfg.operator_config()
    if cfg.pair is not None:
        return convergence.evaluate_pair(_pair(cfg), w, op_cfg, cfg.command)
    data = read_grid_file(cfg.input, cfg.dim)
    if cfg.command == "apply":
        op = gridops.apply_frlap_1d if cfg.dim == 1 else gridops.apply_frlap_2d
    else:
        op = gridops.apply_frint_1d if cfg.dim == 1 else gridops.apply_frint_2d
    return op(data, w, op_cfg)


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).replace(microsecond=0).isoformat()


def _render_grid(grid: gridops.GridFunction, cfg: RunConfig, stamp: bool) -> str:
    if cfg.format == "json":
        extra = {"config": {k: v for k, v in asdict(cfg).items() if k != "extra"}}
        extra["config"].update(cfg.extra)
        if stamp:
            extra["generated"] = _timestamp()
        return grid.to_json(**extra)
    header = [f"fraclattice {cfg.command}", *cfg.header()]
    if stamp:
        header.append(f"generated={_timestamp()}")
    return grid.to_csv(header)


def _emit(text: str, args, default_name: str) -> None:
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = str(Path(os.environ[OUTPUT_DIR_ENV]) / default_name)
    if target is None or target == "-":
        sys.stdout.write(text)
        return
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _parse_range(text: str) -> tuple:
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise UsageError(f"range must look like -20:20, got {text!r}") from None


def _config_from_args(args) -> RunConfig:
    return RunConfig(command=args.command, s=args.s, h=args.h, n=args.n,
                     range=_parse_range(args.range), dim=args.dim, offset=args.offset,
                     pair=args.pair, input=args.input, alpha=args.alpha, tail=args.tail,
                     m=args.m, kernel_source=args.kernel_source, crossover=args.crossover,
                     f2_form=args.f2_form, t=getattr(args, "t", None),
                     k=getattr(args, "k", None), format=args.format)


def cmd_grid(args) -> int:
    cfg = _config_from_args(args)
    if cfg.pair is not None and cfg.pair == "riesz2d":
        cfg.dim = 2
    grid = run_grid(cfg)
    name = f"{cfg.command}-{cfg.pair or Path(cfg.input).stem}.{cfg.format}"
    _emit(_render_grid(grid, cfg, not args.no_timestamp), args, name)
    return EXIT_OK


def cmd_figure(args) -> int:
    if args.number not in FIGURES:
        raise UsageError(f"figure must be one of {sorted(FIGURES)}, got {args.number}")
    preset = dict(FIGURES[args.number])
    if args.n is not None:
        preset["n"] = args.n
    source = "asymptotic" if preset["dim"] == 2 else None
    cfg = RunConfig(**preset, kernel_source=source, format=args.format,
                    extra={"figure": args.number})
    grid = run_grid(cfg)
    _emit(_render_grid(grid, cfg, not args.no_timestamp), args,
          f"figure{args.number:02d}.{cfg.format}")
    return EXIT_OK


def _json_number(text):
    """CSV cell to a JSON value: int, float, ``None`` for nan, else the string."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        x = float(text)
    except ValueError:
        return text
    return None if math.isnan(x) else x


def cmd_kernel(args) -> int:
    if args.dim == 1:
        radius = args.n if args.radius is None else args.radius
        table = kernels1d.kernel_table(args.s, radius)
    else:
        radius = args.radius if args.radius is not None else args.n
        table = kernels2d.build_hybrid_table(args.s, radius, min(args.crossover, radius),
                                             args.source)
    text = table.to_csv()
    if args.format == "json":
        rows = [{k: _json_number(v) for k, v in row.items()}
                for row in csv.DictReader(text.splitlines())]
        text = json.dumps({"s": args.s, "dim": args.dim, "radius": radius, "rows": rows},
                          indent=1) + "\n"
    _emit(text, args, f"kernel-{args.dim}d-s{args.s:g}.{args.format}")
    return EXIT_OK


def cmd_converge(args) -> int:
    pair = reference.get_pair(args.pair, args.s, args.dim, args.alpha)
    try:
        hs = [float(x) for x in args.h_list.split(",")]
    except ValueError:
        raise UsageError(f"--h-list must be comma separated numbers, got {args.h_list!r}") from None
    report = convergence.rate_study(pair, hs, l=args.l, x_extent=args.x_extent,
                                    tail_extent=args.tail_extent, target=args.target,
                                    slack=args.slack)
    text = report.to_json() if args.format == "json" else report.to_csv()
    _emit(text, args, f"converge-{args.pair}-s{args.s:g}.{args.format}")
    if report.degenerate:
        print(f"degenerate study for {pair.name}: all errors vanish, no slope to fit",
              file=sys.stderr)
        return EXIT_STUDY
    if report.descriptive:
        print(f"2D study for {pair.name}: descriptive only, slope {report.slope}",
              file=sys.stderr)
        return EXIT_OK
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict}: slope {report.slope:.4f}, threshold {report.threshold:.4f}",
          file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_STUDY


def cmd_pairs(args) -> int:
    lines = [f"{name}: {desc}" for name, desc in reference.catalogue().items()]
    _emit("\n".join(lines) + "\n", args, "pairs.txt")
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

def _common(p, fmt=True):
    p.add_argument("-o", "--output", help=f"output file ('-' for stdout); default "
                   f"${OUTPUT_DIR_ENV}/<name> or stdout")
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the generation time so output is byte-reproducible")


def _grid_args(p, heat=False):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--pair", help="catalogued solution pair")
    src.add_argument("--input", help="CSV grid file (j[,j2],value)")
    p.add_argument("--s", type=float, default=0.25, help="order of the operator")
    p.add_argument("--h", type=float, default=0.1, help="mesh size")
    p.add_argument("--n", type=int, default=100, help="near-sum radius N")
    p.add_argument("--range", default="-20:20", help="index range lo:hi on each axis")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--offset", choices=("none", "half"), default="none",
                   help="shift the mesh by h/2")
    p.add_argument("--alpha", type=float, default=0.5, help="exponent for riesz2d")
    p.add_argument("--tail", choices=gridops.TAIL_MODES, default="ignore")
    p.add_argument("--m", type=int, help="outer radius for --tail sampled")
    p.add_argument("--kernel-source", choices=gridops.KERNEL_SOURCES)
    p.add_argument("--crossover", type=int, default=12)
    p.add_argument("--f2-form", choices=("exact", "power"), default="exact")
    if heat:
        p.add_argument("--t", type=float, required=True, help="time")
        p.add_argument("--k", type=int, help="Bessel-order truncation")
    _common(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fraclattice",
                     description="Fractional discrete Laplacian on lattices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernel", help="dump a kernel table")
    p.add_argument("--s", type=float, required=True,
                   help="signed order: positive Laplacian, negative integral")
    p.add_argument("--n", type=int, default=20, help="table radius")
    p.add_argument("--radius", type=int, help="alias of --n")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--source", choices=("hybrid", "asymptotic", "quadrature"),
                   default="hybrid", help="2D only")
    p.add_argument("--crossover", type=int, default=12, help="2D hybrid crossover")
    _common(p)
    p.set_defaults(func=cmd_kernel)

    for name, help_ in (("apply", "apply (-Delta_h)^s"), ("solve", "apply (-Delta_h)^-s"),
                        ("heat", "apply the heat semigroup")):
        p = sub.add_parser(name, help=help_)
        _grid_args(p, heat=name == "heat")
        p.set_defaults(func=cmd_grid)

    p = sub.add_parser("converge", help="mesh-refinement rate study")
    p.add_argument("--pair", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--h-list", default="0.2,0.1,0.05,0.025")
    p.add_argument("--l", type=int, default=0, help="derivative level")
    p.add_argument("--target", type=float, help="override the theoretical exponent")
    p.add_argument("--slack", type=float, default=0.15)
    p.add_argument("--x-extent", type=float, default=2.0)
    p.add_argument("--tail-extent", type=float, default=1000.0)
    _common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("figure", help="reproduce a figure configuration")
    p.add_argument("number", type=int)
    p.add_argument("--n", type=int, help="override the near-sum radius")
    _common(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("pairs", help="list the catalogued solution pairs")
    _common(p, fmt=False)
    p.set_defaults(func=cmd_pairs)
    return parser


def _join_negative_values(argv):
    """Let ``--range -20:20`` through; argparse would read ``-20:20`` as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--range":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--range={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FracLatticeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
