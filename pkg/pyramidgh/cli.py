"""
command line surface.

    pyramidgh space --recipe '{"family": "sigma", "n": 3}' --out s3.json
    pyramidgh inspect s3.json
    pyramidgh gh a.json b.json --exact
    pyramidgh rho a.json max --nmax 6
    pyramidgh rho-pointed a.json b.json
    pyramidgh rho0 a.json b.json --rmin 0.05 --rmax 3 --nodes 32
    pyramidgh sequence --target '{"family": "spider", "n": 64, "k": 2}' --recipe ... --metric rho
    pyramidgh net a.json --N 3 --delta 0.25 > net.json
    pyramidgh verify --suite paper [--list] [--only ID] [--tol-scale X] [--quick]

a space argument is a JSON space file, an inline JSON recipe, or `max` for
the maximal pyramid.
"""

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import attrs
import trio

from .gh import SizeLimitExceeded, gh_bounds, gh_exact, gh_pointed, gh_pointed_bounds
from .metric import (
    InfiniteEntryError,
    InvalidSpaceError,
    PointedSpace,
    SpaceFileError,
    diameter,
    radius,
    read_space,
    separation,
    space_to_json,
    write_space,
)
from .pointed import QuadratureScheme, rho0, rho_pointed
from .pyramid import (
    DEFAULT_BUDGET,
    DEFAULT_DELTA,
    DEFAULT_NMAX,
    DEFAULT_TOL,
    PyramidHandle,
    RhoEstimate,
    rho,
    slice_hausdorff,
    slice_net,
)
from .verify import REGISTRY, VerifyContext, all_passed, run_suite
from .workers import WorkerConfigError, WorkerPool, threads_from_env
from .zoo import InvalidRecipe, generate, recipe_from_json, unpointed

_log = logging.getLogger(__name__)

FORMATS = ("csv", "json")
METRICS = ("rho", "rho0", "slice")


class InvalidConfig(Exception):
    ...


@attrs.frozen
class RunConfig:
    command: str
    n_max: int = DEFAULT_NMAX
    delta: float = DEFAULT_DELTA
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    tol: float = DEFAULT_TOL
    fmt: str = "csv"
    out: Optional[str] = None
    threads: int = attrs.field(factory=threads_from_env)

    def __attrs_post_init__(self):
        problems = []
        if self.n_max < 1:
            problems.append(f"--nmax must be at least 1, got {self.n_max}")
        if not self.delta > 0:
            problems.append(f"--delta must be positive, got {self.delta}")
        if self.budget < 1:
            problems.append(f"--budget must be at least 1, got {self.budget}")
        if self.tol < 0:
            problems.append(f"--tol must be non-negative, got {self.tol}")
        if self.fmt not in FORMATS:
            problems.append(f"--format must be one of {FORMATS}, got {self.fmt!r}")
        if problems:
            raise InvalidConfig("; ".join(problems))

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            command=args.command,
            n_max=args.nmax,
            delta=args.delta,
            budget=args.budget,
            seed=args.seed,
            tol=args.tol,
            fmt=args.format,
            out=args.out,
        )


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--nmax", type=int, default=DEFAULT_NMAX, help="largest slice level")
    parser.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="grid step of the slice nets")
    parser.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="sampled subconfigurations per level")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="slack of the order relation")
    parser.add_argument("--format", choices=FORMATS, default="csv")
    parser.add_argument("--out", help="write the table here instead of stdout")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pyramidgh", description=__doc__, formatter_class=argparse.RawTextHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("space", help="generate a space from a recipe")
    p.add_argument("--recipe", required=True, help="JSON recipe, e.g. '{\"family\": \"sigma\", \"n\": 3}'")
    _common(p)

    p = sub.add_parser("inspect", help="validate a space file and print its shape")
    p.add_argument("file")
    _common(p)

    p = sub.add_parser("gh", help="Gromov-Hausdorff distance")
    p.add_argument("a")
    p.add_argument("b")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--bounds", dest="mode", action="store_const", const="bounds")
    p.set_defaults(mode="exact")
    p.add_argument("--pointed", action="store_true")
    _common(p)

    for name in ("rho", "rho-pointed", "rho0"):
        p = sub.add_parser(name, help=f"{name} estimate with its per-level table")
        p.add_argument("a")
        p.add_argument("b")
        if name == "rho0":
            p.add_argument("--rmin", type=float, default=QuadratureScheme().r_min)
            p.add_argument("--rmax", type=float, default=QuadratureScheme().r_max)
            p.add_argument("--nodes", type=int, default=QuadratureScheme().count)
        _common(p)

    p = sub.add_parser("sequence", help="distance of every term of a family to a target")
    p.add_argument("--target", required=True)
    p.add_argument("--recipe", action="append", required=True, dest="recipes")
    p.add_argument("--metric", choices=METRICS, default="rho")
    p.add_argument("--N", type=int, default=3, dest="level", help="slice level for --metric slice")
    p.add_argument("--D", type=float, default=None, dest="cap", help="slice diameter for --metric slice")
    _common(p)

    p = sub.add_parser("net", help="export a slice net as JSON")
    p.add_argument("a")
    p.add_argument("--pointed", action="store_true")
    p.add_argument("--N", type=int, default=3, dest="level")
    p.add_argument("--D", type=float, default=None, dest="cap")
    _common(p)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--suite", default="paper", choices=("paper",))
    p.add_argument("--list", action="store_true")
    p.add_argument("--only", action="append")
    p.add_argument("--tol-scale", type=float, default=1.0)
    p.add_argument("--quick", action="store_true", help="reduced sizes")
    _common(p)
    return parser


def parse_recipe(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidRecipe(f"recipe is not JSON: {e}") from e
    if not isinstance(data, dict):
        raise InvalidRecipe(f"recipe must be a JSON object, got {text!r}")
    return recipe_from_json(data)


def load(source: str, pointed: bool = False):
    """a space, or a pyramid handle when source is `max`"""
    if source == "max":
        return PyramidHandle.maximal(pointed)
    if source.lstrip().startswith("{"):
        S = generate(parse_recipe(source))
    else:
        S = read_space(source)
    if not pointed:
        return unpointed(S)
    return S if isinstance(S, PointedSpace) else PointedSpace(S, 0)


def _handle(item) -> PyramidHandle:
    return item if isinstance(item, PyramidHandle) else PyramidHandle.of(item)


def _space(item):
    if isinstance(item, PyramidHandle):
        raise InvalidConfig("`max` is only accepted by rho, rho-pointed and sequence")
    return item


def render(kind: str, rows: list[dict], fmt: str) -> str:
    schema = f"pyramidgh/{kind}/v1"
    if fmt == "json":
        return json.dumps({"schema": schema, "rows": rows}, indent=2)
    buf = io.StringIO()
    buf.write(f"# schema: {schema}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _emit(cfg: RunConfig, kind: str, rows: list[dict]):
    text = render(kind, rows, cfg.fmt)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def estimate_rows(estimate: RhoEstimate) -> list[dict]:
    rows = [{"N": N, "lo": iv.lo, "hi": iv.hi} for N, iv in sorted(estimate.per_N.items())]
    rows.append({"N": "tail", "lo": 0.0, "hi": estimate.tail_bound})
    rows.append({"N": "total", "lo": estimate.total.lo, "hi": estimate.total.hi})
    return rows


def _shape(S) -> str:
    X = unpointed(S)
    parts = [f"n={X.n}", f"diam={diameter(X):g}"]
    if isinstance(S, PointedSpace):
        parts.append(f"rad={radius(S):g}")
    parts.append(f"sep={separation(X):g}")
    return " ".join(parts)


async def cmd_space(cfg: RunConfig, args, pool: WorkerPool) -> int:
    S = generate(parse_recipe(args.recipe))
    if cfg.out:
        write_space(S, cfg.out)
    else:
        print(json.dumps(space_to_json(S)))
    print(f"{S.label}: {_shape(S)}", file=sys.stderr)
    return 0


async def cmd_inspect(cfg: RunConfig, args, pool: WorkerPool) -> int:
    try:
        S = read_space(args.file)
    except InvalidSpaceError as e:
        print(f"{args.file}: not a metric, {len(e.violations)} violation(s)")
        for v in e.violations:
            print(f"  {v!r}")
        return 2
    print(f"{S.label or args.file}: {_shape(S)}")
    return 0


async def cmd_gh(cfg: RunConfig, args, pool: WorkerPool) -> int:
    X, Y = _space(load(args.a, args.pointed)), _space(load(args.b, args.pointed))
    if args.mode == "exact":
        solve = gh_pointed if args.pointed else gh_exact
    else:
        solve = gh_pointed_bounds if args.pointed else gh_bounds
    try:
        result = await pool.run(solve, X, Y)
    except SizeLimitExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    witness = ";".join(f"{a}-{b}" for a, b in result.witness.sorted())
    _emit(cfg, "gh", [{"lo": result.value.lo, "hi": result.value.hi, "method": result.method, "nodes": result.nodes, "witness": witness}])
    return 0


async def cmd_rho(cfg: RunConfig, args, pool: WorkerPool) -> int:
    A, B = load(args.a), load(args.b)
    estimate = await rho(_handle(A), _handle(B), cfg.n_max, cfg.delta, cfg.budget, cfg.tol, cfg.seed, pool)
    _emit(cfg, "rho", estimate_rows(estimate))
    return 0


async def cmd_rho_pointed(cfg: RunConfig, args, pool: WorkerPool) -> int:
    A, B = load(args.a, pointed=True), load(args.b, pointed=True)
    estimate = await rho_pointed(A, B, cfg.n_max, cfg.delta, cfg.budget, cfg.tol, cfg.seed, pool)
    _emit(cfg, "rho-pointed", estimate_rows(estimate))
    return 0


async def cmd_rho0(cfg: RunConfig, args, pool: WorkerPool) -> int:
    A, B = _space(load(args.a, pointed=True)), _space(load(args.b, pointed=True))
    try:
        scheme = QuadratureScheme(args.rmin, args.rmax, args.nodes)
    except ValueError as e:
        raise InvalidConfig(str(e)) from e
    report = await rho0(A, B, scheme, cfg.n_max, cfg.delta, cfg.budget, cfg.tol, pool)
    rows = [{"r": r, "lo": iv.lo, "hi": iv.hi} for r, iv in report.nodes]
    rows.append({"r": "tails", "lo": 0.0, "hi": report.lower_tail + report.upper_tail})
    rows.append({"r": "quadrature", "lo": -report.quadrature_error, "hi": report.quadrature_error})
    rows.append({"r": "total", "lo": report.total.lo, "hi": report.total.hi})
    _emit(cfg, "rho0", rows)
    return 0


async def _term(cfg: RunConfig, args, pool: WorkerPool, term, target):
    if args.metric == "rho":
        return (await rho(_handle(term), _handle(target), cfg.n_max, cfg.delta, cfg.budget, cfg.tol, cfg.seed, pool)).total
    if args.metric == "slice":
        bound = await slice_hausdorff(
            _handle(term), _handle(target), args.level, args.cap, cfg.delta, cfg.budget, cfg.tol, cfg.seed, pool
        )
        return bound.value
    report = await rho0(_space(term), _space(target), QuadratureScheme(), cfg.n_max, cfg.delta, cfg.budget, cfg.tol, pool)
    return report.total


async def cmd_sequence(cfg: RunConfig, args, pool: WorkerPool) -> int:
    pointed = args.metric == "rho0"
    target = load(args.target, pointed)
    rows = []
    for recipe in args.recipes:
        term = load(recipe, pointed)
        started = time.monotonic()
        value = await _term(cfg, args, pool, term, target)
        label = _handle(term).label
        rows.append({"label": label, "lo": value.lo, "hi": value.hi, "runtime": round(time.monotonic() - started, 3)})
        _log.debug("sequence term %s: %s", label, value)
    _emit(cfg, "sequence", rows)
    return 0


async def cmd_net(cfg: RunConfig, args, pool: WorkerPool) -> int:
    handle = _handle(load(args.a, args.pointed))
    try:
        net = await pool.run(slice_net, handle, args.level, args.cap, cfg.delta, cfg.budget, cfg.tol, cfg.seed)
    except ValueError as e:
        raise InvalidConfig(str(e)) from e
    text = json.dumps(net.to_json(), indent=1)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        print(text)
    print(f"{handle.label} N={net.N} D={net.D:g}: {len(net)} elements, radius {net.net_radius:g}", file=sys.stderr)
    return 0


async def cmd_verify(cfg: RunConfig, args, pool: WorkerPool) -> int:
    if args.list:
        for c in REGISTRY:
            print(f"{c.number:2d} {c.id:<12} {c.title}")
        return 0
    ctx = VerifyContext(pool, cfg.seed, cfg.delta, args.tol_scale, args.quick)
    try:
        reports = await run_suite(ctx, args.only)
    except KeyError as e:
        raise InvalidConfig(e.args[0]) from e
    for r in reports:
        status = "PASS" if r.outcome.passed else "FAIL"
        print(f"{status} {r.criterion.number:2d} {r.criterion.id:<12} {r.seconds:7.1f}s  {r.outcome.detail}")
    return 0 if all_passed(reports) else 1


COMMANDS = {
    "space": cmd_space,
    "inspect": cmd_inspect,
    "gh": cmd_gh,
    "rho": cmd_rho,
    "rho-pointed": cmd_rho_pointed,
    "rho0": cmd_rho0,
    "sequence": cmd_sequence,
    "net": cmd_net,
    "verify": cmd_verify,
}


async def main(args: argparse.Namespace) -> int:
    try:
        cfg = RunConfig.from_args(args)
        async with WorkerPool(cfg.threads) as pool:
            return await COMMANDS[cfg.command](cfg, args, pool)
    except (InvalidConfig, InvalidRecipe, SpaceFileError, InvalidSpaceError, InfiniteEntryError, WorkerConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def run(argv: Optional[Sequence[str]] = None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level="DEBUG" if args.verbose else "WARNING",
        style="{",
        datefmt="%Y-%m-%d %H:%M:%S",
        format="{asctime} {message}",
    )
    sys.exit(trio.run(main, args))
