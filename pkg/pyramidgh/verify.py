"""
the acceptance suite run by `pyramidgh verify`.

each criterion is an async check over a `VerifyContext` and reports an
`Outcome`; failures are collected, never raised. `quick=True` shrinks every
criterion to a size the test-suite can afford.
"""

import itertools
import logging
import time
from typing import Awaitable, Callable, Optional

import attrs
import numpy as np

from .gh import gh_bounds, gh_exact
from .lipschitz import CoordinateMap, kuratowski, mcshane_fix, transfer_net
from .metric import FiniteSpace, PointedSpace, diameter, floyd_warshall, grid_values, radius, restrict, scale, sigma, violations
from .oracle import oracle_gh, oracle_hausdorff, oracle_slice
from .order import equivalent, precsim
from .pointed import QuadratureScheme, prop_rad_bound, rescaled_ball_rho, rho0, rho0_comparison_constant, rho_pointed
from .pyramid import DEFAULT_DELTA, DEFAULT_NMAX, PyramidHandle, RhoEstimate, join, member, rho, rho_N, slice_net
from .zoo import Path, RandomMetric, Spider, corpus, generate, pointed_corpus, unpointed
from .workers import WorkerPool

_log = logging.getLogger(__name__)

# pairs checked against three-point oracle slices in a full run
THREE_POINT_PAIRS = 120


@attrs.frozen
class Outcome:
    passed: bool
    detail: str


@attrs.define
class VerifyContext:
    pool: WorkerPool
    seed: int = 0
    delta: float = DEFAULT_DELTA
    # multiplies every tolerance; a negative value makes tight checks fail
    tol_scale: float = 1.0
    quick: bool = False
    estimates: list = attrs.field(factory=list)

    def slack(self, base: float) -> float:
        return base * self.tol_scale

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64([self.seed, salt]))

    def pick(self, full, quick):
        return quick if self.quick else full

    async def rho(self, A, B, n_max: int) -> RhoEstimate:
        estimate = await rho(A, B, n_max, self.delta, seed=self.seed, pool=self.pool)
        self.estimates.append(estimate)
        return estimate

    async def rho_pointed(self, A, B, n_max: int) -> RhoEstimate:
        estimate = await rho_pointed(A, B, n_max, self.delta, seed=self.seed, pool=self.pool)
        self.estimates.append(estimate)
        return estimate


Check = Callable[[VerifyContext], Awaitable[Outcome]]


@attrs.frozen
class Criterion:
    number: int
    id: str
    title: str
    check: Check


REGISTRY: list[Criterion] = []


def criterion(id: str, title: str):
    def register(check: Check) -> Check:
        REGISTRY.append(Criterion(len(REGISTRY) + 1, id, title, check))
        return check

    return register


def lookup(key: str) -> Criterion:
    for c in REGISTRY:
        if key in (c.id, str(c.number)):
            return c
    raise KeyError(f"no criterion {key!r}, known: {', '.join(c.id for c in REGISTRY)}")


def _fail(fmt: str, *args) -> Outcome:
    return Outcome(False, fmt % args)


def _handle(S) -> PyramidHandle:
    return PyramidHandle.of(S)


@criterion("oracle", "gh_exact and rho_N agree with brute force")
async def _oracle(ctx: VerifyContext) -> Outcome:
    rng = ctx.rng(1)
    pairs = ctx.pick(500, 40)
    for k in range(pairs):
        n1, n2 = (int(v) for v in rng.integers(1, 5, size=2))
        X = generate(RandomMetric(n1, int(rng.integers(2**31))))
        Y = generate(RandomMetric(n2, int(rng.integers(2**31))))
        fast = gh_exact(X, Y).value.lo
        slow = oracle_gh(X, Y)
        if abs(fast - slow) > ctx.slack(1e-12):
            return _fail("pair %d: gh_exact %s, oracle %s", k, fast, slow)

    spaces = corpus(ctx.seed)
    every = list(itertools.combinations(range(len(spaces)), 2))
    if ctx.quick:
        plan = [(k, k + 1, N) for k in range(4) for N in (2, 3)]
    else:
        # every pair at N=2, a seeded draw of pairs at N=3
        drawn = rng.choice(len(every), size=min(len(every), THREE_POINT_PAIRS), replace=False)
        plan = [(i, j, 2) for i, j in every] + [(*every[int(k)], 3) for k in drawn]
    slices: dict = {}
    memo: dict = {}

    def grid_slice(i: int, N: int) -> list:
        if (i, N) not in slices:
            slices[i, N] = oracle_slice(spaces[i], N, ctx.delta)
        return slices[i, N]

    for i, j, N in plan:
        A, B = spaces[i], spaces[j]
        value = await rho_N(_handle(A), _handle(B), N, ctx.delta, seed=ctx.seed, pool=ctx.pool)
        exact = await ctx.pool.run(oracle_hausdorff, grid_slice(i, N), grid_slice(j, N), False, memo)
        if not value.contains(exact, ctx.delta + ctx.slack(1e-9)):
            return _fail("rho_%d(%s, %s) = %s misses oracle %s", N, A.label, B.label, value.as_tuple(), exact)
    return Outcome(True, f"{pairs} gh pairs, {len(plan)} slice distances")


@criterion("lipschitz3", "rho is at most three times the GH distance")
async def _lipschitz3(ctx: VerifyContext) -> Outcome:
    spaces = corpus(ctx.seed, max_points=4)
    pairs = list(itertools.combinations(spaces, 2))
    if ctx.quick:
        pairs = pairs[:: max(1, len(pairs) // 8)][:8]
    n_max = ctx.pick(DEFAULT_NMAX, 2)
    for X, Y in pairs:
        estimate = await ctx.rho(_handle(X), _handle(Y), n_max)
        d = gh_exact(X, Y).value.hi
        if estimate.total.lo > 3 * d + ctx.slack(1e-9):
            return _fail("rho(%s, %s).lo = %s > 3 * %s", X.label, Y.label, estimate.total.lo, d)
    return Outcome(True, f"{len(pairs)} pairs at n_max={n_max}")


@criterion("sigma", "rho between equilateral spaces matches its closed form")
async def _sigma(ctx: VerifyContext) -> Outcome:
    top = ctx.pick(5, 3)
    n_max = ctx.pick(8, 4)
    for m, n in itertools.combinations(range(1, top + 1), 2):
        A, B = sigma(m), sigma(n)
        estimate = await ctx.rho(_handle(A), _handle(B), n_max)
        expected = 2.0 ** (-m - 1)
        if not estimate.total.contains(expected, ctx.slack(1e-12)):
            return _fail("rho(S_%d, S_%d) = %s misses %s", m, n, estimate.total.as_tuple(), expected)
        if estimate.total.width > 0.08 + ctx.slack(1e-12):
            return _fail("rho(S_%d, S_%d) too wide: %s", m, n, estimate.total.width)
    return Outcome(True, f"pairs up to {top} points at n_max={n_max}")


@criterion("spider", "spiders stay GH-apart while their pyramids converge")
async def _spider(ctx: VerifyContext) -> Outcome:
    sp8 = unpointed(generate(Spider(8, 1.0, 2)))
    sp16 = unpointed(generate(Spider(16, 1.0, 2)))
    lo = gh_bounds(sp8, sp16).value.lo
    if lo < 0.4 - ctx.slack(1e-12):
        return _fail("gh_bounds(Sp8, Sp16).lo = %s < 0.4", lo)
    if ctx.quick:
        return Outcome(True, f"gh lower bound {lo}")

    target = _handle(unpointed(generate(Spider(64, 1.0, 2))))
    rows = []
    for n in (2, 4, 8, 16):
        estimate = await ctx.rho(_handle(unpointed(generate(Spider(n, 1.0, 2)))), target, 8)
        rows.append(estimate.total)
    for k in range(1, len(rows)):
        if rows[k].hi > rows[k - 1].hi + ctx.slack(1e-9):
            return _fail("hi grows along the sequence: %s", [r.as_tuple() for r in rows])
    if not rows[-1].hi < rows[0].lo - ctx.slack(1e-12):
        return _fail("final hi %s not below initial lo %s", rows[-1].hi, rows[0].lo)
    return Outcome(True, f"gh lower bound {lo}, rho {[r.as_tuple() for r in rows]}")


@criterion("transfer", "transferred nets sit within 3 eps of the subconfiguration")
async def _transfer(ctx: VerifyContext) -> Outcome:
    rng = ctx.rng(5)
    spaces = corpus(ctx.seed, max_points=4)
    triples = ctx.pick(200, 20)
    for k in range(triples):
        X = spaces[int(rng.integers(len(spaces)))]
        Y = spaces[int(rng.integers(len(spaces)))]
        eps = gh_exact(X, Y).value.hi
        size = int(rng.integers(1, Y.n + 1))
        Yp = restrict(Y, sorted(int(i) for i in rng.choice(Y.n, size=size, replace=False)))
        D = diameter(Yp) + 1
        Xp = transfer_net(Yp, X, eps, D)
        d = gh_exact(Xp, Yp).value.hi
        if d > 3 * eps + ctx.slack(1e-9):
            return _fail("triple %d: gh(X', Yp) = %s > 3 * %s", k, d, eps)
        if not precsim(Xp, X, tol=ctx.slack(1e-9)):
            return _fail("triple %d: transferred net is not dominated by %s", k, X.label)
    return Outcome(True, f"{triples} triples")


@criterion("mcshane", "McShane repair is 1-Lipschitz and moves nothing by more than eps")
async def _mcshane(ctx: VerifyContext) -> Outcome:
    rng = ctx.rng(6)
    instances = ctx.pick(200, 30)
    for k in range(instances):
        X = generate(RandomMetric(int(rng.integers(1, 7)), int(rng.integers(2**31))))
        eps = float(rng.uniform(0, 0.5))
        f = kuratowski(X).values + rng.uniform(-eps / 2, eps / 2, size=(X.n, X.n))
        fixed = mcshane_fix(X, CoordinateMap(f), eps)
        gap = float((fixed.sup_distances() - X.matrix).max())
        if gap > ctx.slack(1e-12):
            return _fail("instance %d: output stretches a distance by %s", k, gap)
        moved = float(np.abs(fixed.values - f).max())
        if moved > eps + ctx.slack(1e-12):
            return _fail("instance %d: output moved %s > eps %s", k, moved, eps)
    return Outcome(True, f"{instances} instances")


@criterion("bounds", "every rho estimate lies in its a priori range")
async def _bounds(ctx: VerifyContext) -> Outcome:
    top = PyramidHandle.maximal()
    for X in corpus(ctx.seed, max_points=3)[: ctx.pick(12, 3)]:
        await ctx.rho(_handle(X), top, ctx.pick(3, 2))
    for estimate in ctx.estimates:
        if estimate.total.hi > 2 + estimate.tail_bound + ctx.slack(1e-12):
            return _fail("estimate above 2 + tail: %s", estimate.to_json())
        for N, iv in estimate.per_N.items():
            if iv.lo < -ctx.slack(1e-12) or iv.hi > N + ctx.slack(1e-12):
                return _fail("rho_%d = %s outside [0, %d]", N, iv.as_tuple(), N)
    return Outcome(True, f"{len(ctx.estimates)} estimates")


@criterion("scaling", "pointed rho between rescalings is at most half diam |s - t|")
async def _scaling(ctx: VerifyContext) -> Outcome:
    rng = ctx.rng(8)
    factors = (0.5, 0.8, 1.0, 1.25)
    # an instance is a corpus space with one of its points as base
    rooted = [(S, b) for S in corpus(ctx.seed, max_points=4) for b in range(S.n)]
    picked = rng.choice(len(rooted), size=min(len(rooted), ctx.pick(50, 3)), replace=False)
    n_max = ctx.pick(DEFAULT_NMAX, 2)
    for k in picked:
        S, base = rooted[int(k)]
        scaled = {s: PointedSpace(scale(S, s), base) for s in factors}
        for s, t in itertools.combinations(factors, 2):
            estimate = await ctx.rho_pointed(scaled[s], scaled[t], n_max)
            bound = diameter(S) * abs(s - t) / 2
            if estimate.total.lo > bound + ctx.slack(1e-9):
                return _fail("%s at base %d, %s, %s: lo %s > %s", S.label, base, s, t, estimate.total.lo, bound)
    return Outcome(True, f"{len(picked)} instances, {len(factors)} factors")


@criterion("ball", "rescaled balls move at most 8 |1 - r2/r1| in r")
async def _ball(ctx: VerifyContext) -> Outcome:
    A = generate(Path(2.0, 16))
    B = generate(Spider(2, 1.0, 8))
    spacing = 1 / 8
    radii = ctx.pick(((0.5, 0.6), (1.0, 1.25), (1.5, 2.0)), ((1.0, 1.25),))
    n_max = ctx.pick(3, 2)
    for r1, r2 in radii:
        first = await rescaled_ball_rho(A, B, r1, n_max, ctx.delta, pool=ctx.pool)
        second = await rescaled_ball_rho(A, B, r2, n_max, ctx.delta, pool=ctx.pool)
        allowed = 8 * abs(1 - r2 / r1) + first.width + second.width + 2 * spacing / r1
        if abs(first.mid - second.mid) > allowed + ctx.slack(1e-12):
            return _fail("radii %s, %s: %s vs %s", r1, r2, first.as_tuple(), second.as_tuple())
    return Outcome(True, f"{len(radii)} radius pairs")


@criterion("long", "long pointed paths approach the maximal pointed pyramid")
async def _long(ctx: VerifyContext) -> Outcome:
    top = PyramidHandle.maximal(pointed=True)
    n_max = ctx.pick(DEFAULT_NMAX, 2)
    seen = []
    for R in ctx.pick((4, 9, 16), (4,)):
        estimate = await ctx.rho_pointed(generate(Path(float(R), 4 * R)), top, n_max)
        bound = prop_rad_bound(R)
        if estimate.total.lo > bound + ctx.slack(1e-9):
            return _fail("Path(%d) vs max: lo %s > %s", R, estimate.total.lo, bound)
        seen.append((R, estimate.total.lo, bound))
    return Outcome(True, f"(R, lo, bound): {seen}")


@criterion("rho0", "pointed rho is controlled by rho0 for radius at most 1")
async def _rho0(ctx: VerifyContext) -> Outcome:
    rng = ctx.rng(11)
    spaces = [P for P in pointed_corpus(ctx.seed, max_points=4) if radius(P) <= 1]
    every = list(itertools.combinations(spaces, 2))
    pairs = [every[int(k)] for k in rng.choice(len(every), size=min(len(every), ctx.pick(20, 2)), replace=False)]
    constant = rho0_comparison_constant(1.0)
    scheme = ctx.pick(QuadratureScheme(), QuadratureScheme(count=4))
    n_max = ctx.pick(DEFAULT_NMAX, 2)
    for A, B in pairs:
        lo = (await ctx.rho_pointed(A, B, n_max)).total.lo
        report = await rho0(A, B, scheme, n_max=n_max, delta=ctx.delta, pool=ctx.pool)
        if lo > constant * report.total.hi + ctx.slack(1e-9):
            return _fail("%s, %s: rho lo %s > %s * rho0 hi %s", A.label, B.label, lo, constant, report.total.hi)
    return Outcome(True, f"{len(pairs)} pairs, {scheme.count} nodes, constant {constant:.4f}")


def _below(e, delta: float, D: float, rng=None) -> list:
    """grid metrics entrywise at most e; one random draw when rng is given"""
    values = grid_values(D, delta)
    slots = list(itertools.combinations(range(e.n), 2))
    choices = [[v for v in values if v <= e.rows[i][j] + 1e-9] for i, j in slots]
    if rng is not None:
        m = np.zeros((e.n, e.n))
        for (i, j), vs in zip(slots, choices):
            m[i, j] = m[j, i] = vs[int(rng.integers(len(vs)))]
        return [floyd_warshall(m)]
    out = []
    for entries in itertools.product(*choices):
        m = np.zeros((e.n, e.n))
        for (i, j), v in zip(slots, entries):
            m[i, j] = m[j, i] = v
        if not violations(m):
            out.append(m)
    return out


def _check_net(ctx: VerifyContext, handle: PyramidHandle, net, draws: Optional[int], rng) -> Optional[str]:
    tol = ctx.slack(1e-9)
    elements = list(net.elements)
    if draws is None:
        below = [(e, None) for e in elements]
        pairs = itertools.combinations(elements, 2)
    else:
        below = [(elements[int(rng.integers(len(elements)))], rng) for _ in range(draws)]
        pairs = [(elements[int(rng.integers(len(elements)))], elements[int(rng.integers(len(elements)))]) for _ in range(draws)]
    seen = set()
    for e, draw in below:
        smaller = [FiniteSpace(m) for m in _below(e, net.delta, net.D, draw)]
        smaller += [restrict(e, idx) for k in range(1, e.n) for idx in itertools.combinations(range(e.n), k)]
        smaller.append(scale(e, float(rng.uniform(0.1, 1.0))))
        for s in smaller:
            if s.rows in seen:
                continue
            seen.add(s.rows)
            if not member(s, handle, tol):
                return f"{handle.label} N={net.N}: a space below a member is not a member"
    for e1, e2 in pairs:
        j = join(e1, e2, handle, net.D, tol)
        if j.n > e1.n + e2.n or diameter(j) > net.D + 1e-12:
            return f"{handle.label} N={net.N}: join left the slice"
        if not (member(j, handle, tol) and precsim(e1, j, tol) and precsim(e2, j, tol)):
            return f"{handle.label} N={net.N}: join does not dominate its inputs"
    return None


@criterion("axioms", "slice nets are downward closed and directed")
async def _axioms(ctx: VerifyContext) -> Outcome:
    rng = ctx.rng(12)
    spaces = corpus(ctx.seed, max_points=5)[: ctx.pick(None, 4)]
    draws = ctx.pick(200, 10)
    levels = ctx.pick((2, 3, 4, 5), (2, 3, 4))
    for X in spaces:
        handle = _handle(X)
        for N in levels:
            net = await ctx.pool.run(slice_net, handle, N, None, ctx.delta)
            problem = await ctx.pool.run(_check_net, ctx, handle, net, None if N <= 3 else draws, rng)
            if problem:
                return Outcome(False, problem)
    return Outcome(True, f"{len(spaces)} spaces, levels {levels}")


@criterion("equivalence", "rho vanishes exactly on equivalent pairs")
async def _equivalence(ctx: VerifyContext) -> Outcome:
    rng = ctx.rng(13)
    spaces = corpus(ctx.seed, max_points=ctx.pick(5, 3))
    every = list(itertools.combinations(range(len(spaces)), 2))
    twins = [(i, j) for i, j in every if equivalent(spaces[i], spaces[j])]
    drawn = [every[int(k)] for k in rng.choice(len(every), size=min(len(every), ctx.pick(60, 6)), replace=False)]
    pairs = sorted(set(twins) | set(drawn))
    for i, j in pairs:
        X, Y = spaces[i], spaces[j]
        estimate = await ctx.rho(_handle(X), _handle(Y), 5)
        same = (i, j) in twins
        vanishes = estimate.total.lo <= ctx.slack(1e-12) and estimate.total.hi <= 2 * estimate.tail_bound + ctx.slack(1e-12)
        if same != vanishes:
            return _fail("%s vs %s: equivalent=%s but rho = %s", X.label, Y.label, same, estimate.total.as_tuple())
        if same and gh_exact(X, Y).value.hi > ctx.slack(1e-12):
            return _fail("%s vs %s are equivalent with positive GH distance", X.label, Y.label)
    return Outcome(True, f"{len(pairs)} pairs, {len(twins)} equivalent")


@attrs.frozen
class Report:
    criterion: Criterion
    outcome: Outcome
    seconds: float


async def run_suite(ctx: VerifyContext, only: Optional[list[str]] = None) -> list[Report]:
    chosen = REGISTRY if not only else [lookup(key) for key in only]
    reports = []
    for c in chosen:
        started = time.monotonic()
        try:
            outcome = await c.check(ctx)
        except Exception as e:
            _log.debug("criterion %s raised", c.id, exc_info=True)
            outcome = Outcome(False, f"raised {type(e).__name__}: {e}")
        seconds = time.monotonic() - started
        _log.debug("criterion %s: passed=%s in %.1fs", c.id, outcome.passed, seconds)
        reports.append(Report(c, outcome, seconds))
    return reports


def all_passed(reports: list[Report]) -> bool:
    return all(r.outcome.passed for r in reports)
