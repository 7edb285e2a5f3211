"""
pyramid slices, their finite nets and the distance between pyramids.

    P_X            = every finite space Y with Y <= X
    S_X(N, D)      = P_X cut down to spaces of <= N points and diameter <= D
    rho_N(X, Y)    = Hausdorff distance, for the GH metric, of S_X(N, N) and S_Y(N, N)
    rho(X, Y)      = sum over N of 2^-N * rho_N(X, Y)

a slice is infinite, so it is replaced by a finite net: genuine members plus
a radius such that every member lies within that GH distance of the net.
every number handed out is an interval that contains the true value, as
long as the nets involved are certified.

the same engine serves pointed spaces; a `_Flavor` holds what differs.
"""

import itertools
import logging
import math
import time
from functools import lru_cache
from typing import Optional, Sequence

import attrs
import numpy as np
import trio

from .canon import canonical_key
from .gh import (
    SizeLimitExceeded,
    directed_hausdorff,
    gh_interval,
    gh_lower_bound,
    gh_pointed,
    gh_pointed_bounds,
)
from .metric import (
    INF,
    FiniteSpace,
    Interval,
    PointedSpace,
    ceil_to_grid,
    floyd_warshall,
    grid_floor,
    grid_values,
    point,
    sigma,
    space_to_json,
    truncate,
    truncate_pointed,
)
from .order import PRECSIM_TOL, defect_search, dominating_map
from .workers import WorkerPool

_log = logging.getLogger(__name__)

DEFAULT_NMAX = 8
DEFAULT_DELTA = 0.25
DEFAULT_TOL = PRECSIM_TOL
# sampled elements per net above the certified levels
DEFAULT_BUDGET = 32
# nets up to this level enumerate the grid and carry certified radii
CERTIFIED_MAX_N = 3
# subconfigurations enumerated before falling back to sampling
SUBSET_BUDGET = 500_000
MEMBER_NODE_LIMIT = 20_000
DEFECT_NODE_LIMIT = 5_000
PAIR_NODE_LIMIT = 20_000
PAIR_BUDGET = 4_000

Element = FiniteSpace | PointedSpace


@attrs.frozen
class PyramidHandle:
    """the pyramid of a finite space, or the maximal pyramid when `space` is None"""

    space: Optional[Element] = None
    pointed: bool = False

    def __attrs_post_init__(self):
        if self.space is not None and isinstance(self.space, PointedSpace) != self.pointed:
            raise ValueError("handle pointedness does not match its space")

    @classmethod
    def of(cls, S: Element) -> "PyramidHandle":
        return cls(S, isinstance(S, PointedSpace))

    @classmethod
    def maximal(cls, pointed: bool = False) -> "PyramidHandle":
        return cls(None, pointed)

    @property
    def is_max(self) -> bool:
        return self.space is None

    @property
    def label(self) -> str:
        if self.space is None:
            return "max"
        return self.space.label or f"{self.space.n}-point space"

    @property
    def diameter(self) -> float:
        if self.space is None:
            return INF
        return float(np.max(self.space.rows))

    @property
    def radius(self) -> float:
        if self.space is None:
            return INF
        if isinstance(self.space, PointedSpace):
            return float(max(self.space.rows[self.space.base]))
        return self.diameter

    def largest_member(self, N: int) -> int:
        return N if self.space is None else min(N, self.space.n)


@attrs.frozen
class _Flavor:
    pointed: bool

    def wrap(self, m) -> Element:
        S = FiniteSpace(m)
        return PointedSpace(S, 0) if self.pointed else S

    def key(self, e: Element):
        return canonical_key(e.rows, e.base if self.pointed else None)

    def member(self, e: Element, target: Element, tol: float, limit: int = MEMBER_NODE_LIMIT) -> Optional[bool]:
        fixed = {e.base: target.base} if self.pointed else None
        try:
            return dominating_map(e.rows, target.rows, tol, fixed, limit) is not None
        except SizeLimitExceeded:
            return None

    def defect(self, e: Element, target: Element, limit: int = DEFECT_NODE_LIMIT) -> float:
        """least widening defect of e into target, 0 when the search gives up"""
        fixed = {e.base: target.base} if self.pointed else None
        try:
            return defect_search(e.rows, target.rows, fixed, limit).defect
        except SizeLimitExceeded:
            return 0.0

    def gh(self, a: Element, b: Element) -> Interval:
        if not self.pointed:
            return gh_interval(a, b, PAIR_NODE_LIMIT, PAIR_BUDGET).value
        try:
            return gh_pointed(a, b, PAIR_NODE_LIMIT).value
        except SizeLimitExceeded:
            return gh_pointed_bounds(a, b, PAIR_BUDGET).value

    def cheap(self, a: Element, b: Element) -> float:
        return gh_lower_bound(a, b)

    def maximal_element(self, k: int, D: float) -> Element:
        S = sigma(k, D)
        return PointedSpace(S, 0) if self.pointed else S

    def single(self) -> Element:
        return PointedSpace(point(), 0) if self.pointed else point()

    def truncated_rows(self, S: Element, idx: Sequence[int], D: float) -> list[list[float]]:
        rows = S.rows
        return [[min(rows[i][j], D) for j in idx] for i in idx]

    def index_sets(self, S: Element, N: int):
        """index tuples of every subconfiguration with <= N points, base first when pointed"""
        if not self.pointed:
            for k in range(1, min(N, S.n) + 1):
                yield from itertools.combinations(range(S.n), k)
            return
        others = [i for i in range(S.n) if i != S.base]
        for k in range(0, min(N, S.n) - 1 + 1):
            for rest in itertools.combinations(others, k):
                yield (S.base, *rest)

    def count_index_sets(self, S: Element, N: int) -> int:
        if not self.pointed:
            return sum(math.comb(S.n, k) for k in range(1, min(N, S.n) + 1))
        return sum(math.comb(S.n - 1, k) for k in range(0, min(N, S.n)))

    def random_index_set(self, S: Element, N: int, rng: np.random.Generator) -> tuple:
        k = int(rng.integers(1, min(N, S.n) + 1))
        if not self.pointed:
            return tuple(sorted(int(i) for i in rng.choice(S.n, size=k, replace=False)))
        others = [i for i in range(S.n) if i != S.base]
        rest = rng.choice(len(others), size=k - 1, replace=False) if k > 1 else []
        return (S.base, *sorted(others[int(i)] for i in rest))

    def rounded_up(self, S: Element, delta: float, D: float) -> Element:
        if self.pointed:
            return PointedSpace(ceil_to_grid(S.space, delta, D), S.base)
        return ceil_to_grid(S, delta, D)

    def truncated(self, S: Element, D: float) -> Element:
        return truncate_pointed(S, D) if self.pointed else truncate(S, D)


def _flavor(handle: PyramidHandle) -> _Flavor:
    return _Flavor(handle.pointed)


@lru_cache(maxsize=64)
def _grid_universe(N: int, D: float, delta: float, pointed: bool) -> tuple:
    """every grid metric on <= 3 points, one per isometry class"""
    if N > CERTIFIED_MAX_N:
        raise ValueError(f"grid universes are enumerated up to {CERTIFIED_MAX_N} points, got N={N}")
    flavor = _Flavor(pointed)
    values = grid_values(D, delta)
    slack = 1e-9 * delta
    out = [flavor.single()]
    if N >= 2:
        out += [flavor.wrap([[0, v], [v, 0]]) for v in values]
    if N >= 3:
        if not pointed:
            for a, b, c in itertools.combinations_with_replacement(values, 3):
                if c <= a + b + slack:
                    out.append(flavor.wrap([[0, a, b], [a, 0, c], [b, c, 0]]))
        else:
            for a, b in itertools.combinations_with_replacement(values, 2):
                for c in values:
                    if b - a - slack <= c <= a + b + slack:
                        out.append(flavor.wrap([[0, a, b], [a, 0, c], [b, c, 0]]))
    return tuple(out)


def grid_universe(N: int, D: float, delta: float, pointed: bool = False) -> list[Element]:
    return list(_grid_universe(N, float(D), float(delta), pointed))


@attrs.frozen
class SliceNet:
    N: int
    D: float
    delta: float
    elements: tuple
    net_radius: float
    certified: bool
    pointed: bool = False
    # subconfigurations were sampled rather than enumerated
    sampled: bool = False

    def __len__(self):
        return len(self.elements)

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "D": self.D,
            "delta": self.delta,
            "net_radius": self.net_radius,
            "certified": self.certified,
            "sampled": self.sampled,
            "elements": [space_to_json(e) for e in self.elements],
        }


def member(Y: Element, P: PyramidHandle, tol: float = DEFAULT_TOL) -> bool:
    """Y belongs to the pyramid P; raises SizeLimitExceeded when undecided"""
    if P.is_max:
        return True
    fixed = {Y.base: P.space.base} if P.pointed else None
    return dominating_map(Y.rows, P.space.rows, tol, fixed) is not None


def _dedup(flavor: _Flavor, items: Sequence[Element], keys: Optional[dict] = None) -> dict:
    keys = {} if keys is None else keys
    for e in items:
        keys.setdefault(flavor.key(e), e)
    return keys


def _subconfigurations(
    flavor: _Flavor, S: Element, N: int, D: float, budget: int, rng: np.random.Generator
) -> tuple[list[Element], bool]:
    """isometry classes of <= N point subsets of S ^ D; flag says whether all were seen"""
    total = flavor.count_index_sets(S, N)
    exhaustive = total <= budget
    if exhaustive:
        sets = flavor.index_sets(S, N)
    else:
        sets = (flavor.random_index_set(S, N, rng) for _ in range(budget))
    found: dict = {}
    for idx in sets:
        rows = flavor.truncated_rows(S, idx, D)
        key = canonical_key(rows, 0 if flavor.pointed else None)
        if key not in found:
            found[key] = flavor.wrap(rows)
    _log.debug("subconfigurations: %d classes from %s sets (exhaustive=%s)", len(found), total, exhaustive)
    return list(found.values()), exhaustive


def _perturbations(
    flavor: _Flavor, seeds: Sequence[Element], delta: float, count: int, rng: np.random.Generator
) -> list[Element]:
    """grid metrics entrywise below some seed, so members whenever the seed is"""
    usable = [e for e in seeds if e.n >= 2]
    out = []
    for _ in range(count if usable else 0):
        base = usable[int(rng.integers(len(usable)))]
        m = np.array([[grid_floor(v, delta) for v in row] for row in base.rows])
        off = ~np.eye(base.n, dtype=bool)
        if (m[off] < delta).any():
            continue
        drop = np.triu(rng.random(m.shape) < 0.3, k=1) & (m >= 2 * delta)
        m = m - delta * (drop | drop.T)
        out.append(flavor.wrap(floyd_warshall(m)))
    return out


def _random_grid(flavor: _Flavor, N: int, D: float, delta: float, count: int, rng: np.random.Generator) -> list[Element]:
    values = np.array(grid_values(D, delta))
    out = []
    for _ in range(count):
        k = int(rng.integers(2, N + 1))
        m = np.triu(rng.choice(values, size=(k, k)), k=1)
        out.append(flavor.wrap(floyd_warshall(m + m.T)))
    return out


def _certified_net(handle: PyramidHandle, N: int, D: float, delta: float, budget: int, tol: float, seed: int) -> SliceNet:
    flavor = _flavor(handle)
    universe = grid_universe(N, D, delta, handle.pointed)
    if handle.is_max:
        return SliceNet(N, D, delta, tuple(universe), delta / 2, True, handle.pointed)

    S = handle.space
    members = [G for G in universe if flavor.member(G, S, tol)]
    rounded = flavor.rounded_up(S, delta, D)
    if rounded.rows == flavor.truncated(S, D).rows:
        return SliceNet(N, D, delta, tuple(members), delta / 2, True, handle.pointed)

    # off the grid: exact subconfigurations join the net and the rounded-up
    # space's grid members measure how far the slice can stray from it
    rng = np.random.Generator(np.random.PCG64(seed))
    subs, exhaustive = _subconfigurations(flavor, S, N, D, min(budget * 1000, SUBSET_BUDGET), rng)
    known = _dedup(flavor, members)
    _dedup(flavor, subs, known)
    elements = list(known.values())
    outer = [G for G in universe if flavor.key(G) not in known and flavor.member(G, rounded, tol)]
    slack = 0.0
    if outer:
        slack = directed_hausdorff(outer, elements, flavor.gh, flavor.cheap).hi
    _log.debug("off-grid net N=%d: %d elements, %d outer, slack %s", N, len(elements), len(outer), slack)
    return SliceNet(N, D, delta, tuple(elements), delta / 2 + slack, True, handle.pointed, not exhaustive)


def _sampled_net(handle: PyramidHandle, N: int, D: float, delta: float, budget: int, seed: int) -> SliceNet:
    flavor = _flavor(handle)
    rng = np.random.Generator(np.random.PCG64(seed))
    if handle.is_max:
        picked = [flavor.maximal_element(k, D) for k in range(1, N + 1)]
        picked += _random_grid(flavor, N, D, delta, budget, rng)
        exhaustive = False
    else:
        picked, exhaustive = _subconfigurations(flavor, handle.space, N, D, budget, rng)
        picked += _perturbations(flavor, picked, delta, budget // 2, rng)
    elements = tuple(_dedup(flavor, picked).values())
    return SliceNet(N, D, delta, elements, delta, False, handle.pointed, not exhaustive)


@lru_cache(maxsize=512)
def slice_net(
    handle: PyramidHandle,
    N: int,
    D: Optional[float] = None,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
) -> SliceNet:
    """
    a finite net of S(N, D), D defaulting to N.

    levels up to 3 enumerate every grid metric and carry certified radii;
    higher levels sample subconfigurations and grid metrics below them, and
    report delta as an uncertified radius.

    nets are cached per argument tuple, handles hash by their distances.
    """
    D = float(N if D is None else D)
    if N < 1 or not D > 0 or not delta > 0:
        raise ValueError(f"slice needs N >= 1, D > 0, delta > 0; got N={N} D={D} delta={delta}")
    started = time.monotonic()
    if N == 1:
        net = SliceNet(N, D, delta, (_flavor(handle).single(),), 0.0, True, handle.pointed)
    elif N <= CERTIFIED_MAX_N:
        net = _certified_net(handle, N, D, delta, budget, tol, seed)
    else:
        net = _sampled_net(handle, N, D, delta, budget, seed)
    _log.debug(
        "net %s N=%d D=%s: %d elements, radius %s, certified=%s, %.2fs",
        handle.label,
        N,
        D,
        len(net),
        net.net_radius,
        net.certified,
        time.monotonic() - started,
    )
    return net


def covers(
    A: PyramidHandle,
    B: PyramidHandle,
    N: int,
    D: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    subset_budget: int = SUBSET_BUDGET,
) -> Optional[bool]:
    """
    whether S_A(N, D) lies inside S_B(N, D); None when it could not be decided.
    """
    D = float(N if D is None else D)
    flavor = _flavor(A)
    if B.is_max or N == 1:
        return True
    if A.is_max:
        return flavor.member(flavor.maximal_element(N, D), B.space, tol)
    if A.space == B.space:
        return True
    if N == 2:
        # two-point members are exactly the distances up to diam (or rad when pointed)
        reach_a = A.radius if A.pointed else A.diameter
        reach_b = B.radius if B.pointed else B.diameter
        return min(reach_a, D) <= min(reach_b, D) + tol
    if flavor.member(A.space, B.space, tol) or flavor.member(flavor.truncated(A.space, D), B.space, tol):
        return True
    if flavor.count_index_sets(A.space, N) > subset_budget:
        return None
    subs, _ = _subconfigurations(flavor, A.space, N, D, subset_budget, np.random.Generator(np.random.PCG64(0)))
    undecided = False
    for e in subs:
        found = flavor.member(e, B.space, tol)
        if found is False:
            return False
        undecided = undecided or found is None
    return None if undecided else True


@attrs.frozen
class SliceBound:
    value: Interval
    certified: bool
    how: str


def _structural(flavor: _Flavor, e: Element, B: PyramidHandle, N: int, D: float, capped: Optional[Element]) -> float:
    """
    lower bound on the GH distance from e to anything in S_B(N, D).

    a member w of S_B at distance t from e makes e 2t-almost dominated by
    B ^ D (through w), so half the least defect of e into B ^ D bounds t.
    """
    rows = e.rows
    diam = float(np.max(rows))
    bound = max(0.0, (diam - min(B.diameter, D)) / 2)
    if e.n > B.largest_member(N):
        sep = min(rows[i][j] for i in range(e.n) for j in range(e.n) if i != j)
        bound = max(bound, sep / 2)
    if flavor.pointed:
        bound = max(bound, (max(rows[e.base]) - min(B.radius, D)) / 2)
    if capped is not None:
        bound = max(bound, flavor.defect(e, capped) / 2)
    return bound


@attrs.frozen
class _Row:
    lo: float
    hi: float
    settled: bool


def _row_facts(
    flavor: _Flavor, B: PyramidHandle, N: int, D: float, tol: float, capped: Optional[Element], e: Element
) -> _Row:
    if B.is_max or flavor.member(e, B.space, tol):
        return _Row(0.0, 0.0, True)
    return _Row(_structural(flavor, e, B, N, D, capped), float(np.max(e.rows)) / 2, False)


def _row_search(flavor: _Flavor, targets: tuple, radius: float, item: tuple) -> _Row:
    e, facts = item
    near = directed_hausdorff([e], targets, flavor.gh, flavor.cheap)
    return _Row(max(facts.lo, near.lo - radius), min(facts.hi, near.hi), True)


async def _directed(
    net_a: SliceNet, net_b: SliceNet, A: PyramidHandle, B: PyramidHandle, tol: float, pool: WorkerPool
) -> Interval:
    """bounds on sup over S_A of the GH distance to S_B"""
    flavor = _flavor(A)
    N, D = net_a.N, net_a.D
    capped = None if B.is_max else flavor.truncated(B.space, D)
    facts = await pool.map(lambda e: _row_facts(flavor, B, N, D, tol, capped, e), net_a.elements)
    floor = max(r.lo for r in facts)
    open_rows = [(e, r) for e, r in zip(net_a.elements, facts) if not r.settled and r.hi > floor]
    searched = await pool.map(lambda item: _row_search(flavor, net_b.elements, net_b.net_radius, item), open_rows)
    rows = [r for r in facts if r.settled or r.hi <= floor] + searched
    lo = max(r.lo for r in rows)
    hi = net_a.net_radius + max(r.hi for r in rows)
    cap = min(A.diameter, D) / 2
    return Interval.clamped(lo, min(hi, cap))


def _same(A: PyramidHandle, B: PyramidHandle) -> bool:
    return A.pointed == B.pointed and A.space == B.space


async def slice_hausdorff(
    A: PyramidHandle,
    B: PyramidHandle,
    N: int,
    D: Optional[float] = None,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    pool: Optional[WorkerPool] = None,
) -> SliceBound:
    """Hausdorff distance between S_A(N, D) and S_B(N, D)"""
    if A.pointed != B.pointed:
        raise ValueError("cannot compare a pointed pyramid with an unpointed one")
    D = float(N if D is None else D)
    pool = pool or WorkerPool()
    if N == 1 or _same(A, B):
        return SliceBound(Interval.point(0.0), True, "trivial")

    ab = await pool.run(covers, A, B, N, D, tol)
    ba = await pool.run(covers, B, A, N, D, tol)
    if ab is True and ba is True:
        return SliceBound(Interval.point(0.0), True, "containment")

    nets: list = [None, None]

    async def _build(k: int, handle: PyramidHandle):
        nets[k] = await pool.run(slice_net, handle, N, D, delta, budget, tol, seed)

    async with trio.open_nursery() as nursery:
        nursery.start_soon(_build, 0, A)
        nursery.start_soon(_build, 1, B)
    net_a, net_b = nets

    forward = Interval.point(0.0) if ab is True else await _directed(net_a, net_b, A, B, tol, pool)
    backward = Interval.point(0.0) if ba is True else await _directed(net_b, net_a, B, A, tol, pool)
    value = Interval.clamped(max(forward.lo, backward.lo), max(forward.hi, backward.hi))
    return SliceBound(value, net_a.certified and net_b.certified, "nets")


async def rho_N(
    A: PyramidHandle,
    B: PyramidHandle,
    N: int,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    pool: Optional[WorkerPool] = None,
) -> Interval:
    bound = await slice_hausdorff(A, B, N, N, delta, budget, tol, seed, pool)
    return bound.value


def tail_bound(A: PyramidHandle, B: PyramidHandle, n_max: int) -> float:
    """sum over N > n_max of 2^-N * rho_N's cap, 1/2 * min(N, larger diameter)"""
    reach = max(A.diameter, B.diameter)
    if math.isinf(reach):
        return worst_case_tail(n_max) / 2
    # levels below `reach` are capped by N, the rest by reach
    first_flat = max(n_max + 1, math.ceil(reach))
    total = sum(N * 2.0**-N for N in range(n_max + 1, first_flat)) / 2
    return total + reach * 2.0 ** -(first_flat - 1) / 2


def worst_case_tail(n_max: int) -> float:
    return (n_max + 2) * 2.0**-n_max


@attrs.frozen
class RhoEstimate:
    """
    total = sum of 2^-N * per_N plus [0, tail_bound].

    tail_bound sums 2^-N * 1/2 * min(N, larger diameter) over the levels past
    n_max. it never exceeds the diameter-free bound (n_max + 2) 2^-n_max,
    reported alongside as worst_case_tail.
    """

    per_N: dict
    certified: dict
    tail_bound: float
    total: Interval

    @property
    def n_max(self) -> int:
        return max(self.per_N)

    @property
    def worst_case_tail(self) -> float:
        return worst_case_tail(self.n_max)

    def to_json(self) -> dict:
        return {
            "per_N": [
                {"N": N, "lo": iv.lo, "hi": iv.hi, "certified": self.certified[N]} for N, iv in sorted(self.per_N.items())
            ],
            "tail": self.tail_bound,
            "tail_worst_case": self.worst_case_tail,
            "lo": self.total.lo,
            "hi": self.total.hi,
        }


async def rho(
    A: PyramidHandle,
    B: PyramidHandle,
    n_max: int = DEFAULT_NMAX,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    pool: Optional[WorkerPool] = None,
) -> RhoEstimate:
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    pool = pool or WorkerPool()
    slots: list = [None] * n_max

    async def _level(N: int):
        started = time.monotonic()
        slots[N - 1] = await slice_hausdorff(A, B, N, N, delta, budget, tol, seed, pool)
        _log.debug("rho_%d(%s, %s) = %s in %.2fs", N, A.label, B.label, slots[N - 1].value, time.monotonic() - started)

    async with trio.open_nursery() as nursery:
        for N in range(1, n_max + 1):
            nursery.start_soon(_level, N)

    tail = tail_bound(A, B, n_max)
    weighted = sum((s.value.scaled(2.0**-N) for N, s in enumerate(slots, 1)), Interval.point(0.0))
    return RhoEstimate(
        per_N={N: s.value for N, s in enumerate(slots, 1)},
        certified={N: s.certified for N, s in enumerate(slots, 1)},
        tail_bound=tail,
        total=Interval.clamped(weighted.lo, weighted.hi + tail),
    )


async def slice_converge_report(
    sequence: Sequence[PyramidHandle],
    target: PyramidHandle,
    N: int,
    D: Optional[float] = None,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
    tol: float = DEFAULT_TOL,
    pool: Optional[WorkerPool] = None,
) -> list[SliceBound]:
    pool = pool or WorkerPool()
    report = []
    for handle in sequence:
        report.append(await slice_hausdorff(handle, target, N, D, delta, budget, tol, pool=pool))
    return report


def join(e1: Element, e2: Element, handle: PyramidHandle, D: float, tol: float = DEFAULT_TOL) -> Element:
    """a member of S(|e1| + |e2|, D) dominating both e1 and e2"""
    if handle.is_max:
        raise ValueError("the maximal pyramid joins through sigma spaces, pass a finite handle")
    flavor = _flavor(handle)
    S = handle.space
    fixed = {}
    images: list[int] = []
    for e in (e1, e2):
        if flavor.pointed:
            fixed = {e.base: S.base}
        found = dominating_map(e.rows, S.rows, tol, fixed or None)
        if found is None:
            raise ValueError("element is not a member of the pyramid")
        images.extend(found.assignment)
    idx = sorted(set(images))
    if flavor.pointed:
        idx = [S.base] + [i for i in idx if i != S.base]
    return flavor.wrap(flavor.truncated_rows(S, idx, D))
