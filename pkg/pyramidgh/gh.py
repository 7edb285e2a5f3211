"""
Gromov-Hausdorff distance between finite metric spaces through correspondences.

    d_GH(X, Y) = 1/2 * min over correspondences R of dis(R)
    dis(R)     = max |dX(x, x') - dY(y, y')| over (x, y), (x', y') in R

the exact solver is a branch-and-bound over sets of pairs: a node covers one
still uncovered point, children are ordered by the distortion they add, and a
branch dies once its forward-checked lower bound reaches the incumbent.
"""

import bisect
import itertools
import logging
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import attrs
import numpy as np

from .metric import INF, FiniteSpace, InfiniteEntryError, Interval, PointedSpace
from .typing import Pair, Rows

_log = logging.getLogger(__name__)

DEFAULT_NODE_LIMIT = 200_000
DEFAULT_BUDGET = 20_000
# at most this many distance values feed the packing bound
PACKING_LEVELS = 16

T = TypeVar("T")
U = TypeVar("U")


class SizeLimitExceeded(Exception):
    def __init__(self, nodes: int, limit: int):
        self.nodes = nodes
        self.limit = limit
        super().__init__(f"search gave up after {nodes} nodes (limit {limit}); try the bounded solver")


class EmptySetError(Exception):
    ...


def _covers(pairs: Iterable[Pair], nx: int, ny: int) -> bool:
    pairs = list(pairs)
    return {a for a, _ in pairs} == set(range(nx)) and {b for _, b in pairs} == set(range(ny))


@attrs.frozen
class Correspondence:
    pairs: frozenset = attrs.field(converter=frozenset)

    @classmethod
    def from_maps(cls, f: Sequence[int], g: Sequence[int]) -> "Correspondence":
        """graph of f: X -> Y united with the transposed graph of g: Y -> X"""
        return cls({(a, b) for a, b in enumerate(f)} | {(a, b) for b, a in enumerate(g)})

    def is_correspondence(self, nx: int, ny: int) -> bool:
        return _covers(self.pairs, nx, ny)

    def sorted(self) -> list[Pair]:
        return sorted(self.pairs)


@attrs.frozen
class GhResult:
    value: Interval
    witness: Optional[Correspondence]
    method: str
    nodes: int = 0

    @property
    def exact(self) -> bool:
        return self.method == "exact"


def _pair_distortion(dx: Rows, dy: Rows, pairs: Sequence[Pair]) -> float:
    if len(pairs) < 2:
        return 0.0
    a = np.fromiter((p[0] for p in pairs), dtype=int)
    b = np.fromiter((p[1] for p in pairs), dtype=int)
    mx = np.asarray(dx)[np.ix_(a, a)]
    my = np.asarray(dy)[np.ix_(b, b)]
    both_inf = np.isinf(mx) & np.isinf(my)
    with np.errstate(invalid="ignore"):
        diff = np.abs(mx - my)
    diff[both_inf] = 0.0
    return float(diff.max())


def distortion(X: FiniteSpace, Y: FiniteSpace, C: Correspondence) -> float:
    if not C.is_correspondence(X.n, Y.n):
        raise ValueError("pairs do not cover both spaces")
    return _pair_distortion(X.rows, Y.rows, C.sorted())


def _reject_infinite(*spaces: FiniteSpace):
    for S in spaces:
        if S.has_infinite:
            raise InfiniteEntryError(f"{S.label or 'space'} has infinite distances; truncate it first")


def _line_hausdorff(a: Sequence[float], b: Sequence[float]) -> float:
    """Hausdorff distance between two sorted non-empty sets of reals"""

    def directed(src, dst):
        worst = 0.0
        for v in src:
            k = bisect.bisect_left(dst, v)
            near = INF
            if k < len(dst):
                near = dst[k] - v
            if k > 0:
                near = min(near, v - dst[k - 1])
            worst = max(worst, near)
        return worst

    return max(directed(a, b), directed(b, a))


def _values(d: Rows) -> list[float]:
    return sorted({v for row in d for v in row})


def _profile_bound(dx: Rows, dy: Rows) -> float:
    px = sorted({tuple(sorted(row)) for row in dx})
    py = sorted({tuple(sorted(row)) for row in dy})
    table = [[_line_hausdorff(rx, ry) for ry in py] for rx in px]
    forward = max(min(row) for row in table)
    backward = max(min(table[i][j] for i in range(len(px))) for j in range(len(py)))
    return max(forward, backward)


def _separated_size(d: Rows, a: float) -> int:
    """largest greedy a-separated set, trying every start point"""
    n = len(d)
    best = 0
    for start in range(n):
        chosen = [start]
        for k in itertools.chain(range(start + 1, n), range(start)):
            if all(d[k][c] >= a for c in chosen):
                chosen.append(k)
        best = max(best, len(chosen))
    return best


def _clique_cover(d: Rows, b: float) -> int:
    """greedy cover by groups of mutual distance < b; bounds every b-separated set"""
    groups: list[list[int]] = []
    for k in range(len(d)):
        for g in groups:
            if all(d[k][m] < b for m in g):
                g.append(k)
                break
        else:
            groups.append([k])
    return len(groups)


def _thresholds(values: list[float]) -> list[float]:
    positive = [v for v in values if v > 0]
    if len(positive) <= PACKING_LEVELS:
        return positive
    step = (len(positive) - 1) / (PACKING_LEVELS - 1)
    return sorted({positive[round(k * step)] for k in range(PACKING_LEVELS)})


def _packing_bound(dx: Rows, dy: Rows) -> float:
    """
    an a-separated set of size s in Y forces dis >= a - b for every b with
    fewer than s points of X pairwise >= b apart
    """
    vx = [v for v in _values(dx) if v > 0]
    if not vx:
        return 0.0
    levels_x = _thresholds(vx)
    covers = {v: _clique_cover(dx, v) for v in levels_x}
    best = 0.0
    for a in _thresholds(_values(dy)):
        s = _separated_size(dy, a)
        if s <= 1:
            continue
        if len(dx) < s:
            best = max(best, a)
            continue
        cut = next((v for v in levels_x if covers[v] < s), None)
        if cut is None:
            continue
        k = bisect.bisect_left(vx, cut)
        reach = vx[k - 1] if k > 0 else 0.0
        best = max(best, a - reach)
    return best


def distortion_lower_bound(dx: Rows, dy: Rows, seed: Sequence[Pair] = (), packing: bool = True) -> float:
    """a lower bound on the distortion of any correspondence containing `seed`"""
    vx, vy = _values(dx), _values(dy)
    bound = max(abs(vx[-1] - vy[-1]), _line_hausdorff(vx, vy), _profile_bound(dx, dy))
    if packing:
        bound = max(bound, _packing_bound(dx, dy), _packing_bound(dy, dx))
    for a, b in seed:
        bound = max(bound, _line_hausdorff(sorted(dx[a]), sorted(dy[b])))
    return bound


def _greedy(dx: Rows, dy: Rows, seed: Sequence[Pair]) -> list[Pair]:
    chosen = list(seed)
    nx, ny = len(dx), len(dy)

    def added(a, b):
        return max((abs(dx[a][i] - dy[b][j]) for i, j in chosen), default=0.0)

    seen_x = {a for a, _ in chosen}
    for a in sorted(range(nx), key=lambda i: -max(dx[i])):
        if a not in seen_x:
            b = min(range(ny), key=lambda j: (added(a, j), j))
            chosen.append((a, b))
    seen_y = {b for _, b in chosen}
    for b in range(ny):
        if b not in seen_y:
            a = min(range(nx), key=lambda i: (added(i, b), i))
            chosen.append((a, b))
    return chosen


def _polish(dx: Rows, dy: Rows, pairs: list[Pair], budget: int, frozen: int) -> tuple[list[Pair], float, int]:
    """first-improvement local search over single pair moves"""
    nx, ny = len(dx), len(dy)
    pairs = list(pairs)
    best = _pair_distortion(dx, dy, pairs)
    spent = 0
    improved = True
    while improved and spent < budget and best > 0:
        improved = False
        for k in range(frozen, len(pairs)):
            a, b = pairs[k]
            others = pairs[:k] + pairs[k + 1 :]
            x_kept = any(p[0] == a for p in others)
            y_kept = any(p[1] == b for p in others)
            moves = []
            if x_kept:
                moves += [(a2, b) for a2 in range(nx) if a2 != a]
            if y_kept:
                moves += [(a, b2) for b2 in range(ny) if b2 != b]
            for move in moves:
                spent += 1
                trial = others + [move]
                value = _pair_distortion(dx, dy, trial)
                if value < best:
                    pairs, best, improved = trial, value, True
                    break
                if spent >= budget:
                    break
            if improved or spent >= budget:
                break
    return pairs, best, spent


@attrs.define
class _CorrespondenceSearch:
    _dx: Rows
    _dy: Rows
    _limit: int
    # a proven lower bound; reaching it ends the search
    _floor: float = 0.0
    _chosen: list = attrs.field(init=False, factory=list)
    _cover_x: list = attrs.field(init=False)
    _cover_y: list = attrs.field(init=False)
    best: float = attrs.field(init=False, default=INF)
    best_pairs: Optional[tuple] = attrs.field(init=False, default=None)
    nodes: int = attrs.field(init=False, default=0)

    def __attrs_post_init__(self):
        self._cover_x = [0] * len(self._dx)
        self._cover_y = [0] * len(self._dy)

    def offer(self, pairs: Sequence[Pair], value: float):
        if value < self.best:
            self.best = value
            self.best_pairs = tuple(pairs)

    def _added(self, a: int, b: int) -> float:
        rx, ry = self._dx[a], self._dy[b]
        worst = 0.0
        for i, j in self._chosen:
            v = abs(rx[i] - ry[j])
            if v > worst:
                worst = v
        return worst

    def _push(self, a: int, b: int):
        self._chosen.append((a, b))
        self._cover_x[a] += 1
        self._cover_y[b] += 1

    def _pop(self):
        a, b = self._chosen.pop()
        self._cover_x[a] -= 1
        self._cover_y[b] -= 1

    def run(self, seed: Sequence[Pair]):
        for a, b in seed:
            self._push(a, b)
        self._descend(_pair_distortion(self._dx, self._dy, list(seed)))
        for _ in seed:
            self._pop()

    def _descend(self, cost: float):
        self.nodes += 1
        if self.nodes > self._limit:
            raise SizeLimitExceeded(self.nodes, self._limit)
        if self.best <= self._floor:
            return

        pick: Optional[list] = None
        pick_bound = -1.0
        nx, ny = len(self._dx), len(self._dy)
        open_vars = [(a, None) for a in range(nx) if not self._cover_x[a]]
        open_vars += [(None, b) for b in range(ny) if not self._cover_y[b]]
        for a, b in open_vars:
            if b is None:
                pairs = [(a, j) for j in range(ny)]
            else:
                pairs = [(i, b) for i in range(nx)]
            live = []
            for p in pairs:
                c = max(cost, self._added(*p))
                if c < self.best:
                    live.append((c, p))
            if not live:
                return
            live.sort()
            lead = live[0][0]
            if lead >= self.best:
                return
            if pick is None or lead > pick_bound or (lead == pick_bound and len(live) < len(pick)):
                pick, pick_bound = live, lead

        if pick is None:
            self.offer(self._chosen, cost)
            return

        for c, (a, b) in pick:
            if c >= self.best:
                break
            self._push(a, b)
            self._descend(c)
            self._pop()


def _solve_exact(dx: Rows, dy: Rows, seed: Sequence[Pair], limit: int) -> GhResult:
    floor = distortion_lower_bound(dx, dy, seed, packing=False)
    start = _greedy(dx, dy, seed)
    search = _CorrespondenceSearch(dx, dy, limit, floor)
    search.offer(start, _pair_distortion(dx, dy, start))
    search.run(seed)
    _log.debug("exact search: %dx%d, %d nodes, dis=%s", len(dx), len(dy), search.nodes, search.best)
    value = search.best / 2
    return GhResult(Interval.point(value), Correspondence(search.best_pairs), "exact", search.nodes)


def _solve_bounded(dx: Rows, dy: Rows, seed: Sequence[Pair], budget: int) -> GhResult:
    lower = distortion_lower_bound(dx, dy, seed)
    start = _greedy(dx, dy, seed)
    pairs, upper, spent = _polish(dx, dy, start, budget // 2, len(seed))
    search = _CorrespondenceSearch(dx, dy, max(budget - spent, 1), lower)
    search.offer(pairs, upper)
    try:
        search.run(seed)
    except SizeLimitExceeded:
        _log.debug("bounded search: %dx%d, gap [%s, %s]", len(dx), len(dy), lower, search.best)
        value = Interval.clamped(lower / 2, search.best / 2)
        return GhResult(value, Correspondence(search.best_pairs), "bounded", search.nodes)
    value = search.best / 2
    return GhResult(Interval.point(value), Correspondence(search.best_pairs), "exact", search.nodes)


def gh_exact(X: FiniteSpace, Y: FiniteSpace, limit: int = DEFAULT_NODE_LIMIT) -> GhResult:
    """raises SizeLimitExceeded once the search passes `limit` nodes"""
    _reject_infinite(X, Y)
    return _solve_exact(X.rows, Y.rows, (), limit)


def gh_bounds(X: FiniteSpace, Y: FiniteSpace, budget: int = DEFAULT_BUDGET) -> GhResult:
    _reject_infinite(X, Y)
    return _solve_bounded(X.rows, Y.rows, (), budget)


def gh_pointed(P: PointedSpace, Q: PointedSpace, limit: int = DEFAULT_NODE_LIMIT) -> GhResult:
    """only correspondences pairing the two bases are admitted"""
    _reject_infinite(P.space, Q.space)
    return _solve_exact(P.rows, Q.rows, [(P.base, Q.base)], limit)


def gh_pointed_bounds(P: PointedSpace, Q: PointedSpace, budget: int = DEFAULT_BUDGET) -> GhResult:
    _reject_infinite(P.space, Q.space)
    return _solve_bounded(P.rows, Q.rows, [(P.base, Q.base)], budget)


def gh_interval(
    X: FiniteSpace, Y: FiniteSpace, limit: int = DEFAULT_NODE_LIMIT, budget: int = DEFAULT_BUDGET
) -> GhResult:
    try:
        return gh_exact(X, Y, limit)
    except SizeLimitExceeded:
        return gh_bounds(X, Y, budget)


def gh_lower_bound(X: FiniteSpace | PointedSpace, Y: FiniteSpace | PointedSpace) -> float:
    """cheap certified lower bound, no search"""
    seed = [(X.base, Y.base)] if isinstance(X, PointedSpace) and isinstance(Y, PointedSpace) else ()
    return distortion_lower_bound(X.rows, Y.rows, seed, packing=False) / 2


def _row_min(a: T, B: Sequence[U], pairwise: Callable[[T, U], Interval], cheap) -> Interval:
    if cheap is None:
        ordered = [(0.0, k) for k in range(len(B))]
    else:
        ordered = sorted((cheap(a, b), k) for k, b in enumerate(B))
    lo = hi = INF
    for bound, k in ordered:
        if bound >= hi:
            lo = min(lo, bound)
            break
        iv = pairwise(a, B[k])
        lo = min(lo, iv.lo)
        hi = min(hi, iv.hi)
    return Interval.clamped(lo, hi)


def directed_hausdorff(
    A: Sequence[T],
    B: Sequence[U],
    pairwise: Callable[[T, U], Interval],
    cheap: Optional[Callable[[T, U], float]] = None,
) -> Interval:
    """
    max over a of min over b of pairwise(a, b), as an interval.

    with `cheap` (a lower bound of pairwise) a row stops evaluating once the
    remaining candidates cannot beat its best upper bound.
    """
    if not A or not B:
        raise EmptySetError("Hausdorff distance needs two non-empty sets")
    lo = hi = 0.0
    for a in A:
        row = _row_min(a, B, pairwise, cheap)
        lo, hi = max(lo, row.lo), max(hi, row.hi)
    return Interval(lo, hi)


def hausdorff_between_sets(
    A: Sequence[T],
    B: Sequence[U],
    pairwise: Callable,
    cheap: Optional[Callable] = None,
) -> Interval:
    forward = directed_hausdorff(A, B, pairwise, cheap)
    backward = directed_hausdorff(B, A, lambda b, a: pairwise(a, b), None if cheap is None else (lambda b, a: cheap(a, b)))
    return Interval(max(forward.lo, backward.lo), max(forward.hi, backward.hi))

