"""
the order X <= Y: some map f: X -> Y never shrinks a distance.

    widening defect(f) = max over x, x' of (dX(x, x') - dY(f x, f x'))^+

X <= Y iff the smallest defect over all maps is zero. infinite distances
follow extended arithmetic: inf - inf counts as 0, inf - finite as inf.
"""

import logging
from typing import Optional

import attrs

from .gh import SizeLimitExceeded
from .metric import INF, FiniteSpace, PointedSpace, shortfall
from .typing import Assignment, Rows

_log = logging.getLogger(__name__)

PRECSIM_TOL = 1e-9
DEFAULT_NODE_LIMIT = 500_000


@attrs.frozen
class PointMap:
    assignment: Assignment = attrs.field(converter=tuple)

    def __call__(self, i: int) -> int:
        return self.assignment[i]

    def __len__(self):
        return len(self.assignment)

    def then(self, other: "PointMap") -> "PointMap":
        """self followed by other"""
        return PointMap(other.assignment[i] for i in self.assignment)


@attrs.frozen
class DefectResult:
    defect: float
    witness: PointMap
    nodes: int = 0


def map_defect(X: FiniteSpace, Y: FiniteSpace, f: PointMap) -> float:
    if len(f) != X.n or any(not 0 <= j < Y.n for j in f.assignment):
        raise ValueError("map does not send X into Y")
    dx, dy = X.rows, Y.rows
    worst = 0.0
    for i in range(X.n):
        for k in range(i + 1, X.n):
            worst = max(worst, shortfall(dx[i][k], dy[f(i)][f(k)]))
    return worst


@attrs.define
class _DefectSearch:
    _dx: Rows
    _dy: Rows
    _order: list
    _limit: int
    _assigned: dict = attrs.field(init=False, factory=dict)
    best: float = attrs.field(init=False, default=INF)
    best_map: Optional[tuple] = attrs.field(init=False, default=None)
    nodes: int = attrs.field(init=False, default=0)

    def _added(self, i: int, j: int) -> float:
        rx, ry = self._dx[i], self._dy[j]
        worst = 0.0
        for i2, j2 in self._assigned.items():
            v = shortfall(rx[i2], ry[j2])
            if v > worst:
                worst = v
        return worst

    def run(self, fixed: dict):
        self._assigned.update(fixed)
        cost = 0.0
        for i, j in fixed.items():
            for i2, j2 in fixed.items():
                cost = max(cost, shortfall(self._dx[i][i2], self._dy[j][j2]))
        self._descend(0, cost)

    def _descend(self, depth: int, cost: float):
        self.nodes += 1
        if self.nodes > self._limit:
            raise SizeLimitExceeded(self.nodes, self._limit)
        if depth == len(self._order):
            self.best = cost
            self.best_map = tuple(self._assigned[i] for i in range(len(self._dx)))
            return
        i = self._order[depth]
        options = sorted((max(cost, self._added(i, j)), j) for j in range(len(self._dy)))
        for c, j in options:
            if self.best_map is not None and (c >= self.best or self.best == 0):
                break
            self._assigned[i] = j
            self._descend(depth + 1, c)
            del self._assigned[i]


def defect_search(dx: Rows, dy: Rows, fixed: Optional[dict] = None, limit: int = DEFAULT_NODE_LIMIT) -> DefectResult:
    """smallest widening defect over maps of the rows dx into dy that extend `fixed`"""
    fixed = dict(fixed or {})
    free = [i for i in range(len(dx)) if i not in fixed]
    free.sort(key=lambda i: (-max(dx[i]), i))
    search = _DefectSearch(dx, dy, free, limit)
    search.run(fixed)
    return DefectResult(search.best, PointMap(search.best_map), search.nodes)


def widening_defect(X: FiniteSpace, Y: FiniteSpace, limit: int = DEFAULT_NODE_LIMIT) -> DefectResult:
    """smallest widening defect over all maps X -> Y, with a minimizer"""
    return defect_search(X.rows, Y.rows, {}, limit)


def widening_defect_pointed(P: PointedSpace, Q: PointedSpace, limit: int = DEFAULT_NODE_LIMIT) -> DefectResult:
    return defect_search(P.rows, Q.rows, {P.base: Q.base}, limit)


def _prefilter(dx: Rows, dy: Rows, tol: float) -> bool:
    """cheap necessary conditions for a dominating map"""
    nx, ny = len(dx), len(dy)
    if max(map(max, dx)) > max(map(max, dy)) + tol:
        return False
    if nx > ny:
        # distinct points further apart than tol need distinct images
        sep = min((dx[i][k] for i in range(nx) for k in range(i + 1, nx)), default=INF)
        if sep > tol:
            return False
    return True


@attrs.define
class _DominationSearch:
    _dx: Rows
    _dy: Rows
    _tol: float
    _limit: int
    nodes: int = attrs.field(init=False, default=0)

    def _fits(self, i: int, j: int, i2: int, j2: int) -> bool:
        return shortfall(self._dx[i][i2], self._dy[j][j2]) <= self._tol

    def run(self, fixed: dict) -> Optional[dict]:
        nx, ny = len(self._dx), len(self._dy)
        domains = {i: list(range(ny)) for i in range(nx) if i not in fixed}
        for i in list(domains):
            domains[i] = [j for j in domains[i] if all(self._fits(i, j, i2, j2) for i2, j2 in fixed.items())]
        return self._descend(dict(fixed), domains)

    def _descend(self, assigned: dict, domains: dict) -> Optional[dict]:
        self.nodes += 1
        if self.nodes > self._limit:
            raise SizeLimitExceeded(self.nodes, self._limit)
        if not domains:
            return assigned
        # smallest domain first, larger rows break ties
        i = min(domains, key=lambda k: (len(domains[k]), -max(self._dx[k]), k))
        rest = {k: v for k, v in domains.items() if k != i}
        for j in domains[i]:
            pruned = {}
            for k, dom in rest.items():
                kept = [j2 for j2 in dom if self._fits(k, j2, i, j)]
                if not kept:
                    break
                pruned[k] = kept
            else:
                assigned[i] = j
                found = self._descend(assigned, pruned)
                if found is not None:
                    return found
                del assigned[i]
        return None


def dominating_map(
    dx: Rows, dy: Rows, tol: float = PRECSIM_TOL, fixed: Optional[dict] = None, limit: int = DEFAULT_NODE_LIMIT
) -> Optional[PointMap]:
    """a map X -> Y with widening defect <= tol, or None if there is none"""
    fixed = dict(fixed or {})
    if not _prefilter(dx, dy, tol):
        return None
    found = _DominationSearch(dx, dy, tol, limit).run(fixed)
    if found is None:
        return None
    return PointMap(found[i] for i in range(len(dx)))


def precsim(X: FiniteSpace, Y: FiniteSpace, tol: float = PRECSIM_TOL, limit: int = DEFAULT_NODE_LIMIT) -> bool:
    """X <= Y up to `tol`; raises SizeLimitExceeded when undecided"""
    return dominating_map(X.rows, Y.rows, tol, limit=limit) is not None


def precsim_pointed(P: PointedSpace, Q: PointedSpace, tol: float = PRECSIM_TOL, limit: int = DEFAULT_NODE_LIMIT) -> bool:
    return dominating_map(P.rows, Q.rows, tol, {P.base: Q.base}, limit) is not None


def equivalent(X: FiniteSpace, Y: FiniteSpace, tol: float = PRECSIM_TOL, limit: int = DEFAULT_NODE_LIMIT) -> bool:
    return precsim(X, Y, tol, limit) and precsim(Y, X, tol, limit)


def equivalent_pointed(P: PointedSpace, Q: PointedSpace, tol: float = PRECSIM_TOL, limit: int = DEFAULT_NODE_LIMIT) -> bool:
    return precsim_pointed(P, Q, tol, limit) and precsim_pointed(Q, P, tol, limit)

