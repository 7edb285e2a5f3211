"""
brute-force reference computations for tiny instances.

nothing here prunes or shares code with the solvers it checks: GH by
enumerating every pair of maps, membership by enumerating every map, grid
universes by enumerating every matrix.
"""

import itertools
import logging
from typing import Optional

import attrs

from .gh import SizeLimitExceeded
from .metric import FiniteSpace, PointedSpace, grid_values
from .typing import Rows

_log = logging.getLogger(__name__)

ORACLE_MAX_POINTS = 5
ORACLE_TOL = 1e-9


def _distortion(dx: Rows, dy: Rows, pairs) -> float:
    worst = 0.0
    for a, b in pairs:
        for a2, b2 in pairs:
            worst = max(worst, abs(dx[a][a2] - dy[b][b2]))
    return worst


def oracle_gh(X, Y, pointed: bool = False) -> float:
    """min over all (f: X -> Y, g: Y -> X) of dis(graph f + graph g) / 2"""
    if X.n > ORACLE_MAX_POINTS or Y.n > ORACLE_MAX_POINTS:
        raise SizeLimitExceeded(X.n ** Y.n * Y.n ** X.n, ORACLE_MAX_POINTS)
    dx, dy = X.rows, Y.rows
    best = None
    for f in itertools.product(range(Y.n), repeat=X.n):
        if pointed and f[X.base] != Y.base:
            continue
        for g in itertools.product(range(X.n), repeat=Y.n):
            if pointed and g[Y.base] != X.base:
                continue
            pairs = {(a, f[a]) for a in range(X.n)} | {(g[b], b) for b in range(Y.n)}
            value = _distortion(dx, dy, pairs)
            if best is None or value < best:
                best = value
    return best / 2


def oracle_member(G, X, pointed: bool = False, tol: float = ORACLE_TOL) -> bool:
    """is there any map G -> X that never shrinks a distance"""
    dg, dx = G.rows, X.rows
    for f in itertools.product(range(X.n), repeat=G.n):
        if pointed and f[G.base] != X.base:
            continue
        if all(dg[i][k] <= dx[f[i]][f[k]] + tol for i in range(G.n) for k in range(G.n)):
            return True
    return False


def _brute_key(rows: Rows, base: Optional[int]) -> tuple:
    n = len(rows)
    if base is None:
        orders = itertools.permutations(range(n))
    else:
        rest = [i for i in range(n) if i != base]
        orders = ((base, *p) for p in itertools.permutations(rest))
    return min(tuple(rows[o[a]][o[b]] for a in range(n) for b in range(n)) for o in orders)


def _triangle_ok(m: list[list[float]]) -> bool:
    n = len(m)
    return all(m[i][j] <= m[i][k] + m[k][j] + ORACLE_TOL for i in range(n) for j in range(n) for k in range(n))


@attrs.frozen
class GridUniverse:
    """every metric on at most N points with entries from the grid values, one per isometry class"""

    N: int
    D: float
    delta: float
    pointed: bool
    elements: tuple

    @classmethod
    def build(cls, N: int, D: float, delta: float, pointed: bool = False) -> "GridUniverse":
        values = grid_values(D, delta)
        seen = {}
        for k in range(1, N + 1):
            slots = [(i, j) for i in range(k) for j in range(i + 1, k)]
            for entries in itertools.product(values, repeat=len(slots)):
                m = [[0.0] * k for _ in range(k)]
                for (i, j), v in zip(slots, entries):
                    m[i][j] = m[j][i] = v
                if not _triangle_ok(m):
                    continue
                key = _brute_key(m, 0 if pointed else None)
                if key not in seen:
                    S = FiniteSpace(m)
                    seen[key] = PointedSpace(S, 0) if pointed else S
        _log.debug("grid universe N=%d D=%s delta=%s: %d classes", N, D, delta, len(seen))
        return cls(N, D, delta, pointed, tuple(seen.values()))

    def __len__(self):
        return len(self.elements)


def oracle_slice(P, N: int, delta: float, D: Optional[float] = None, pointed: bool = False) -> list:
    """grid members of P within H(N, D); P=None stands for the maximal pyramid"""
    universe = GridUniverse.build(N, N if D is None else D, delta, pointed)
    if P is None:
        return list(universe.elements)
    return [G for G in universe.elements if oracle_member(G, P, pointed)]


def oracle_hausdorff(A: list, B: list, pointed: bool = False, memo: Optional[dict] = None) -> float:
    """memo, keyed by isometry class pairs, may be shared between calls over the same universe"""
    memo = {} if memo is None else memo

    def keyed(items: list) -> list:
        return [(_brute_key(x.rows, x.base if pointed else None), x) for x in items]

    def gh(a, b) -> float:
        key = (a[0], b[0])
        if key not in memo:
            memo[key] = oracle_gh(a[1], b[1], pointed)
        return memo[key]

    def directed(src, dst):
        return max(min(gh(a, b) for b in dst) for a in src)

    ka, kb = keyed(A), keyed(B)
    return max(directed(ka, kb), max(min(gh(a, b) for a in ka) for b in kb))


def oracle_rho_N(A, B, N: int, delta: float, pointed: bool = False, memo: Optional[dict] = None) -> float:
    """Hausdorff distance between the grid slices at level N, D = N"""
    return oracle_hausdorff(
        oracle_slice(A, N, delta, pointed=pointed), oracle_slice(B, N, delta, pointed=pointed), pointed, memo
    )


def oracle_defect(X: FiniteSpace, Y: FiniteSpace) -> float:
    """smallest widening defect, every map tried"""
    dx, dy = X.rows, Y.rows
    best = None
    for f in itertools.product(range(Y.n), repeat=X.n):
        value = max(max(dx[i][k] - dy[f[i]][f[k]], 0.0) for i in range(X.n) for k in range(X.n))
        if best is None or value < best:
            best = value
    return best
