"""
finite (extended) metric spaces and the small value types built on them.

distances are floats; math.inf stands for an infinite distance. matrices are
kept as read-only numpy arrays, the search kernels read them through
`FiniteSpace.rows`.
"""

import json
import logging
import math
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence

import attrs
import numpy as np

from .typing import Matrix, Measured

_log = logging.getLogger(__name__)

INF = math.inf

# slack for triangle and symmetry checks, relative to the largest finite entry
TRIANGLE_TOL = 1e-12
# entries this close to a grid value are snapped onto it before rounding
GRID_SNAP = 1e-9


def shortfall(a: float, b: float) -> float:
    """(a - b)^+ with inf - inf = 0"""
    if a <= b:
        return 0.0
    return a - b


def ext_absdiff(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b)


class InvalidSpaceError(Exception):
    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        shown = ", ".join(repr(v) for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"not an extended metric: {shown}{more}")


class InfiniteEntryError(Exception):
    ...


class SpaceFileError(Exception):
    ...


class Violation:
    ...


@attrs.frozen
class Asymmetric(Violation):
    i: int
    j: int


@attrs.frozen
class NonzeroDiagonal(Violation):
    i: int


@attrs.frozen
class NegativeEntry(Violation):
    i: int
    j: int


@attrs.frozen
class DuplicatePoint(Violation):
    i: int
    j: int


@attrs.frozen
class TriangleViolation(Violation):
    """d[i][j] > d[i][k] + d[k][j]"""

    i: int
    k: int
    j: int


def _as_matrix(value: Matrix) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("a space needs at least one point")
    if np.isnan(arr).any():
        raise ValueError("distance matrix contains NaN")
    arr.setflags(write=False)
    return arr


def violations(d: np.ndarray, tol: float = TRIANGLE_TOL) -> list[Violation]:
    """every way `d` fails to be an extended metric, in a stable order"""
    n = d.shape[0]
    finite = d[np.isfinite(d)]
    scale = max(1.0, float(finite.max())) if finite.size else 1.0
    slack = tol * scale
    found: list[Violation] = []

    for i in np.flatnonzero(np.diag(d) != 0):
        found.append(NonzeroDiagonal(int(i)))
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    asym = upper & ~np.isclose(d, d.T, rtol=0, atol=slack) & ~(np.isinf(d) & np.isinf(d.T))
    for i, j in np.argwhere(asym):
        found.append(Asymmetric(int(i), int(j)))
    for i, j in np.argwhere((d < 0) & ~np.eye(n, dtype=bool)):
        found.append(NegativeEntry(int(i), int(j)))
    for i, j in np.argwhere(upper & (d == 0)):
        found.append(DuplicatePoint(int(i), int(j)))
    if n >= 3:
        # via[i, k, j] = d[i][k] + d[k][j]
        via = d[:, :, None] + d[None, :, :]
        bad = d[:, None, :] > via + slack
        for i, k, j in np.argwhere(bad):
            if i < j and k != i and k != j:
                found.append(TriangleViolation(int(i), int(k), int(j)))
    return found


def _check_metric(instance, attribute, value: np.ndarray):
    found = violations(value)
    if found:
        raise InvalidSpaceError(found)


@attrs.frozen(eq=False, slots=False)
class FiniteSpace(Measured):
    """a finite extended metric space, points are 0..n-1"""

    matrix: np.ndarray = attrs.field(converter=_as_matrix, validator=_check_metric)
    label: Optional[str] = attrs.field(default=None, kw_only=True)

    @cached_property
    def rows(self) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(row) for row in self.matrix.tolist())

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def d(self, i: int, j: int) -> float:
        return self.rows[i][j]

    @property
    def has_infinite(self) -> bool:
        return bool(np.isinf(self.matrix).any())

    def named(self, label: Optional[str]) -> "FiniteSpace":
        return attrs.evolve(self, label=label)


def validate(matrix: Matrix, label: Optional[str] = None) -> FiniteSpace:
    """raises InvalidSpaceError carrying the full violation list"""
    return FiniteSpace(matrix, label=label)


def point() -> FiniteSpace:
    return FiniteSpace([[0.0]], label="point")


def _base_in_range(instance, attribute, value):
    if not 0 <= value < instance.space.n:
        raise ValueError(f"base {value} out of range for a {instance.space.n}-point space")


@attrs.frozen
class PointedSpace(Measured):
    space: FiniteSpace
    base: int = attrs.field(default=0, validator=_base_in_range)

    @property
    def rows(self):
        return self.space.rows

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def label(self) -> Optional[str]:
        return self.space.label

    def __len__(self):
        return self.space.n


@attrs.frozen
class Interval:
    """a closed bracket [lo, hi] of non-negative reals"""

    lo: float
    hi: float

    def __attrs_post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: float) -> "Interval":
        return cls(value, value)

    @classmethod
    def hull(cls, items: Iterable["Interval"]) -> "Interval":
        items = list(items)
        return cls(min(it.lo for it in items), max(it.hi for it in items))

    @classmethod
    def clamped(cls, lo: float, hi: float) -> "Interval":
        # rounding can push a lower bound a hair above its upper bound
        return cls(min(lo, hi), hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack

    def widen(self, by: float) -> "Interval":
        return Interval(max(0.0, self.lo - by), self.hi + by)

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def scaled(self, factor: float) -> "Interval":
        return Interval(self.lo * factor, self.hi * factor)

    def as_tuple(self) -> tuple[float, float]:
        return self.lo, self.hi


def diameter(X: FiniteSpace) -> float:
    return float(X.matrix.max())


def radius(P: PointedSpace) -> float:
    return float(P.space.matrix[P.base].max())


def separation(X: FiniteSpace) -> float:
    """smallest positive distance, inf for a single point"""
    if X.n == 1:
        return INF
    d = X.matrix
    return float(d[~np.eye(X.n, dtype=bool)].min())


def truncate(X: FiniteSpace, D: float) -> FiniteSpace:
    if D <= 0:
        raise ValueError(f"truncation level must be positive, got {D}")
    return FiniteSpace(np.minimum(X.matrix, D), label=X.label)


def truncate_pointed(P: PointedSpace, D: float) -> PointedSpace:
    return PointedSpace(truncate(P.space, D), P.base)


def scale(X: FiniteSpace, t: float) -> FiniteSpace:
    if not t > 0:
        raise ValueError(f"scale factor must be positive, got {t}")
    return FiniteSpace(X.matrix * t, label=X.label)


def restrict(X: FiniteSpace, indices: Sequence[int]) -> FiniteSpace:
    idx = list(indices)
    if not idx:
        raise ValueError("cannot restrict to an empty set of points")
    return FiniteSpace(X.matrix[np.ix_(idx, idx)], label=X.label)


def relabel(X: FiniteSpace, order: Sequence[int]) -> FiniteSpace:
    """point k of the result is point order[k] of X"""
    if sorted(order) != list(range(X.n)):
        raise ValueError("relabel order must be a permutation")
    return restrict(X, order)


def ball(P: PointedSpace, r: float) -> PointedSpace:
    """closed ball around the base, base kept as a point of the ball"""
    if r < 0:
        raise ValueError(f"ball radius must be non-negative, got {r}")
    row = P.space.matrix[P.base]
    keep = [i for i in range(P.n) if row[i] <= r]
    return PointedSpace(restrict(P.space, keep), keep.index(P.base))


def grid_values(cap: float, delta: float) -> list[float]:
    """{k*delta : 0 < k*delta < cap} and cap itself"""
    if not (cap > 0 and delta > 0):
        raise ValueError(f"grid needs positive cap and step, got cap={cap} delta={delta}")
    values = []
    k = 1
    while k * delta < cap - GRID_SNAP * delta:
        values.append(k * delta)
        k += 1
    values.append(float(cap))
    return values


def _snap(x: float, delta: float) -> float:
    k = round(x / delta)
    if abs(x / delta - k) < GRID_SNAP:
        return k * delta
    return x


def grid_ceil(x: float, delta: float) -> float:
    if x == INF or x == 0:
        return x
    x = _snap(x, delta)
    return math.ceil(x / delta - GRID_SNAP) * delta


def grid_floor(x: float, delta: float) -> float:
    if x == INF:
        return x
    x = _snap(x, delta)
    return math.floor(x / delta + GRID_SNAP) * delta


def ceil_to_grid(X: FiniteSpace, delta: float, cap: float = INF) -> FiniteSpace:
    """round every distance up to a multiple of delta, then truncate at cap"""
    rounded = [[min(grid_ceil(v, delta), cap) for v in row] for row in X.rows]
    return FiniteSpace(rounded, label=X.label)


def is_on_grid(X: FiniteSpace, delta: float, cap: Optional[float] = None) -> bool:
    for row in X.rows:
        for v in row:
            if v == INF or v == 0 or (cap is not None and v == cap):
                continue
            if grid_ceil(v, delta) != _snap(v, delta):
                return False
    return True


def sigma(n: int, D: float = 1.0) -> FiniteSpace:
    """n points at mutual distance D"""
    if n < 1:
        raise ValueError(f"sigma needs at least one point, got {n}")
    m = np.full((n, n), float(D))
    np.fill_diagonal(m, 0.0)
    return FiniteSpace(m, label=f"Sigma_{n}({D:g})")


def floyd_warshall(d: np.ndarray) -> np.ndarray:
    closed = np.array(d, dtype=float)
    for k in range(closed.shape[0]):
        closed = np.minimum(closed, closed[:, k : k + 1] + closed[k : k + 1, :])
    return closed


def _encode(v: float):
    return "inf" if v == INF else v


def _decode(v) -> float:
    if isinstance(v, str):
        if v.lower() == "inf":
            return INF
        raise SpaceFileError(f"unexpected string entry {v!r}")
    return float(v)


def space_to_json(X: FiniteSpace | PointedSpace) -> dict:
    if isinstance(X, PointedSpace):
        data = space_to_json(X.space)
        data["base"] = X.base
        return data
    data: dict = {"n": X.n, "matrix": [[_encode(v) for v in row] for row in X.rows]}
    if X.label is not None:
        data["label"] = X.label
    return data


def space_from_json(data: dict) -> FiniteSpace | PointedSpace:
    try:
        matrix = [[_decode(v) for v in row] for row in data["matrix"]]
    except (KeyError, TypeError) as e:
        raise SpaceFileError(f"malformed space document: {e}") from e
    if "n" in data and data["n"] != len(matrix):
        raise SpaceFileError(f"declared n={data['n']} but matrix has {len(matrix)} rows")
    X = FiniteSpace(matrix, label=data.get("label"))
    if "base" in data:
        return PointedSpace(X, int(data["base"]))
    return X


def write_space(X: FiniteSpace | PointedSpace, path: Path | str):
    Path(path).write_text(json.dumps(space_to_json(X), indent=1))
    _log.debug("wrote %d-point space to %s", X.n, path)


def read_space(path: Path | str) -> FiniteSpace | PointedSpace:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise SpaceFileError(f"cannot read {path}: {e}") from e
    return space_from_json(data)
