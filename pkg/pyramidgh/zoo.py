"""
recipes for the example families and the shared test corpus.

every random family draws from numpy's PCG64 seeded by the recipe, so a
recipe always generates the same space.
"""

import itertools
import logging
import math
from typing import Optional, Union

import attrs
import numpy as np

from .metric import INF, FiniteSpace, PointedSpace, floyd_warshall, sigma

_log = logging.getLogger(__name__)


class InvalidRecipe(Exception):
    ...


def _positive(instance, attribute, value):
    if not value > 0:
        raise InvalidRecipe(f"{type(instance).__name__}.{attribute.name} must be positive, got {value}")


def _non_negative(instance, attribute, value):
    if value < 0:
        raise InvalidRecipe(f"{type(instance).__name__}.{attribute.name} must be non-negative, got {value}")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@attrs.frozen
class Sigma:
    n: int = attrs.field(validator=_positive)
    D: float = attrs.field(default=1.0, validator=_positive)


@attrs.frozen
class Simplex:
    """vertex skeleton of the standard n-simplex"""

    n: int = attrs.field(validator=_non_negative)


@attrs.frozen
class Spider:
    n: int = attrs.field(validator=_positive)
    R: float = attrs.field(default=1.0, validator=_positive)
    k: int = attrs.field(default=1, validator=_positive)


@attrs.frozen
class Sphere:
    dim: int = attrs.field(validator=_positive)
    samples: int = attrs.field(validator=_positive)
    seed: int = 0


@attrs.frozen
class ProjSpace:
    dim: int = attrs.field(validator=_positive)
    samples: int = attrs.field(validator=_positive)
    seed: int = 0


@attrs.frozen
class Path:
    length: float = attrs.field(validator=_positive)
    k: int = attrs.field(validator=_positive)


@attrs.frozen
class RandomMetric:
    """random edge lengths on `step` multiples up to `top`, closed under shortest paths"""

    n: int = attrs.field(validator=_positive)
    seed: int = 0
    step: float = attrs.field(default=0.25, validator=_non_negative)
    top: float = attrs.field(default=2.0, validator=_positive)


@attrs.frozen
class LpProduct:
    base: "Recipe"
    n: int = attrs.field(validator=_positive)
    p: float = attrs.field(default=2.0, validator=_positive)
    samples: int = attrs.field(default=16, validator=_positive)
    seed: int = 0

    def __attrs_post_init__(self):
        if self.p < 1:
            raise InvalidRecipe(f"l^p products need p >= 1, got {self.p}")


Recipe = Union[Sigma, Simplex, Spider, Sphere, ProjSpace, Path, RandomMetric, LpProduct]


def _spider(r: Spider) -> PointedSpace:
    step = r.R / r.k
    # center 0, then leg l holds nodes 1..k at indices 1 + l*k + (j-1)
    height = [0] + [j for _ in range(r.n) for j in range(1, r.k + 1)]
    leg = [-1] + [l for l in range(r.n) for _ in range(r.k)]
    size = len(height)
    m = np.zeros((size, size))
    for a in range(size):
        for b in range(size):
            if a == b:
                continue
            if leg[a] == leg[b]:
                m[a, b] = abs(height[a] - height[b]) * step
            else:
                m[a, b] = (height[a] + height[b]) * step
    return PointedSpace(FiniteSpace(m, label=f"Sp_{r.n}({r.R:g},k={r.k})"), 0)


def _unit_vectors(dim: int, samples: int, seed: int) -> np.ndarray:
    v = _rng(seed).standard_normal((samples, dim + 1))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _angles(u: np.ndarray, projective: bool) -> np.ndarray:
    diff = np.linalg.norm(u[:, None, :] - u[None, :, :], axis=2)
    summ = np.linalg.norm(u[:, None, :] + u[None, :, :], axis=2)
    if projective:
        diff, summ = np.minimum(diff, summ), np.maximum(diff, summ)
    m = 2 * np.arctan2(diff, summ)
    np.fill_diagonal(m, 0.0)
    return (m + m.T) / 2


def _path(r: Path) -> PointedSpace:
    pos = np.arange(r.k + 1) * (r.length / r.k)
    return PointedSpace(FiniteSpace(np.abs(pos[:, None] - pos[None, :]), label=f"Path({r.length:g},{r.k})"), 0)


def _random_metric(r: RandomMetric) -> FiniteSpace:
    rng = _rng(r.seed)
    if r.step > 0:
        steps = max(1, int(math.floor(r.top / r.step + 1e-9)))
        m = rng.integers(1, steps + 1, size=(r.n, r.n)) * r.step
    else:
        m = rng.uniform(0.1, 1.0, size=(r.n, r.n))
    m = np.triu(m, k=1)
    m = m + m.T
    return FiniteSpace(floyd_warshall(m), label=f"Random({r.n},seed={r.seed})")


def _lp_product(r: LpProduct) -> FiniteSpace:
    base = generate(r.base)
    if isinstance(base, PointedSpace):
        base = base.space
    total = base.n**r.n
    if total <= r.samples:
        tuples = list(itertools.product(range(base.n), repeat=r.n))
    else:
        drawn = _rng(r.seed).integers(0, base.n, size=(r.samples, r.n))
        tuples = sorted({tuple(int(v) for v in row) for row in drawn})
    idx = np.array(tuples)
    # per-factor distances stacked along the last axis
    parts = np.stack([base.matrix[np.ix_(idx[:, c], idx[:, c])] for c in range(r.n)], axis=-1)
    if math.isinf(r.p):
        m = parts.max(axis=-1)
    else:
        m = (parts**r.p).sum(axis=-1) ** (1 / r.p)
    return FiniteSpace(m, label=f"{base.label or 'X'}^{r.n}_l{r.p:g}")


def generate(r: Recipe) -> FiniteSpace | PointedSpace:
    match r:
        case Sigma(n=n, D=D):
            return sigma(n, D)
        case Simplex(n=n):
            return sigma(n + 1, 1.0).named(f"Simplex_{n}")
        case Spider():
            return _spider(r)
        case Sphere(dim=dim, samples=m, seed=seed):
            return FiniteSpace(_angles(_unit_vectors(dim, m, seed), False), label=f"S^{dim}[{m}]")
        case ProjSpace(dim=dim, samples=m, seed=seed):
            return FiniteSpace(_angles(_unit_vectors(dim, m, seed), True), label=f"RP^{dim}[{m}]")
        case Path():
            return _path(r)
        case RandomMetric():
            return _random_metric(r)
        case LpProduct():
            return _lp_product(r)
    raise InvalidRecipe(f"unknown recipe {r!r}")


_FAMILIES = {
    "sigma": Sigma,
    "simplex": Simplex,
    "spider": Spider,
    "sphere": Sphere,
    "proj": ProjSpace,
    "path": Path,
    "random": RandomMetric,
    "lp": LpProduct,
}


def recipe_from_json(data: dict) -> Recipe:
    data = dict(data)
    try:
        cls = _FAMILIES[data.pop("family")]
    except KeyError as e:
        raise InvalidRecipe(f"recipe needs a family out of {sorted(_FAMILIES)}: {data}") from e
    if cls is LpProduct and "base" in data:
        data["base"] = recipe_from_json(data["base"])
    if cls is Sigma and data.get("D") == "inf":
        data["D"] = INF
    try:
        return cls(**data)
    except TypeError as e:
        raise InvalidRecipe(f"bad parameters for {cls.__name__}: {e}") from e


def recipe_to_json(r: Recipe) -> dict:
    family = next(name for name, cls in _FAMILIES.items() if isinstance(r, cls))
    data = attrs.asdict(r, recurse=False)
    if isinstance(r, LpProduct):
        data["base"] = recipe_to_json(r.base)
    if isinstance(r, Sigma) and math.isinf(r.D):
        data["D"] = "inf"
    return {"family": family, **data}


def unpointed(S: FiniteSpace | PointedSpace) -> FiniteSpace:
    return S.space if isinstance(S, PointedSpace) else S


def corpus_recipes(seed: int = 0) -> list[Recipe]:
    recipes: list[Recipe] = [Sigma(1, 1.0)]
    recipes += [Sigma(n, D) for D in (0.5, 1.0, 2.0) for n in range(2, 6)]
    recipes += [Spider(n, 1.0, k) for k in (1, 2) for n in range(1, 5)]
    recipes += [RandomMetric(2 + k % 4, seed * 1000 + k) for k in range(20)]
    recipes += [Path(1.0, 1), Path(1.0, 2), Path(2.0, 2), Path(2.0, 4)]
    return recipes


def corpus(seed: int = 0, max_points: Optional[int] = None) -> list[FiniteSpace]:
    """a fixed list of small spaces, every distance a multiple of 0.25"""
    spaces = [unpointed(generate(r)) for r in corpus_recipes(seed)]
    if max_points is not None:
        spaces = [S for S in spaces if S.n <= max_points]
    _log.debug("corpus(seed=%d): %d spaces", seed, len(spaces))
    return spaces


def pointed_corpus(seed: int = 0, max_points: Optional[int] = None) -> list[PointedSpace]:
    """the corpus with point 0 as base, spiders and paths keep their own base"""
    out = []
    for r in corpus_recipes(seed):
        S = generate(r)
        if not isinstance(S, PointedSpace):
            S = PointedSpace(S, 0)
        if max_points is None or S.n <= max_points:
            out.append(S)
    return out
