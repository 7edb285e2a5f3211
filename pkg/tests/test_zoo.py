import math

import numpy as np
import pytest

from pyramidgh.canon import canonical_key
from pyramidgh.metric import PointedSpace, diameter, is_on_grid, sigma
from pyramidgh.zoo import (
    InvalidRecipe,
    LpProduct,
    Path,
    ProjSpace,
    RandomMetric,
    Sigma,
    Simplex,
    Sphere,
    Spider,
    corpus,
    generate,
    pointed_corpus,
    recipe_from_json,
    recipe_to_json,
)


def test_small_spider_is_a_path():
    spider = generate(Spider(2, 1.0, 1))
    assert isinstance(spider, PointedSpace)
    assert spider.base == 0
    assert spider.rows == ((0, 1, 1), (1, 0, 2), (1, 2, 0))
    path = generate(Path(2.0, 2))
    assert canonical_key(spider.rows) == canonical_key(path.rows)


def test_spider_layout():
    S = generate(Spider(3, 1.0, 2))
    assert S.n == 7
    # leg 1 holds indices 3 and 4
    assert S.rows[0][4] == 1.0
    assert S.rows[3][4] == 0.5
    assert S.rows[1][4] == 1.5
    assert S.rows[2][4] == 2.0
    assert diameter(S.space) == 2.0


def test_simplex():
    assert generate(Simplex(2)) == sigma(3)
    assert generate(Sigma(4, 2.0)) == sigma(4, 2.0)


def test_spheres():
    S = generate(Sphere(2, 20, seed=1))
    assert S.n == 20
    assert diameter(S) <= math.pi + 1e-12
    assert np.array_equal(S.matrix, S.matrix.T)
    P = generate(ProjSpace(2, 20, seed=1))
    assert diameter(P) <= math.pi / 2 + 1e-12
    assert generate(Sphere(2, 20, seed=1)) == S


def test_lp_products():
    square = generate(LpProduct(Sigma(2), 2, p=math.inf))
    assert square == sigma(4)
    taxi = generate(LpProduct(Sigma(2), 2, p=1))
    assert diameter(taxi) == 2
    sampled = generate(LpProduct(Sigma(3), 4, samples=10, seed=2))
    assert sampled.n <= 10


def test_recipes_round_trip_through_json():
    for r in (Sigma(3, 0.5), Spider(4, 1.0, 2), Path(2.0, 4), RandomMetric(4, 9), LpProduct(Sigma(2), 3)):
        assert recipe_from_json(recipe_to_json(r)) == r


def test_bad_recipes():
    with pytest.raises(InvalidRecipe):
        recipe_from_json({"family": "torus"})
    with pytest.raises(InvalidRecipe):
        recipe_from_json({"family": "sigma", "points": 3})
    with pytest.raises(InvalidRecipe):
        Sigma(0)
    with pytest.raises(InvalidRecipe):
        LpProduct(Sigma(2), 2, p=0.5)


def test_corpus_is_fixed():
    first = corpus(0)
    assert len(first) >= 40
    assert first == corpus(0)
    assert first != corpus(1)
    assert all(is_on_grid(S, 0.25) for S in first)
    assert all(S.n <= 3 for S in corpus(0, max_points=3))


def test_pointed_corpus():
    spaces = pointed_corpus(0)
    assert len(spaces) == len(corpus(0))
    assert all(isinstance(P, PointedSpace) for P in spaces)
