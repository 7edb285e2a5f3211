import itertools

import numpy as np
import pytest

from pyramidgh.gh import (
    Correspondence,
    EmptySetError,
    SizeLimitExceeded,
    directed_hausdorff,
    distortion,
    gh_bounds,
    gh_exact,
    gh_interval,
    gh_lower_bound,
    gh_pointed,
    hausdorff_between_sets,
)
from pyramidgh.metric import INF, FiniteSpace, InfiniteEntryError, Interval, PointedSpace, point, sigma
from pyramidgh.oracle import oracle_gh
from pyramidgh.zoo import RandomMetric, Spider, generate, unpointed


def test_two_points():
    result = gh_exact(sigma(2, 1), sigma(2, 2))
    assert result.value == Interval.point(0.5)
    assert result.exact
    assert result.witness.is_correspondence(2, 2)
    assert distortion(sigma(2, 1), sigma(2, 2), result.witness) == 1


def test_equilateral():
    assert gh_exact(sigma(2), sigma(3)).value.lo == 0.5
    assert oracle_gh(sigma(2), sigma(3)) == 0.5
    assert gh_exact(sigma(4), sigma(4)).value.hi == 0


def test_bounds_meet_on_easy_pairs():
    assert gh_bounds(sigma(2, 1), sigma(2, 3)).value == Interval(1, 1)


def test_agrees_with_brute_force():
    rng = np.random.Generator(np.random.PCG64(7))
    for _ in range(40):
        n1, n2 = (int(v) for v in rng.integers(1, 5, size=2))
        X = generate(RandomMetric(n1, int(rng.integers(2**31))))
        Y = generate(RandomMetric(n2, int(rng.integers(2**31))))
        assert abs(gh_exact(X, Y).value.lo - oracle_gh(X, Y)) <= 1e-12
        bounds = gh_bounds(X, Y).value
        assert bounds.contains(oracle_gh(X, Y), 1e-12)


def test_triangle_inequality(small_corpus):
    spaces = small_corpus[:8]
    d = {(i, j): gh_exact(X, Y).value.lo for (i, X), (j, Y) in itertools.product(enumerate(spaces), repeat=2)}
    for i, j, k in itertools.permutations(range(len(spaces)), 3):
        assert d[i, k] <= d[i, j] + d[j, k] + 1e-12


def test_spiders_stay_apart():
    sp8 = unpointed(generate(Spider(8, 1.0, 2)))
    sp16 = unpointed(generate(Spider(16, 1.0, 2)))
    assert gh_bounds(sp8, sp16).value.lo >= 0.4
    assert gh_lower_bound(sp8, sp16) <= gh_bounds(sp8, sp16).value.lo


def test_size_limit():
    sp8 = unpointed(generate(Spider(8, 1.0, 2)))
    sp16 = unpointed(generate(Spider(16, 1.0, 2)))
    with pytest.raises(SizeLimitExceeded):
        gh_exact(sp8, sp16, limit=10)
    assert gh_interval(sp8, sp16, limit=10).value.lo >= 0.4


def test_infinite_entries_are_rejected():
    X = FiniteSpace([[0, INF], [INF, 0]])
    with pytest.raises(InfiniteEntryError):
        gh_exact(X, sigma(2))


def test_pointed_is_at_least_unpointed():
    path = FiniteSpace([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    end, middle = PointedSpace(path, 0), PointedSpace(path, 1)
    assert gh_exact(path, path).value.hi == 0
    assert gh_pointed(end, middle).value.lo > 0
    assert gh_pointed(end, PointedSpace(path, 2)).value.hi == 0


def test_correspondence_from_maps():
    C = Correspondence.from_maps([0, 1], [1, 0])
    assert C.is_correspondence(2, 2)
    assert C.sorted() == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert not Correspondence({(0, 0)}).is_correspondence(2, 1)


def test_hausdorff_between_sets():
    gh = lambda a, b: gh_exact(a, b).value
    assert hausdorff_between_sets([point()], [point(), sigma(2, 1)], gh) == Interval.point(0.5)
    assert directed_hausdorff([point()], [point(), sigma(2, 1)], gh) == Interval.point(0)
    with pytest.raises(EmptySetError):
        directed_hausdorff([], [point()], gh)


def test_pointed_dominates_unpointed_on_random_pairs():
    rng = np.random.Generator(np.random.PCG64(7))
    for _ in range(100):
        n1, n2 = (int(v) for v in rng.integers(1, 5, size=2))
        X = generate(RandomMetric(n1, int(rng.integers(2**31))))
        Y = generate(RandomMetric(n2, int(rng.integers(2**31))))
        P = PointedSpace(X, int(rng.integers(n1)))
        Q = PointedSpace(Y, int(rng.integers(n2)))
        assert gh_pointed(P, Q).value.lo >= gh_exact(X, Y).value.hi - 1e-12
