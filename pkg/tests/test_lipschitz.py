import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pyramidgh.gh import gh_exact
from pyramidgh.lipschitz import CoordinateMap, PreconditionViolated, kuratowski, mcshane_fix, transfer_net
from pyramidgh.metric import INF, FiniteSpace, InfiniteEntryError, point, sigma
from pyramidgh.order import precsim
from pyramidgh.zoo import RandomMetric, generate


def test_kuratowski_is_an_isometry():
    f = kuratowski(sigma(2))
    assert f.values.tolist() == [[0, 1], [1, 0]]
    assert f.sup_distances().tolist() == [[0, 1], [1, 0]]
    assert kuratowski(point()).values.tolist() == [[0]]

    X = generate(RandomMetric(6, 3))
    assert np.array_equal(kuratowski(X).sup_distances(), X.matrix)


def test_kuratowski_needs_finite_distances():
    with pytest.raises(InfiniteEntryError):
        kuratowski(FiniteSpace([[0, INF], [INF, 0]]))


def test_mcshane_two_points():
    fixed = mcshane_fix(sigma(2), CoordinateMap([[0], [1.3]]), 0.3)
    assert fixed.values.tolist() == [[0], [1]]


def test_mcshane_leaves_lipschitz_maps_alone():
    X = generate(RandomMetric(5, 11))
    f = kuratowski(X)
    assert np.array_equal(mcshane_fix(X, f, 0).values, f.values)


def test_mcshane_precondition():
    with pytest.raises(PreconditionViolated):
        mcshane_fix(sigma(2), CoordinateMap([[0], [2]]), 0.3)
    with pytest.raises(ValueError):
        mcshane_fix(sigma(3), CoordinateMap([[0], [1]]), 0.3)


@given(
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=0, max_value=2**31 - 1),
    st.floats(min_value=0, max_value=0.5),
)
@settings(max_examples=60, deadline=None)
def test_mcshane_contract(n, seed, eps):
    X = generate(RandomMetric(n, seed))
    rng = np.random.Generator(np.random.PCG64(seed))
    f = kuratowski(X).values + rng.uniform(-eps / 2, eps / 2, size=(n, n))
    fixed = mcshane_fix(X, CoordinateMap(f), eps)
    assert (fixed.sup_distances() <= X.matrix + 1e-12).all()
    assert np.abs(fixed.values - f).max() <= eps + 1e-12


def test_transfer_two_points():
    Xp = transfer_net(sigma(2), sigma(2, 1.5), 0.25, 10)
    assert Xp == sigma(2)
    assert gh_exact(Xp, sigma(2)).value.hi <= 0.75
    assert precsim(Xp, sigma(2, 1.5))


def test_transfer_merges_points():
    # both points of Yp land on the single point of X
    Xp = transfer_net(sigma(2, 0.5), point(), 0.25, 10)
    assert Xp.n == 1


def test_transfer_precondition():
    with pytest.raises(PreconditionViolated):
        transfer_net(sigma(3), sigma(2), 0.1, 10)


def test_transfer_on_random_triples():
    rng = np.random.Generator(np.random.PCG64(5))
    for _ in range(20):
        X = generate(RandomMetric(int(rng.integers(1, 5)), int(rng.integers(2**31))))
        Y = generate(RandomMetric(int(rng.integers(1, 5)), int(rng.integers(2**31))))
        eps = gh_exact(X, Y).value.hi
        Xp = transfer_net(Y, X, eps, 10)
        assert gh_exact(Xp, Y).value.hi <= 3 * eps + 1e-9
        assert precsim(Xp, X)
