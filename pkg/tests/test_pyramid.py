import itertools

import pytest

from pyramidgh.metric import Interval, PointedSpace, diameter, point, scale, sigma
from pyramidgh.oracle import oracle_member, oracle_rho_N, oracle_slice
from pyramidgh.order import precsim
from pyramidgh.pyramid import (
    PyramidHandle,
    covers,
    join,
    member,
    rho,
    rho_N,
    slice_converge_report,
    slice_hausdorff,
    slice_net,
    tail_bound,
    worst_case_tail,
)
from pyramidgh.workers import WorkerPool
from pyramidgh.zoo import Path, generate, unpointed

of = PyramidHandle.of


def test_slice_net_of_two_points():
    net = slice_net(of(sigma(2)), 2, 2, 0.5)
    assert len(net) == 3
    assert net.certified
    assert net.net_radius == 0.25
    assert len(slice_net(PyramidHandle.maximal(), 2, 2, 0.5)) == 5
    assert len(slice_net(of(point()), 3)) == 1


def test_slice_net_matches_oracle():
    net = slice_net(of(sigma(3)), 3, None, 0.5)
    assert len(net) == len(oracle_slice(sigma(3), 3, 0.5))
    assert all(oracle_member(e, sigma(3)) for e in net.elements)


def test_pointed_slice_net():
    net = slice_net(of(PointedSpace(sigma(2), 0)), 2, 2, 0.5)
    assert net.pointed
    assert len(net) == 3


def test_sampled_levels_are_flagged():
    net = slice_net(of(sigma(5)), 4)
    assert not net.certified
    assert net.net_radius == net.delta
    assert all(member(e, of(sigma(5))) for e in net.elements)


def test_bad_levels():
    with pytest.raises(ValueError):
        slice_net(of(sigma(2)), 0)
    with pytest.raises(ValueError):
        slice_net(of(sigma(2)), 2, delta=0)


def test_downward_closure():
    handle = of(sigma(3))
    for e in slice_net(handle, 3, None, 0.5).elements:
        assert member(scale(e, 0.5), handle)


def test_join_dominates_both():
    path = unpointed(generate(Path(2.0, 4)))
    handle = of(path)
    triples = [e for e in slice_net(handle, 3, None, 0.5).elements if e.n == 3]
    for e1, e2 in itertools.islice(itertools.combinations(triples, 2), 10):
        j = join(e1, e2, handle, 3)
        assert j.n <= 6
        assert diameter(j) <= 3
        assert member(j, handle)
        assert precsim(e1, j) and precsim(e2, j)


def test_covers():
    assert covers(of(sigma(2)), of(sigma(3)), 3)
    assert covers(of(sigma(3)), of(sigma(2)), 3) is False
    assert covers(PyramidHandle.maximal(), of(sigma(2)), 2) is False
    assert covers(of(sigma(2)), PyramidHandle.maximal(), 5)


def test_tails():
    assert tail_bound(of(sigma(2)), of(sigma(3)), 3) == 0.0625
    assert worst_case_tail(8) == 10 / 256
    assert tail_bound(PyramidHandle.maximal(), of(point()), 8) == worst_case_tail(8) / 2
    assert tail_bound(of(sigma(2, 20)), of(point()), 8) <= worst_case_tail(8)


async def test_identical_pyramids(pool: WorkerPool):
    bound = await slice_hausdorff(of(sigma(3)), of(sigma(3)), 3, pool=pool)
    assert bound.value == Interval.point(0)
    assert bound.how == "trivial"

    estimate = await rho(of(sigma(3)), of(sigma(3)), 3, pool=pool)
    assert all(iv == Interval.point(0) for iv in estimate.per_N.values())
    assert estimate.total == Interval(0, estimate.tail_bound)


async def test_point_against_two_points(pool: WorkerPool):
    estimate = await rho(of(point()), of(sigma(2)), 3, pool=pool)
    assert estimate.total.contains(0.25, 1e-12)
    assert estimate.per_N[2] == Interval.point(0.5)


async def test_equilateral_closed_form(pool: WorkerPool):
    estimate = await rho(of(sigma(2)), of(sigma(4)), 3, pool=pool)
    assert estimate.total.contains(0.125, 1e-12)
    assert estimate.total.lo > 0


async def test_second_level_closed_form(small_corpus, pool: WorkerPool):
    for A, B in zip(small_corpus, small_corpus[1:]):
        value = await rho_N(of(A), of(B), 2, 0.25, pool=pool)
        expected = abs(min(diameter(A), 2) - min(diameter(B), 2)) / 2
        assert value.contains(expected, 1e-12)


async def test_contains_oracle(small_corpus, pool: WorkerPool):
    spaces = small_corpus[:5]
    memo: dict = {}
    for A, B in zip(spaces, spaces[1:]):
        for N in (2, 3):
            value = await rho_N(of(A), of(B), N, 0.5, pool=pool)
            assert value.contains(oracle_rho_N(A, B, N, 0.5, memo=memo), 0.5 + 1e-9)


async def test_a_priori_range(small_corpus, pool: WorkerPool):
    for A in small_corpus[:2]:
        estimate = await rho(of(A), PyramidHandle.maximal(), 3, pool=pool)
        assert estimate.total.hi <= 2 + estimate.tail_bound
        for N, iv in estimate.per_N.items():
            assert 0 <= iv.lo <= iv.hi <= N
        assert estimate.to_json()["per_N"][0]["N"] == 1
        assert estimate.tail_bound <= estimate.worst_case_tail == worst_case_tail(3)
        assert estimate.to_json()["tail_worst_case"] == estimate.worst_case_tail


async def test_converge_report_on_a_constant_family(pool: WorkerPool):
    family = [of(sigma(2)), of(sigma(2))]
    report = await slice_converge_report(family, of(sigma(2)), 2, pool=pool)
    assert [b.value for b in report] == [Interval.point(0), Interval.point(0)]


async def test_mixed_pointedness_is_refused(pool: WorkerPool):
    with pytest.raises(ValueError):
        await slice_hausdorff(of(sigma(2)), of(PointedSpace(sigma(2), 0)), 2, pool=pool)
    with pytest.raises(ValueError):
        await rho(of(sigma(2)), of(sigma(3)), 0, pool=pool)


@pytest.mark.slow
async def test_equilateral_slices_converge(pool: WorkerPool):
    family = [of(sigma(n)) for n in range(1, 7)]
    report = await slice_converge_report(family, of(sigma(6)), 4, delta=0.25, pool=pool)
    for n, bound in zip(range(1, 7), report):
        if n < 4:
            assert bound.value.contains(0.5, 0.25 + 1e-9)
        else:
            assert bound.value == Interval.point(0)
