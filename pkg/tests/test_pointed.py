import math

import pytest

from pyramidgh.metric import FiniteSpace, PointedSpace, ball, scale, sigma
from pyramidgh.pointed import (
    QuadratureScheme,
    pointed_slice_net,
    prop_rad_bound,
    rescaled_ball,
    rescaled_ball_rho,
    rho0,
    rho0_comparison_constant,
    rho_pointed,
    strongly_equivalent,
)
from pyramidgh.pyramid import PyramidHandle, rho
from pyramidgh.workers import WorkerPool
from pyramidgh.zoo import Path, Spider, generate


def path(length: float, k: int, base: int = 0) -> PointedSpace:
    P = generate(Path(length, k))
    return PointedSpace(P.space, base)


def test_scheme_weights_integrate_the_density():
    scheme = QuadratureScheme(count=200)
    total = sum(w for _, w in scheme.nodes)
    assert total == pytest.approx((math.exp(-scheme.r_min**2) - math.exp(-scheme.r_max**2)) / 2, abs=1e-3)
    radii = scheme.radii
    assert radii[0] == pytest.approx(0.05) and radii[-1] == pytest.approx(3.0)
    assert all(a < b for a, b in zip(radii, radii[1:]))
    assert scheme.upper_tail == pytest.approx(math.exp(-9))


def test_finer_schemes_have_smaller_error():
    assert QuadratureScheme(count=64).panel_error() < QuadratureScheme(count=16).panel_error()


@pytest.mark.parametrize(
    "kwargs",
    [dict(r_min=0), dict(r_min=2.0, r_max=1.0), dict(count=1)],
)
def test_bad_schemes(kwargs):
    with pytest.raises(ValueError):
        QuadratureScheme(**kwargs)


def test_constants():
    assert prop_rad_bound(16) == 0.75
    assert rho0_comparison_constant(1) == pytest.approx(4 / (math.exp(-1) - math.exp(-4)))
    assert 11.4 < rho0_comparison_constant(1) < 11.5


def test_rescaled_ball():
    P = path(2.0, 4)
    assert rescaled_ball(P, 1.0).n == 3
    small = rescaled_ball(P, 0.5)
    assert small.n == 2
    assert small.space.d(0, 1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        rescaled_ball(P, 0)


def test_strong_equivalence():
    P = path(2.0, 4)
    assert strongly_equivalent(P, P)
    assert strongly_equivalent(P, path(2.0, 4, base=4))
    assert not strongly_equivalent(P, path(2.0, 4, base=2))


def test_pointed_slice_net():
    net = pointed_slice_net(PointedSpace(sigma(2), 0), 2, 2, 0.5)
    assert net.pointed and len(net) == 3
    with pytest.raises(ValueError):
        pointed_slice_net(PyramidHandle.of(sigma(2)), 2)


async def test_rho_pointed_needs_pointed_handles(pool: WorkerPool):
    with pytest.raises(ValueError):
        await rho_pointed(PyramidHandle.of(sigma(2)), PyramidHandle.of(sigma(3)), 2, pool=pool)


async def test_pointed_is_finer_than_unpointed(pool: WorkerPool):
    # same unpointed space, bases at distance one apart
    end, center = path(2.0, 2, 0), path(2.0, 2, 1)
    estimate = await rho_pointed(end, center, 2, 0.5, pool=pool)
    assert estimate.per_N[2].lo == pytest.approx(0.5)


async def test_rescaled_ball_rho_of_a_space_with_itself(pool: WorkerPool):
    P = path(2.0, 4)
    value = await rescaled_ball_rho(P, P, 1.0, n_max=3, pool=pool)
    assert value.lo == 0


async def test_rho0_of_a_space_with_itself(pool: WorkerPool):
    P = path(2.0, 4)
    report = await rho0(P, P, QuadratureScheme(count=4), n_max=2, pool=pool)
    assert report.total.lo == 0
    assert report.total.hi <= 1
    assert len(report.nodes) == 4
    assert report.to_json()["tails"]["quadrature"] == report.quadrature_error


async def test_rho0_stays_in_range(pool: WorkerPool):
    report = await rho0(path(1.0, 2), path(2.0, 2), QuadratureScheme(count=4), n_max=2, delta=0.5, pool=pool)
    assert 0 <= report.total.lo <= report.total.hi <= 1
    assert all(0 <= iv.lo <= iv.hi <= 2 for _, iv in report.nodes)


@pytest.mark.parametrize(
    "P, r, eps",
    [
        (path(2.0, 8), 1.0, 0.25),
        (path(2.0, 8, 4), 0.5, 0.5),
        (generate(Spider(3, 1.0, 2)), 0.5, 0.5),
    ],
)
async def test_balls_move_continuously(P, r, eps, pool: WorkerPool):
    estimate = await rho_pointed(ball(P, r), ball(P, r + eps), 2, 0.25, pool=pool)
    assert estimate.total.lo <= 3 * eps + 1e-9


async def test_scaling_up_does_not_shrink_rho(pool: WorkerPool):
    A, B = path(1.0, 2), path(2.0, 2, 1)
    r = 0.5
    shrunk = [PointedSpace(scale(P.space, r), P.base) for P in (A, B)]
    original = await rho_pointed(A, B, 3, 0.25, pool=pool)
    scaled = await rho_pointed(*shrunk, 3, 0.25, pool=pool)
    assert original.total.lo <= scaled.total.hi / r + 1e-9


async def test_unpointed_rho_is_below_every_pointed_choice(pool: WorkerPool):
    X = FiniteSpace([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    Y = sigma(2, 1.5)
    plain = await rho(PyramidHandle.of(X), PyramidHandle.of(Y), 3, 0.25, pool=pool)
    for a in range(X.n):
        for b in range(Y.n):
            pointed = await rho_pointed(PointedSpace(X, a), PointedSpace(Y, b), 3, 0.25, pool=pool)
            assert plain.total.lo <= pointed.total.hi + 1e-9
