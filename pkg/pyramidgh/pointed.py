"""
pointed pyramids, the rescaled-ball distance and its weighted integral

    rho0(A, B) = integral over r > 0 of rho(r^-1 B(a, r), r^-1 B(b, r)) * r e^{-r^2} dr

the integral runs over a geometric trapezoid grid; what the grid cannot see
(both tails and the trapezoid error) is added to the interval.
"""

import logging
import math
from typing import Optional

import attrs
import trio

from .metric import Interval, PointedSpace, ball, scale
from .order import PRECSIM_TOL, equivalent_pointed
from .pyramid import (
    DEFAULT_BUDGET,
    DEFAULT_DELTA,
    DEFAULT_NMAX,
    DEFAULT_TOL,
    PyramidHandle,
    RhoEstimate,
    SliceNet,
    rho,
    slice_net,
)
from .workers import WorkerPool

_log = logging.getLogger(__name__)

PointedSliceNet = SliceNet

# the integrand never exceeds this
INTEGRAND_CAP = 2.0
# the integrand is (LIPSCHITZ_SCALE / r)-Lipschitz in r
LIPSCHITZ_SCALE = 8.0


def _positive(instance, attribute, value):
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value}")


def weight(r: float) -> float:
    return r * math.exp(-r * r)


def _weight_slope(r: float) -> float:
    return abs((1 - 2 * r * r) * math.exp(-r * r))


@attrs.frozen
class QuadratureScheme:
    r_min: float = attrs.field(default=0.05, validator=_positive)
    r_max: float = attrs.field(default=3.0, validator=_positive)
    count: int = attrs.field(default=32)

    def __attrs_post_init__(self):
        if not self.r_min < self.r_max:
            raise ValueError(f"need r_min < r_max, got {self.r_min} >= {self.r_max}")
        if self.count < 2:
            raise ValueError(f"need at least two nodes, got {self.count}")

    @property
    def radii(self) -> list[float]:
        ratio = self.r_max / self.r_min
        return [self.r_min * ratio ** (k / (self.count - 1)) for k in range(self.count)]

    @property
    def nodes(self) -> list[tuple[float, float]]:
        """(r, weight) pairs of the composite trapezoid rule for r e^{-r^2} dr"""
        radii = self.radii
        out = []
        for k, r in enumerate(radii):
            left = radii[k] - radii[k - 1] if k > 0 else 0.0
            right = radii[k + 1] - radii[k] if k + 1 < len(radii) else 0.0
            out.append((r, weight(r) * (left + right) / 2))
        return out

    @property
    def lower_tail(self) -> float:
        """integral of INTEGRAND_CAP * r e^{-r^2} over [0, r_min]"""
        return 1 - math.exp(-self.r_min**2)

    @property
    def upper_tail(self) -> float:
        return math.exp(-self.r_max**2)

    def panel_error(self) -> float:
        """trapezoid error over all panels for a (8/r)-Lipschitz integrand bounded by 2"""
        radii = self.radii
        total = 0.0
        for a, b in zip(radii, radii[1:]):
            peak = weight(min(max(1 / math.sqrt(2), a), b))
            slope = max(_weight_slope(a), _weight_slope(b))
            if a <= math.sqrt(1.5) <= b:
                slope = max(slope, _weight_slope(math.sqrt(1.5)))
            lipschitz = LIPSCHITZ_SCALE / a * peak + INTEGRAND_CAP * slope
            total += lipschitz * (b - a) ** 2 / 4
        return total


def _handle(A: PointedSpace | PyramidHandle) -> PyramidHandle:
    if isinstance(A, PyramidHandle):
        if not A.pointed:
            raise ValueError("pointed distances need pointed handles")
        return A
    return PyramidHandle.of(A)


def pointed_slice_net(
    A: PointedSpace | PyramidHandle, N: int, D: Optional[float] = None, delta: float = DEFAULT_DELTA, **kwargs
) -> PointedSliceNet:
    return slice_net(_handle(A), N, D, delta, **kwargs)


async def rho_pointed(
    A: PointedSpace | PyramidHandle,
    B: PointedSpace | PyramidHandle,
    n_max: int = DEFAULT_NMAX,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    pool: Optional[WorkerPool] = None,
) -> RhoEstimate:
    return await rho(_handle(A), _handle(B), n_max, delta, budget, tol, seed, pool)


def rescaled_ball(P: PointedSpace, r: float) -> PointedSpace:
    if not r > 0:
        raise ValueError(f"ball radius must be positive, got {r}")
    B = ball(P, r)
    return PointedSpace(scale(B.space, 1 / r), B.base)


async def rescaled_ball_rho(
    A: PointedSpace,
    B: PointedSpace,
    r: float,
    n_max: int = DEFAULT_NMAX,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
    tol: float = DEFAULT_TOL,
    pool: Optional[WorkerPool] = None,
) -> Interval:
    estimate = await rho_pointed(rescaled_ball(A, r), rescaled_ball(B, r), n_max, delta, budget, tol, pool=pool)
    return estimate.total


@attrs.frozen
class Rho0Report:
    nodes: tuple
    lower_tail: float
    upper_tail: float
    quadrature_error: float
    total: Interval

    def to_json(self) -> dict:
        return {
            "nodes": [{"r": r, "lo": iv.lo, "hi": iv.hi} for r, iv in self.nodes],
            "tails": {"lower": self.lower_tail, "upper": self.upper_tail, "quadrature": self.quadrature_error},
            "total_lo": self.total.lo,
            "total_hi": self.total.hi,
        }


async def rho0(
    A: PointedSpace,
    B: PointedSpace,
    scheme: QuadratureScheme = QuadratureScheme(),
    n_max: int = DEFAULT_NMAX,
    delta: float = DEFAULT_DELTA,
    budget: int = DEFAULT_BUDGET,
    tol: float = DEFAULT_TOL,
    pool: Optional[WorkerPool] = None,
) -> Rho0Report:
    """
    the integral leans on the integrand being (8/r)-Lipschitz in r, which
    holds for geodesic spaces and is assumed for their samples.
    """
    pool = pool or WorkerPool()
    nodes = scheme.nodes
    values: list = [None] * len(nodes)

    async def _node(k: int, r: float):
        values[k] = await rescaled_ball_rho(A, B, r, n_max, delta, budget, tol, pool)

    async with trio.open_nursery() as nursery:
        for k, (r, _) in enumerate(nodes):
            nursery.start_soon(_node, k, r)

    clamped = [Interval(min(iv.lo, INTEGRAND_CAP), min(iv.hi, INTEGRAND_CAP)) for iv in values]
    error = scheme.panel_error()
    lo = sum(w * iv.lo for (_, w), iv in zip(nodes, clamped)) - error
    hi = sum(w * iv.hi for (_, w), iv in zip(nodes, clamped)) + error
    hi += scheme.lower_tail + scheme.upper_tail
    # the integrand is at most 2 and the weight integrates to 1/2
    total = Interval.clamped(max(lo, 0.0), min(hi, 1.0))
    _log.debug("rho0(%s, %s) = %s, quadrature error %s", A.label, B.label, total, error)
    return Rho0Report(
        nodes=tuple((r, iv) for (r, _), iv in zip(nodes, clamped)),
        lower_tail=scheme.lower_tail,
        upper_tail=scheme.upper_tail,
        quadrature_error=error,
        total=total,
    )


def strongly_equivalent(
    A: PointedSpace, B: PointedSpace, scheme: QuadratureScheme = QuadratureScheme(), tol: float = PRECSIM_TOL
) -> bool:
    """balls around the bases are equivalent at every quadrature radius"""
    return all(equivalent_pointed(ball(A, r), ball(B, r), tol) for r in scheme.radii)


def prop_rad_bound(R: float) -> float:
    """bound on rho between a geodesic space pointed at x0 with a long geodesic from x0 and the maximal pyramid"""
    root = math.sqrt(R)
    return (2 + root) * 2 ** (1 - root)


def rho0_comparison_constant(R: float) -> float:
    """C with rho <= C * rho0 for pointed spaces of radius <= R"""
    return 4 * R / (math.exp(-R * R) - math.exp(-4 * R * R))
