"""
1-Lipschitz maps into (R^n, sup-norm) and the net transfer built from them.
"""

import logging

import attrs
import numpy as np

from .metric import FiniteSpace, InfiniteEntryError
from .order import widening_defect

_log = logging.getLogger(__name__)

LIP_TOL = 1e-12


class PreconditionViolated(Exception):
    ...


@attrs.frozen(eq=False)
class CoordinateMap:
    """row i holds the coordinates of point i"""

    values: np.ndarray = attrs.field(converter=lambda v: np.array(v, dtype=float))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def sup_distances(self) -> np.ndarray:
        v = self.values
        return np.abs(v[:, None, :] - v[None, :, :]).max(axis=2)


def kuratowski(X: FiniteSpace) -> CoordinateMap:
    """x -> (d(x, x_1), ..., d(x, x_n)), an isometry into sup-norm space"""
    if X.has_infinite:
        raise InfiniteEntryError("Kuratowski embedding needs finite distances")
    return CoordinateMap(X.matrix.copy())


def _lipschitz_gap(d: np.ndarray, f: np.ndarray) -> float:
    spread = np.abs(f[:, None, :] - f[None, :, :]).max(axis=2)
    with np.errstate(invalid="ignore"):
        excess = spread - d
    excess[np.isinf(d)] = -np.inf
    return float(excess.max())


def _mcshane(d: np.ndarray, f: np.ndarray, eps: float) -> np.ndarray:
    if _lipschitz_gap(d, f) > eps + LIP_TOL * max(1.0, float(np.abs(f).max(initial=0.0))):
        raise PreconditionViolated(f"map is not 1-Lipschitz up to {eps}")
    # fixed[i, c] = min over i2 of f[i2, c] + d[i, i2]
    return (f[None, :, :] + d[:, :, None]).min(axis=1)


def mcshane_fix(X: FiniteSpace, f: CoordinateMap, eps: float) -> CoordinateMap:
    """
    repair an eps-almost 1-Lipschitz map into an honest 1-Lipschitz one that
    moves no coordinate by more than eps
    """
    if f.values.shape[0] != X.n:
        raise ValueError(f"map has {f.values.shape[0]} points, space has {X.n}")
    return CoordinateMap(_mcshane(X.matrix, f.values, eps))


def _merge_coincident(m: np.ndarray) -> list[int]:
    keep: list[int] = []
    for i in range(m.shape[0]):
        if all(m[i, k] > LIP_TOL for k in keep):
            keep.append(i)
    return keep


def transfer_net(Yp: FiniteSpace, X: FiniteSpace, eps: float, D: float) -> FiniteSpace:
    """
    given Yp within 2*eps of being dominated by X, build X' <= X whose points
    sit over those of Yp, with d_GH(X', Yp ^ D) <= eps
    """
    found = widening_defect(Yp, X)
    if found.defect > 2 * eps + LIP_TOL:
        raise PreconditionViolated(f"widening defect {found.defect} exceeds 2*eps={2 * eps}")
    g = list(found.witness.assignment)
    # pullback of dX along g: a pseudo-metric on the points of Yp
    pulled = X.matrix[np.ix_(g, g)]
    coords = _mcshane(pulled, kuratowski(Yp).values, 2 * eps)
    m = np.minimum(CoordinateMap(coords).sup_distances(), D)
    keep = _merge_coincident(m)
    _log.debug("transfer: %d points of Yp, %d after merging", Yp.n, len(keep))
    return FiniteSpace(m[np.ix_(keep, keep)], label=f"transfer({Yp.label or 'Y'})")
