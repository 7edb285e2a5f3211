from .gh import Correspondence, GhResult, gh_bounds, gh_exact, gh_interval, gh_pointed, hausdorff_between_sets
from .lipschitz import CoordinateMap, kuratowski, mcshane_fix, transfer_net
from .metric import FiniteSpace, Interval, PointedSpace, read_space, truncate, validate, write_space
from .order import PointMap, equivalent, precsim, widening_defect
from .pointed import QuadratureScheme, rho0, rho_pointed, rescaled_ball_rho
from .pyramid import PyramidHandle, RhoEstimate, SliceNet, rho, rho_N, slice_net
from .workers import WorkerPool
