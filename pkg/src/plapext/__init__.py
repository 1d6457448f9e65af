"""Numerical laboratory for the first eigenpair of the radial p-Laplacian
on the exterior of the unit ball, its Riccati/asymptotic identities, the
degenerate quadratic form, and the resonant solution geometry."""

from .core import Params, RadialGrid, RadialFunction, DualDensity, build_grid
from .weights import RadialWeight, make_weight
from .eigensolver import EigenPair, find_lambda1

__all__ = [
    "Params", "RadialGrid", "RadialFunction", "DualDensity", "build_grid",
    "RadialWeight", "make_weight", "EigenPair", "find_lambda1",
]

__version__ = "0.1.0"
