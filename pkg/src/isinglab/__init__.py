"""isinglab: exact identities and desk-scale Monte Carlo for the critical
2D Ising and FK-Ising models on the square lattice."""

__version__ = "0.1.0"

from .domains import Rectangle, Disk, Polyomino, PrimalGraph, DobrushinDomain, build_domain
from .lattice import MedialPath, line_of_edge, line_for_direction, project_on_line
from .loops import FKDobrushinModel
from .observables import SpinObservable, fk_edge_observable_exact
from .spin import BETA_C, SpinGraph
from .fk import FKGraph, p_self_dual
