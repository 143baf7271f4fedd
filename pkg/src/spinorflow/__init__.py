"""Numerical lab for the spinorial energy E(g, phi) = 1/2 int |nabla phi|^2 on flat tori."""

__version__ = "0.1.0"

from .clifford import CliffordRep, clifford_rep
from .functionals import SpinorPair, energy, energy_s, make_pair
from .lattice import Geometry, TorusLattice

__all__ = ["CliffordRep", "clifford_rep", "SpinorPair", "energy", "energy_s", "make_pair",
           "Geometry", "TorusLattice", "__version__"]
