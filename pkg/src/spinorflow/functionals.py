"""Energy functionals of a (metric, spinor) pair on a lattice torus."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .clifford import CliffordRep, inner
from .lattice import Geometry, TorusLattice, check_metric


class ConstraintError(ValueError):
    pass


@dataclass
class SpinorPair:
    """Metric g (S, n, n) and unit spinor phi (S, D) in the square-root frame."""

    lat: TorusLattice
    rep: CliffordRep
    g: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        S = self.lat.sites
        n = self.lat.n
        if self.g.shape != (S, n, n) or self.phi.shape != (S, self.rep.dim):
            raise ValueError(f"bad field shapes {self.g.shape}, {self.phi.shape} for lattice with {S} sites")
        if self.rep.n != n:
            raise ValueError("representation dimension does not match lattice")

    @cached_property
    def geo(self) -> Geometry:
        return Geometry(self.lat, self.rep, self.g)

    @cached_property
    def nabla(self) -> np.ndarray:
        """nabla_{e_a} phi, shape (S, n, D)."""
        return self.geo.cov_deriv_spinor(self.phi)

    @cached_property
    def grad_sq(self) -> np.ndarray:
        """|nabla phi|^2 per site."""
        return np.sum(inner(self.nabla, self.nabla), axis=1)

    def check_unit(self, tol: float = 1e-10) -> None:
        dev = np.max(np.abs(inner(self.phi, self.phi) - 1.0))
        if dev > tol:
            raise ConstraintError(f"spinor is not unit length (deviation {dev:.2e})")

    def replace(self, g=None, phi=None) -> "SpinorPair":
        return SpinorPair(self.lat, self.rep, self.g if g is None else g, self.phi if phi is None else phi)


def make_pair(lat: TorusLattice, rep: CliffordRep, g: np.ndarray, phi: np.ndarray, tol: float = 1e-10) -> SpinorPair:
    check_metric(g)
    pair = SpinorPair(lat, rep, g, phi)
    pair.check_unit(tol)
    return pair


def energy(pair: SpinorPair) -> float:
    """E = 1/2 int |nabla phi|^2 dv."""
    return 0.5 * pair.geo.integrate(pair.grad_sq)


def total_scalar_curvature(pair: SpinorPair) -> float:
    return pair.geo.integrate(pair.geo.scal)


def energy_s(pair: SpinorPair, s: float) -> float:
    """E + s * int scal dv.  s = 1/8 gives the Dirac energy, s = 1/16 the G2 Dirichlet energy / 16."""
    if s == 0:
        return energy(pair)
    return energy(pair) + s * total_scalar_curvature(pair)


def dirac_energy(pair: SpinorPair) -> float:
    D = pair.geo.dirac(pair.phi)
    return 0.5 * pair.geo.integrate(inner(D, D))


def volume(pair: SpinorPair) -> float:
    return pair.geo.volume()


def grad_norm_sq(pair: SpinorPair) -> float:
    """||nabla phi||^2 = int |nabla phi|^2 dv."""
    return pair.geo.integrate(pair.grad_sq)


def constrained_diagnostics(pair: SpinorPair) -> dict:
    """Diagnostics for volume-constrained critical points.

    These satisfy |nabla phi|^2 g + div T - 2<nabla phi (x) nabla phi> = c g
    and the spinor equation, with c = (n-2)/n ||nabla phi||^2 / Vol.  The
    left-hand side equals -4 Q1.  Reported residual is the L2 norm of the
    mismatch in both components.
    """
    from .gradient import negative_gradient, l2_norm

    n = pair.lat.n
    vol = volume(pair)
    c = (n - 2) / n * grad_norm_sq(pair) / vol
    q1, q2 = negative_gradient(pair)
    res = l2_norm(pair, (-4.0 * q1 - c * pair.g, q2))
    return {"c": c, "volume": vol, "residual": res}
