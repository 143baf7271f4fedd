"""Verification suites shared by the command line and the test-suite."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gradient as G
from . import jets
from .clifford import CliffordRep, inner
from .functionals import SpinorPair, dirac_energy, energy, energy_s
from .lattice import TorusLattice, horizontal_transport, normalize


def measured_order(err_coarse: float, err_fine: float, ratio: float = 2.0) -> float:
    if err_fine <= 0 or err_coarse <= 0:
        return math.inf
    return math.log(err_coarse / err_fine) / math.log(ratio)


@dataclass(frozen=True)
class Direction:
    """A band-limited tangent direction (metric part, spinor part before projection)."""

    metric: jets.FourierField
    spinor: jets.FourierField

    def sample(self, lat: TorusLattice, phi: np.ndarray):
        x = lat.points()
        h = self.metric.value(x)
        h = 0.5 * (h + np.swapaxes(h, 1, 2))
        psi = self.spinor.value(x)
        psi = psi - inner(phi, psi)[:, None] * phi
        return h, psi


def random_direction(rng: np.random.Generator, lat: TorusLattice, rep: CliffordRep, modes: int = 1,
                     metric: bool = True, spinor: bool = True) -> Direction:
    n = lat.n
    complex_ = np.iscomplexobj(rep.gammas)
    m = jets.random_field(rng, n, (n, n), 1.0 if metric else 0.0, kmax=modes, L=lat.L,
                          active=lat.active_axes, symmetric=True)
    s = jets.random_field(rng, n, (rep.dim,), 1.0 if spinor else 0.0, kmax=modes, L=lat.L,
                          active=lat.active_axes, complex_=complex_)
    return Direction(m, s)


def perturb(pair: SpinorPair, u, eps: float) -> SpinorPair:
    """Move along (h, psi): g + eps h, spinor normalised then carried horizontally."""
    g1 = pair.g + eps * u[0]
    phi = normalize(pair.phi + eps * u[1])
    return SpinorPair(pair.lat, pair.rep, g1, horizontal_transport(pair.rep, pair.g, g1, phi))


@dataclass
class GradientCheck:
    pairing: float      # <<Q_s, u>>
    derivative: float   # d/deps E_s along u
    residual: float     # |pairing + derivative|

    @property
    def relative(self) -> float:
        return self.residual / abs(self.derivative) if self.derivative != 0 else self.residual


def central_derivative(f, eps: float) -> float:
    """Fourth-order central difference of f at 0."""
    return (8.0 * (f(eps) - f(-eps)) - (f(2 * eps) - f(-2 * eps))) / (12.0 * eps)


def gradient_check(pair: SpinorPair, u, s: float = 0.0, eps: float = 1e-5) -> GradientCheck:
    lhs = G.l2_pair(pair, G.q_s(pair, s), u)
    dE = central_derivative(lambda e: energy_s(perturb(pair, u, e), s), eps)
    return GradientCheck(lhs, dE, abs(lhs + dE))


def tangency_residual(pair: SpinorPair) -> float:
    """max |<Q2, phi>| / (1 + max |nabla phi|^2)."""
    q2 = G.q2(pair)
    return float(np.max(np.abs(inner(q2, pair.phi))) / (1.0 + np.max(pair.grad_sq)))


@dataclass
class SecondVariation:
    finite_difference: float
    kappa_integral: float

    @property
    def relative(self) -> float:
        return abs(self.finite_difference - self.kappa_integral) / max(abs(self.kappa_integral), 1e-300)


def second_variation(pair: SpinorPair, u, eps: float = 1e-3) -> SecondVariation:
    E0 = energy(pair)
    fd = (energy(perturb(pair, u, eps)) - 2 * E0 + energy(perturb(pair, u, -eps))) / eps**2
    return SecondVariation(fd, G.hessian_quadratic(pair, u))


def weitzenbock_error(pair: SpinorPair) -> float:
    """|E_{1/8} - 1/2 int |D phi|^2| / (1/2 int |D phi|^2)."""
    de = dirac_energy(pair)
    return abs(energy_s(pair, 0.125) - de) / de


# ---------------------------------------------------------------- Killing jets


@dataclass
class KillingResidual:
    laplacian: float   # max |nabla^* nabla phi - n lam^2 phi|
    q1: float          # max |(|nabla phi|^2 g + div T - 2 <nabla phi (x) nabla phi>) - (n-2) lam^2 g|
    q2: float          # max |Q2|


def killing_jet_residuals(rep: CliffordRep, phi: np.ndarray, lam: float) -> KillingResidual:
    """Pointwise identities for jets with nabla_X phi = lam X . phi, in a frame parallel at the point.

    phi has shape (P, D).  First jets are P_k = lam gamma_k phi and second jets
    nabla_c nabla_k phi = lam^2 gamma_k gamma_c phi.
    """
    n = rep.n
    P = lam * np.einsum("kij,pj->pki", rep.gammas, phi)
    PP = lam**2 * np.einsum("kij,cjl,pl->pcki", rep.gammas, rep.gammas, phi)
    lap = G.rough_laplacian_jet(PP)
    divT = G.div_T_jet(rep, phi, P, PP)
    combo = -4.0 * G.assemble_q1(P, divT)
    gsq = np.sum(inner(P, P), axis=1)
    q2 = -lap + gsq[:, None] * phi
    norm2 = inner(phi, phi)
    return KillingResidual(
        float(np.max(np.abs(lap - n * lam**2 * phi))),
        float(np.max(np.abs(combo - (n - 2) * lam**2 * norm2[:, None, None] * np.eye(n)))),
        float(np.max(np.abs(q2 - n * lam**2 * (norm2 - 1.0)[:, None] * phi))),
    )
