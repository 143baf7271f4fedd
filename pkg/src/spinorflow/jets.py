"""Exact jets of band-limited fields, used as continuum oracles.

A FourierField is a finite trigonometric sum on the torus of side L.  Its
value and first two derivatives are known in closed form, so Christoffel
symbols, the spin connection, nabla phi, the Dirac operator and curvature can
be evaluated exactly at any point and compared with the lattice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import CliffordRep, inner, spin_lie_algebra


@dataclass(frozen=True)
class FourierField:
    """f(x) = const + sum_m cos(2 pi k_m.x/L) A_m + sin(2 pi k_m.x/L) B_m."""

    const: np.ndarray
    ks: np.ndarray          # (M, n) integer wave vectors
    cos_coef: np.ndarray    # (M, *comp)
    sin_coef: np.ndarray    # (M, *comp)
    L: float = 1.0

    @property
    def n(self) -> int:
        return self.ks.shape[1]

    def _phase(self, x):
        x = np.atleast_2d(x)
        return 2 * np.pi * x @ self.ks.T / self.L  # (P, M)

    def value(self, x: np.ndarray) -> np.ndarray:
        th = self._phase(x)
        return (self.const[None] + np.tensordot(np.cos(th), self.cos_coef, axes=1)
                + np.tensordot(np.sin(th), self.sin_coef, axes=1))

    def deriv(self, x: np.ndarray) -> np.ndarray:
        """First derivatives, shape (P, n, *comp)."""
        th = self._phase(x)
        kk = 2 * np.pi * self.ks / self.L  # (M, n)
        c = np.einsum("pm,mn->pnm", np.cos(th), kk)
        s = np.einsum("pm,mn->pnm", np.sin(th), kk)
        return np.tensordot(c, self.sin_coef, axes=1) - np.tensordot(s, self.cos_coef, axes=1)

    def deriv2(self, x: np.ndarray) -> np.ndarray:
        """Second derivatives, shape (P, n, n, *comp)."""
        th = self._phase(x)
        kk = 2 * np.pi * self.ks / self.L
        kk2 = np.einsum("ma,mb->mab", kk, kk)
        c = np.einsum("pm,mab->pabm", np.cos(th), kk2)
        s = np.einsum("pm,mab->pabm", np.sin(th), kk2)
        return -(np.tensordot(c, self.cos_coef, axes=1) + np.tensordot(s, self.sin_coef, axes=1))

    def scaled(self, factor: float) -> "FourierField":
        return FourierField(self.const * factor, self.ks, self.cos_coef * factor, self.sin_coef * factor, self.L)


def wave_vectors(n: int, kmax: int, active: tuple[int, ...] | None = None) -> np.ndarray:
    """Half-space of nonzero integer vectors with |k_i| <= kmax supported on active axes."""
    active = tuple(range(n)) if active is None else tuple(active)
    grids = np.meshgrid(*[np.arange(-kmax, kmax + 1)] * len(active), indexing="ij")
    sub = np.stack([g.ravel() for g in grids], axis=-1)
    keep = []
    for k in sub:
        nz = np.nonzero(k)[0]
        if len(nz) and k[nz[0]] > 0:
            full = np.zeros(n, dtype=int)
            full[list(active)] = k
            keep.append(full)
    return np.array(keep, dtype=int).reshape(-1, n)


def random_field(rng: np.random.Generator, n: int, comp: tuple[int, ...], amplitude: float,
                 kmax: int = 1, L: float = 1.0, active=None, const=None, symmetric=False,
                 complex_=False) -> FourierField:
    ks = wave_vectors(n, kmax, active)
    M = len(ks)

    def draw():
        a = rng.standard_normal((M,) + comp)
        if complex_:
            a = a + 1j * rng.standard_normal((M,) + comp)
        if symmetric:
            a = 0.5 * (a + np.swapaxes(a, -1, -2))
        # damp higher modes so the field stays smooth
        decay = 1.0 / (1.0 + np.sum(ks**2, axis=1)) ** 1.5
        return amplitude * a * decay.reshape((M,) + (1,) * len(comp))

    const = np.zeros(comp, dtype=complex if complex_ else float) if const is None else np.asarray(const)
    return FourierField(const, ks, draw(), draw(), L)


@dataclass(frozen=True)
class FieldSpec:
    """A band-limited pair: metric g = metric field, spinor phi = psi/|psi|."""

    metric: FourierField
    spinor: FourierField


def spinor_jets(psi: FourierField, x):
    """Value and first two derivatives of phi = psi/|psi|."""
    p = psi.value(x)
    dp = psi.deriv(x)
    ddp = psi.deriv2(x)
    r2 = inner(p, p)
    r = np.sqrt(r2)
    dr2 = 2 * inner(p[:, None], dp)  # (P, n)
    ddr2 = 2 * (inner(dp[:, :, None], dp[:, None, :]) + inner(p[:, None, None], ddp))
    # 1/r and its derivatives
    u = 1 / r
    du = -0.5 * r2[:, None] ** -1.5 * dr2
    ddu = 0.75 * r2[:, None, None] ** -2.5 * dr2[:, :, None] * dr2[:, None, :] - 0.5 * r2[:, None, None] ** -1.5 * ddr2
    phi = p * u[:, None]
    dphi = dp * u[:, None, None] + p[:, None] * du[..., None]
    ddphi = (ddp * u[:, None, None, None] + dp[:, :, None] * du[:, None, :, None]
             + dp[:, None, :] * du[:, :, None, None] + p[:, None, None] * ddu[..., None])
    return phi, dphi, ddphi


def sample(spec: FieldSpec, points: np.ndarray):
    """Exact samples (g, phi) at lattice points."""
    g = spec.metric.value(points)
    g = 0.5 * (g + np.swapaxes(g, -1, -2))
    psi = spec.spinor.value(points)
    phi = psi / np.sqrt(inner(psi, psi))[:, None]
    return g, phi


@dataclass
class PointJet:
    """Continuum geometry at a batch of points."""

    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray


def jet_oracle(spec: FieldSpec, x: np.ndarray) -> PointJet:
    g = spec.metric.value(x)
    dg = spec.metric.deriv(x)
    ddg = spec.metric.deriv2(x)
    phi, dphi, ddphi = spinor_jets(spec.spinor, x)
    return PointJet(g, dg, ddg, phi, dphi, ddphi)


def _sym_sqrt_and_deriv(g, dg):
    """S = g^{1/2} and dS solving dS S + S dS = dg, batched over points and directions."""
    w, V = np.linalg.eigh(g)
    s = np.sqrt(w)
    S = np.einsum("pij,pj,pkj->pik", V, s, V)
    gd = np.einsum("pji,pmjk,pkl->pmil", V, dg, V)
    dSp = gd / (s[:, None, :, None] + s[:, None, None, :])
    dS = np.einsum("pij,pmjk,plk->pmil", V, dSp, V)
    return S, dS


def christoffels_jet(jet: PointJet) -> np.ndarray:
    ginv = np.linalg.inv(jet.g)
    X = np.transpose(jet.dg, (0, 3, 1, 2))
    low = 0.5 * (X + np.swapaxes(X, 2, 3) - jet.dg)
    return np.einsum("pkl,plij->pkij", ginv, low)


def christoffels_deriv_jet(jet: PointJet) -> np.ndarray:
    """d_m Gamma^k_ij, shape (P, m, k, i, j)."""
    ginv = np.linalg.inv(jet.g)
    X = np.transpose(jet.dg, (0, 3, 1, 2))
    low = 0.5 * (X + np.swapaxes(X, 2, 3) - jet.dg)
    # d_m of low: ddg[p, m, i, j, k, l] layout is (P, n, n, n, n) = d_m d_i g_jl
    dd = jet.ddg  # (P, m, i, j, l) meaning d_m d_i g_jl
    Y = np.transpose(dd, (0, 1, 4, 2, 3))  # (P, m, l, i, j) = d_m d_i g_jl
    dlow = 0.5 * (Y + np.swapaxes(Y, 3, 4) - dd)
    dginv = -np.einsum("pka,pmab,pbl->pmkl", ginv, jet.dg, ginv)
    return np.einsum("pmkl,plij->pmkij", dginv, low) + np.einsum("pkl,pmlij->pmkij", ginv, dlow)


def frame_jet(jet: PointJet):
    """b = g^{-1/2} and its first derivatives d_m b, shape (P, m, n, n)."""
    S, dS = _sym_sqrt_and_deriv(jet.g, jet.dg)
    b = np.linalg.inv(S)
    db = -np.einsum("pij,pmjk,pkl->pmil", b, dS, b)
    return b, db


def spin_connection_jet(jet: PointJet) -> np.ndarray:
    Gam = christoffels_jet(jet)
    b, db = frame_jet(jet)
    Y = db + np.einsum("pnml,pla->pmna", Gam, b)
    gb = np.einsum("pno,pob->pnb", jet.g, b)
    return np.einsum("pmna,pnb->pmab", Y, gb)


def nabla_phi_jet(rep: CliffordRep, jet: PointJet) -> np.ndarray:
    b, _ = frame_jet(jet)
    om = spin_connection_jet(jet)
    Z = jet.dphi + np.einsum("pmij,pj->pmi", spin_lie_algebra(rep, om), jet.phi)
    return np.einsum("pma,pmi->pai", b, Z)


def dirac_jet(rep: CliffordRep, jet: PointJet) -> np.ndarray:
    return np.einsum("aij,paj->pi", rep.gammas, nabla_phi_jet(rep, jet))


def ricci_jet(jet: PointJet) -> np.ndarray:
    G = christoffels_jet(jet)
    dG = christoffels_deriv_jet(jet)
    return (np.einsum("pkkij->pij", dG) - np.einsum("pjkik->pij", dG)
            + np.einsum("pkkl,plij->pij", G, G) - np.einsum("pkjl,plik->pij", G, G))


def scal_jet(jet: PointJet) -> np.ndarray:
    return np.einsum("pij,pij->p", np.linalg.inv(jet.g), ricci_jet(jet))


def metric_field(n: int, perturb: FourierField | None = None, L: float = 1.0) -> FourierField:
    """Flat metric plus an optional symmetric perturbation."""
    if perturb is None:
        return FourierField(np.eye(n), np.zeros((0, n), dtype=int), np.zeros((0, n, n)), np.zeros((0, n, n)), L)
    return FourierField(np.eye(n) + perturb.const, perturb.ks, perturb.cos_coef, perturb.sin_coef, L)
