"""Periodic lattice discretisation of metrics, spinor fields and their connection.

Fields are stored flat: an array of shape (S, ...) where S is the number of
lattice sites in row-major order of the grid.  Frame quantities use the
symmetric square-root frame b = g^{-1/2}, stored as b[s, mu, a] so that
e_a = sum_mu b[mu, a] d_mu.  Spinor components are taken with respect to the
spin frame covering b.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations

import numpy as np
import scipy.linalg

from .clifford import CliffordRep, inner, spin_lie_algebra, spin_lift


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class TorusLattice:
    """n-torus of side L with N sites per axis and spacing h = L/N.

    ``shape`` may override the per-axis site counts.  An axis with a single
    site stands for a direction along which every field is constant; all
    stencils then return exactly zero there, which is bit-identical to
    sampling the same data on N sites.
    """

    n: int
    N: int
    L: float = 1.0
    order: int = 2
    shape: tuple[int, ...] | None = None

    def __post_init__(self):
        shape = tuple(self.shape) if self.shape is not None else (self.N,) * self.n
        if len(shape) != self.n:
            raise ValueError("shape length must equal n")
        if any(s != 1 and s < 4 for s in shape) or self.N < 4:
            raise ValueError("need at least 4 sites along every active axis")
        if self.order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")
        if self.L <= 0:
            raise ValueError("L must be positive")
        object.__setattr__(self, "shape", shape)

    @property
    def sites(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def spacing(self) -> np.ndarray:
        return np.array([self.L / s for s in self.shape])

    @property
    def h(self) -> float:
        """Spacing along active axes."""
        return self.L / self.N

    @cached_property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @cached_property
    def active_axes(self) -> tuple[int, ...]:
        return tuple(mu for mu, s in enumerate(self.shape) if s > 1)

    def points(self) -> np.ndarray:
        """Coordinates of all sites, shape (S, n)."""
        axes = [np.arange(s) * self.L / s for s in self.shape]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def _grid(self, f: np.ndarray) -> np.ndarray:
        return f.reshape(self.shape + f.shape[1:])

    def shift(self, f: np.ndarray, axis: int, k: int = 1) -> np.ndarray:
        """Translate a field by k sites along an axis."""
        return np.roll(self._grid(f), k, axis=axis).reshape(f.shape)

    def diff(self, f: np.ndarray, mu: int) -> np.ndarray:
        """Central difference d_mu f with periodic wrap."""
        if self.shape[mu] == 1:
            return np.zeros_like(f)
        fg = self._grid(f)
        h = self.spacing[mu]
        if self.order == 2:
            d = (np.roll(fg, -1, axis=mu) - np.roll(fg, 1, axis=mu)) / (2.0 * h)
        else:
            d = (8.0 * (np.roll(fg, -1, axis=mu) - np.roll(fg, 1, axis=mu))
                 - (np.roll(fg, -2, axis=mu) - np.roll(fg, 2, axis=mu))) / (12.0 * h)
        return d.reshape(f.shape)

    def grad(self, f: np.ndarray) -> np.ndarray:
        """All partial derivatives, inserted as axis 1: shape (S, n, ...).

        Every site sees the same arithmetic (wrap-around sites included), so
        lattice translations commute with the stencil bit for bit.
        """
        comp = f.shape[1:]
        C = int(np.prod(comp, dtype=int))
        S, n = self.sites, self.n
        out = np.empty((S, n, C), dtype=f.dtype)
        tmp = np.empty(S * C, dtype=f.dtype)
        for mu in range(n):
            N = self.shape[mu]
            if N == 1:
                out[:, mu] = 0.0
                continue
            A = int(np.prod(self.shape[:mu], dtype=int))
            fv = f.reshape(A, N, -1)
            d = tmp.reshape(A, N, -1)
            h = self.spacing[mu]
            if self.order == 2:
                np.subtract(fv[:, 2:], fv[:, :-2], out=d[:, 1:-1])
                np.subtract(fv[:, :1], fv[:, N - 2:N - 1], out=d[:, N - 1:])
                np.subtract(fv[:, 1:2], fv[:, N - 1:], out=d[:, :1])
                d *= 0.5 / h
            else:
                p = np.concatenate([fv[:, N - 2:], fv, fv[:, :2]], axis=1)
                np.subtract(p[:, 3:N + 3], p[:, 1:N + 1], out=d)
                d *= 8.0
                d -= p[:, 4:N + 4]
                d += p[:, 0:N]
                d *= 1.0 / (12.0 * h)
            out[:, mu] = tmp.reshape(S, C)
        return out.reshape((S, n) + comp)


def slot_apply(T: np.ndarray, M: np.ndarray, slot: int) -> np.ndarray:
    """Contract axis ``slot`` of T with M[s, m, a]: T'[..., a, ...] = sum_m M[s, m, a] T[..., m, ...]."""
    Tm = np.moveaxis(T, slot, -1)
    shp = Tm.shape
    out = np.matmul(Tm.reshape(shp[0], -1, shp[-1]), M)
    return np.moveaxis(out.reshape(shp[:-1] + (M.shape[-1],)), -1, slot)


def fsum(x: np.ndarray) -> float:
    """Correctly rounded sum; invariant under any permutation of the sites."""
    return math.fsum(np.asarray(x, dtype=float).ravel())


# ---------------------------------------------------------------- metric helpers

def check_metric(g: np.ndarray) -> np.ndarray:
    if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > 1e-12 * (1 + np.max(np.abs(g))):
        raise MetricError("metric field is not symmetric")
    w = np.linalg.eigvalsh(g)
    if np.min(w) <= 0:
        raise MetricError(f"metric not positive definite (min eigenvalue {np.min(w):.3e})")
    return w


def sym_power(g: np.ndarray, p: float) -> np.ndarray:
    w, V = np.linalg.eigh(g)
    if np.min(w) <= 0:
        raise MetricError(f"metric not positive definite (min eigenvalue {np.min(w):.3e})")
    return (V * (w**p)[..., None, :]) @ np.swapaxes(V, -1, -2)


def frame_from_metric(g: np.ndarray) -> np.ndarray:
    """Symmetric square-root frame b = g^{-1/2}."""
    return sym_power(g, -0.5)


def _log_orthogonal(R: np.ndarray) -> np.ndarray:
    Y = R - np.eye(R.shape[-1])
    if np.max(np.abs(Y), initial=0.0) < 0.25:
        X = np.zeros_like(Y)
        term = np.broadcast_to(np.eye(R.shape[-1]), Y.shape).copy()
        for k in range(1, 80):
            term = term @ Y
            X = X + ((-1) ** (k + 1) / k) * term
            if np.max(np.abs(term)) < 1e-18:
                break
    else:
        X = np.array([np.real(scipy.linalg.logm(r)) for r in R.reshape(-1, *R.shape[-2:])]).reshape(R.shape)
    return 0.5 * (X - np.swapaxes(X, -1, -2))


def transport_rotation(g0: np.ndarray, g1: np.ndarray) -> np.ndarray:
    """Rotation R with g1^{-1/2} = B(g0^{-1/2}) R, B the horizontal transport g0 -> g1."""
    h1 = sym_power(g1, -0.5)
    C = np.einsum("...ij,...jk,...kl->...il", h1, g0, h1)
    return np.einsum("...ij,...jk,...kl->...il", sym_power(g0, 0.5), h1, sym_power(C, -0.5))


def horizontal_transport(rep: CliffordRep, g0: np.ndarray, g1: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Move spinor components from the g0 square-root frame to the g1 one.

    Implements the Bourguignon-Gauduchon identification: the spinor keeps its
    components in the transported frame, which differs from g1^{-1/2} by a
    rotation whose spin lift is applied here.
    """
    X = _log_orthogonal(transport_rotation(g0, g1))
    return np.einsum("...ij,...j->...i", spin_lift(rep, X), phi)


def frame_rotation_rate(g: np.ndarray, gdot: np.ndarray, eig=None) -> np.ndarray:
    """Skew K such that d/dt of the square-root frame is horizontal plus b K.

    Along g + t gdot the square-root components of a horizontally moving
    spinor change at rate spin_lie_algebra(K) phi.
    """
    w, V = np.linalg.eigh(g) if eig is None else eig
    s = np.sqrt(w)
    Vt = np.swapaxes(V, -1, -2)
    gd = Vt @ gdot @ V
    si, sj = s[..., :, None], s[..., None, :]
    Kp = 0.5 * gd * (1.0 / si - 1.0 / sj) / (si + sj)
    return V @ Kp @ Vt


# ---------------------------------------------------------------- geometry

@dataclass
class Geometry:
    """Metric-dependent quantities on a lattice, computed once per metric."""

    lat: TorusLattice
    rep: CliffordRep
    g: np.ndarray
    ginv: np.ndarray = field(init=False, repr=False)
    b: np.ndarray = field(init=False, repr=False)
    binv: np.ndarray = field(init=False, repr=False)
    weight: np.ndarray = field(init=False, repr=False)
    min_eig: float = field(init=False)
    Gamma: np.ndarray = field(init=False, repr=False)
    omega: np.ndarray = field(init=False, repr=False)
    W: np.ndarray = field(init=False, repr=False)
    spin: np.ndarray = field(init=False, repr=False)
    eig: tuple = field(init=False, repr=False)

    def __post_init__(self):
        g = self.g
        w, V = np.linalg.eigh(g)
        if np.min(w) <= 0:
            raise MetricError(f"metric not positive definite (min eigenvalue {np.min(w):.3e})")
        self.min_eig = float(np.min(w))
        self.eig = (w, V)
        Vt = np.swapaxes(V, 1, 2)
        self.ginv = (V / w[:, None, :]) @ Vt
        self.b = (V * (w**-0.5)[:, None, :]) @ Vt
        self.binv = (V * np.sqrt(w)[:, None, :]) @ Vt
        self.weight = self.lat.cell_volume * np.sqrt(np.prod(w, axis=-1))
        self.Gamma = christoffels(self.lat, g, self.ginv)
        self.omega = spin_connection(self.lat, g, self.b, self.Gamma)
        self.W = slot_apply(self.omega, self.b, 1)
        self.spin = spin_lie_algebra(self.rep, self.omega)

    @cached_property
    def spin_frame(self) -> np.ndarray:
        return slot_apply(self.spin, self.b, 1)

    def integrate(self, f: np.ndarray) -> float:
        return fsum(self.weight * f)

    def volume(self) -> float:
        return fsum(self.weight)

    def frame_deriv(self, f: np.ndarray) -> np.ndarray:
        """e_c(f) for every frame vector, inserted as axis 1."""
        return slot_apply(self.lat.grad(f), self.b, 1)

    def to_frame(self, h: np.ndarray) -> np.ndarray:
        """Frame components of a covariant coordinate tensor, shape (S, n, ..., n)."""
        for k in range(1, h.ndim):
            h = slot_apply(h, self.b, k)
        return h

    def to_coord(self, h: np.ndarray) -> np.ndarray:
        """Coordinate components of a covariant tensor given in the frame."""
        for k in range(1, h.ndim):
            h = slot_apply(h, self.binv, k)
        return h

    def vector_to_coord(self, v: np.ndarray) -> np.ndarray:
        return np.einsum("sma,sa->sm", self.b, v)

    def vector_to_frame(self, X: np.ndarray) -> np.ndarray:
        return np.einsum("sam,sm->sa", self.binv, X)

    def cov_deriv(self, T: np.ndarray) -> np.ndarray:
        """Covariant derivative of a covariant tensor in frame components.

        Returns (S, c, i1, ..., ir) holding (nabla_{e_c} T)(e_i1, ..., e_ir).
        """
        out = self.frame_deriv(T)
        S = T.shape[0]
        Wt = np.swapaxes(self.W, 2, 3)  # (S, c, z, a)
        for k in range(1, T.ndim):
            Tm = np.moveaxis(T, k, -1)
            conn = np.matmul(Tm.reshape(S, 1, -1, Tm.shape[-1]), Wt)
            conn = conn.reshape((S, Wt.shape[1]) + Tm.shape[1:-1] + (Wt.shape[-1],))
            out = out - np.moveaxis(conn, -1, k + 1)
        return out

    def divergence(self, T: np.ndarray) -> np.ndarray:
        """-sum_c (nabla_{e_c} T)(e_c, ...) for a covariant frame tensor of rank >= 1."""
        S, n = T.shape[0], T.shape[1]
        rest = T.shape[2:]
        dT = self.lat.grad(T)  # (S, mu, c, ...)
        out = (self.b.reshape(S, 1, n * n) @ dT.reshape(S, n * n, -1)).reshape((S,) + rest)
        v = np.einsum("sccz->sz", self.W)
        out = out - (v[:, None, :] @ T.reshape(S, n, -1)).reshape((S,) + rest)
        Wm = np.swapaxes(self.W, 1, 2).reshape(S, n, n * n)  # (S, i, (c, z))
        for k in range(2, T.ndim):
            Tk = np.moveaxis(T, k, 2)  # (S, c, z, ...)
            term = (Wm @ Tk.reshape(S, n * n, -1)).reshape((S, n) + Tk.shape[3:])
            out = out - np.moveaxis(term, 1, k - 1)
        return -out

    def divergence_spinor_form(self, P: np.ndarray) -> np.ndarray:
        """-sum_c (nabla_{e_c} P)(e_c) for a spinor-valued one-form P (S, n, D)."""
        S, n, D = P.shape
        dP = self.lat.grad(P)  # (S, mu, c, D)
        out = (self.b.reshape(S, 1, n * n) @ dP.reshape(S, n * n, D))[:, 0]
        out = out + np.einsum("scij,scj->si", self.spin_frame, P)
        v = np.einsum("sccz->sz", self.W)
        out = out - (v[:, None, :] @ P)[:, 0]
        return -out

    def cov_deriv_spinor(self, phi: np.ndarray) -> np.ndarray:
        """nabla_{e_a} phi, shape (S, n, D)."""
        Z = self.lat.grad(phi) + (self.spin @ phi[:, None, :, None])[..., 0]
        return slot_apply(Z, self.b, 1)

    def cov_deriv_spinor_form(self, P: np.ndarray) -> np.ndarray:
        """(nabla_{e_c} P)(e_a) for a spinor-valued one-form P of shape (S, n, D)."""
        Z = self.lat.grad(P) + P[:, None] @ np.swapaxes(self.spin, 2, 3)
        return slot_apply(Z, self.b, 1) - self.W @ P[:, None]

    def nabla_along(self, X: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """nabla_X phi for a coordinate vector field X."""
        Z = self.lat.grad(phi) + (self.spin @ phi[:, None, :, None])[..., 0]
        return np.einsum("sm,smi->si", X, Z)

    def dirac(self, phi: np.ndarray) -> np.ndarray:
        P = self.cov_deriv_spinor(phi)
        return np.einsum("aij,saj->si", self.rep.gammas, P)

    @cached_property
    def ricci(self) -> np.ndarray:
        return ricci(self.lat, self.Gamma)

    @cached_property
    def scal(self) -> np.ndarray:
        return np.einsum("sij,sij->s", self.ginv, self.ricci)


def christoffels(lat: TorusLattice, g: np.ndarray, ginv: np.ndarray | None = None) -> np.ndarray:
    """Gamma[s, k, i, j] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    if ginv is None:
        ginv = np.linalg.inv(g)
    dg = lat.grad(g)
    X = np.transpose(dg, (0, 3, 1, 2))
    low = 0.5 * (X + np.swapaxes(X, 2, 3) - dg)
    S, n = g.shape[:2]
    return (ginv @ low.reshape(S, n, n * n)).reshape(S, n, n, n)


def spin_connection(lat: TorusLattice, g: np.ndarray, b: np.ndarray, Gamma: np.ndarray) -> np.ndarray:
    """omega[s, mu, a, b] = g(nabla_{d_mu} e_a, e_b), antisymmetrised in (a, b)."""
    db = lat.grad(b)
    S, n = g.shape[:2]
    Gb = (Gamma.reshape(S, n * n, n) @ b).reshape(S, n, n, n)  # (nu, mu, a)
    Y = db + np.swapaxes(Gb, 1, 2)
    om = np.swapaxes(Y, 2, 3) @ (g @ b)[:, None]
    return 0.5 * (om - np.swapaxes(om, 2, 3))


def covariant_derivative(lat: TorusLattice, rep: CliffordRep, g: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return Geometry(lat, rep, g).cov_deriv_spinor(phi)


def dirac(lat: TorusLattice, rep: CliffordRep, g: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return Geometry(lat, rep, g).dirac(phi)


def ricci(lat: TorusLattice, Gamma: np.ndarray) -> np.ndarray:
    """Ricci tensor in coordinates from finite differences of the Christoffels."""
    dG = lat.grad(Gamma)
    ric = (np.einsum("skkij->sij", dG) - np.einsum("sjkik->sij", dG)
           + np.einsum("skkl,slij->sij", Gamma, Gamma) - np.einsum("skjl,slik->sij", Gamma, Gamma))
    return 0.5 * (ric + np.swapaxes(ric, 1, 2))


def curvature(lat: TorusLattice, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ginv = np.linalg.inv(g)
    ric = ricci(lat, christoffels(lat, g, ginv))
    return ric, np.einsum("sij,sij->s", ginv, ric)


def div_sym2(lat: TorusLattice, g: np.ndarray, h: np.ndarray, Gamma: np.ndarray | None = None) -> np.ndarray:
    """(delta h)_j = -g^{ki} nabla_k h_ij for a symmetric coordinate tensor h."""
    ginv = np.linalg.inv(g)
    if Gamma is None:
        Gamma = christoffels(lat, g, ginv)
    S, n = g.shape[:2]
    t1 = (np.swapaxes(Gamma.reshape(S, n, n * n), 1, 2) @ h).reshape(S, n, n, n)
    nh = lat.grad(h) - t1 - np.swapaxes(t1, 2, 3)
    return -(ginv.reshape(S, 1, n * n) @ nh.reshape(S, n * n, n))[:, 0]


def delta_star(lat: TorusLattice, g: np.ndarray, xi: np.ndarray, Gamma: np.ndarray | None = None) -> np.ndarray:
    """Symmetrised covariant derivative of a coordinate one-form."""
    if Gamma is None:
        Gamma = christoffels(lat, g)
    nx = lat.grad(xi) - np.einsum("slij,sl->sij", Gamma, xi)
    return 0.5 * (nx + np.swapaxes(nx, 1, 2))


def l2_pair_sym2(geo: Geometry, h1: np.ndarray, h2: np.ndarray) -> float:
    """<<h1, h2>> for coordinate symmetric 2-tensors."""
    return geo.integrate(np.einsum("sia,sjb,sij,sab->s", geo.ginv, geo.ginv, h1, h2))


def l2_pair_vec(geo: Geometry, X: np.ndarray, Y: np.ndarray) -> float:
    return geo.integrate(np.einsum("sij,si,sj->s", geo.g, X, Y))


def spinor_norms(phi: np.ndarray) -> np.ndarray:
    return np.sqrt(inner(phi, phi))


def normalize(phi: np.ndarray) -> np.ndarray:
    return phi / spinor_norms(phi)[:, None]


def antisymmetrize(T: np.ndarray) -> np.ndarray:
    """Full antisymmetrisation over axes 1..r (with the 1/r! factor)."""
    r = T.ndim - 1
    out = np.zeros_like(T)
    for perm in permutations(range(r)):
        sign = 1
        p = list(perm)
        for i in range(r):
            for j in range(i + 1, r):
                if p[i] > p[j]:
                    sign = -sign
        out = out + sign * np.transpose(T, (0,) + tuple(q + 1 for q in perm))
    return out / math.factorial(r)
