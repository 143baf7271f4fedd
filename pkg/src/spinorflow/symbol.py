"""Principal symbols of the linearised negative gradient at a point.

The symbol at covector xi acts on pairs (h, psi) with h a symmetric matrix and
psi a spinor orthogonal to the unit spinor phi.  Quadratic forms are written
as real symmetric matrices in an orthonormal basis of Sym^2 (+) phi^perp.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .clifford import CliffordRep, inner


def sym2_basis(n: int) -> np.ndarray:
    """Orthonormal basis of symmetric matrices for (h, k) = sum h_ij k_ij."""
    out = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            if i == j:
                E[i, i] = 1.0
            else:
                E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            out.append(E)
    return np.array(out)


def _realify(psi: np.ndarray) -> np.ndarray:
    return np.concatenate([psi.real, psi.imag]) if np.iscomplexobj(psi) else psi


def _complexify(v: np.ndarray, complex_: bool) -> np.ndarray:
    if not complex_:
        return v
    d = v.shape[-1] // 2
    return v[..., :d] + 1j * v[..., d:]


def sym(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a (.) b = 1/2 (a b^T + b a^T)."""
    return 0.5 * (np.outer(a, b) + np.outer(b, a))


@dataclass(frozen=True)
class SymbolPoint:
    rep: CliffordRep
    xi: np.ndarray
    phi: np.ndarray

    @property
    def n(self) -> int:
        return self.rep.n

    @cached_property
    def complex_(self) -> bool:
        return np.iscomplexobj(self.rep.gammas)

    @cached_property
    def spinor_perp_basis(self) -> np.ndarray:
        """Orthonormal (real inner product) basis of phi^perp, as spinors."""
        v = _realify(self.phi)
        Q = scipy.linalg.null_space(v[None, :])
        return _complexify(Q.T, self.complex_)

    @cached_property
    def basis(self) -> list:
        out = [(E, np.zeros(self.rep.dim, dtype=self.rep.dtype)) for E in sym2_basis(self.n)]
        out += [(np.zeros((self.n, self.n)), p) for p in self.spinor_perp_basis]
        return out

    @property
    def n_metric(self) -> int:
        return self.n * (self.n + 1) // 2

    def coords(self, h: np.ndarray, psi: np.ndarray) -> np.ndarray:
        """Coefficients of (h, psi) in ``basis`` (psi is projected onto phi^perp)."""
        return np.array([np.sum(E * h) + inner(p, psi) for E, p in self.basis])

    def wedge(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """(a ^ b) . phi for covectors a, b."""
        return np.einsum("a,b,abij,j->i", a, b, self.rep.wedge2, self.phi)


def random_point(rep: CliffordRep, rng: np.random.Generator) -> SymbolPoint:
    xi = rng.standard_normal(rep.n)
    xi /= np.linalg.norm(xi)
    phi = rng.standard_normal(rep.dim)
    if np.iscomplexobj(rep.gammas):
        phi = phi + 1j * rng.standard_normal(rep.dim)
    phi = phi / np.sqrt(inner(phi, phi))
    return SymbolPoint(rep, xi, phi)


def adapted_basis(xi: np.ndarray) -> np.ndarray:
    """Orthonormal basis whose first vector is xi/|xi|, completed by Gram-Schmidt."""
    n = len(xi)
    vecs = [xi / np.linalg.norm(xi)]
    for k in range(n):
        v = np.eye(n)[k]
        for u in vecs:
            v = v - np.dot(u, v) * u
        if np.linalg.norm(v) > 1e-8 and len(vecs) < n:
            vecs.append(v / np.linalg.norm(v))
    return np.array(vecs)


def beta(pt: SymbolPoint, psi: np.ndarray) -> np.ndarray:
    """beta_xi = sum_j <(xi ^ e_j) . phi, psi> e_j."""
    return np.array([inner(pt.wedge(pt.xi, e), psi) for e in np.eye(pt.n)])


def symbol_q(pt: SymbolPoint, h: np.ndarray, psi: np.ndarray):
    """Principal symbol of the linearised negative gradient Q."""
    xi = pt.xi
    x2 = xi @ xi
    zeta = h @ xi
    hm = (-x2 * h + sym(xi, zeta)) / 16.0 - 0.25 * sym(xi, beta(pt, psi))
    ps = -0.25 * pt.wedge(xi, zeta) - x2 * psi
    return hm, ps


def symbol_neg_grad_S(xi: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Principal symbol of the linearised -grad S = Ric - 1/2 scal g."""
    n = len(xi)
    x2 = xi @ xi
    tr = np.trace(h)
    return (0.5 * x2 * h - sym(xi, h @ xi) + 0.5 * tr * np.outer(xi, xi)
            - 0.5 * x2 * tr * np.eye(n) + 0.5 * (xi @ h @ xi) * np.eye(n))


def symbol_gauge(pt: SymbolPoint, h: np.ndarray):
    """Extra symbol contributed by the DeTurck term lambda^*(X_gbar(g))."""
    zeta = h @ pt.xi
    return -4.0 * sym(pt.xi, zeta), 0.5 * pt.wedge(pt.xi, zeta)


def symbol_lambda_star(pt: SymbolPoint, v: np.ndarray):
    """Symbol of lambda^* applied to a vector v: (xi (x) v + v (x) xi, -1/4 (xi ^ v) . phi)."""
    return 2.0 * sym(pt.xi, v), -0.25 * pt.wedge(pt.xi, v)


def symbol_total(pt: SymbolPoint, h, psi, s: float = 0.0, gauged: bool = False):
    hm, ps = symbol_q(pt, h, psi)
    if s != 0.0:
        hm = hm + s * symbol_neg_grad_S(pt.xi, h)
    if gauged:
        gh, gp = symbol_gauge(pt, h)
        hm, ps = hm + gh, ps + gp
    return hm, ps


@dataclass
class SymbolForm:
    point: SymbolPoint
    s: float
    gauged: bool
    raw: np.ndarray        # <sigma(v_A), v_B>, not symmetrised
    matrix: np.ndarray     # symmetric part = the quadratic form

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def kernel(self, tol: float = 1e-10) -> np.ndarray:
        w, V = np.linalg.eigh(self.matrix)
        return V[:, np.abs(w) <= tol]

    def kernel_dim(self, tol: float = 1e-10) -> int:
        return self.kernel(tol).shape[1]

    @property
    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.raw - self.raw.T)))

    def value(self, h, psi) -> float:
        c = self.point.coords(h, psi)
        return float(c @ self.matrix @ c)


def symbol_quadratic_form(pt: SymbolPoint, s: float = 0.0, gauged: bool = False) -> SymbolForm:
    rows = []
    for h, psi in pt.basis:
        hm, ps = symbol_total(pt, h, psi, s, gauged)
        rows.append(pt.coords(hm, ps))
    raw = np.array(rows)
    return SymbolForm(pt, s, gauged, raw, 0.5 * (raw + raw.T))


def lambda_star_image(pt: SymbolPoint) -> np.ndarray:
    """Orthonormal basis (columns) of the image of sigma(lambda^*) in form coordinates."""
    cols = [pt.coords(*symbol_lambda_star(pt, v)) for v in np.eye(pt.n)]
    Q, _ = np.linalg.qr(np.array(cols).T)
    return Q


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Spectral norm of the difference of orthogonal projectors (inf if dimensions differ)."""
    if A.shape[1] != B.shape[1]:
        return float("inf")
    return float(np.linalg.norm(A @ A.T - B @ B.T, 2))


def max_eig(pt: SymbolPoint, s: float, gauged: bool = False) -> float:
    return float(symbol_quadratic_form(pt, s, gauged).eigenvalues[-1])


def ellipticity_window(pt: SymbolPoint, tol: float = 1e-12, iters: int = 80) -> tuple[float, float]:
    """Interval of s on which the ungauged form is negative semi-definite, by bisection.

    The form is affine in s, so two assemblies suffice.
    """
    M0 = symbol_quadratic_form(pt, 0.0).matrix
    M1 = symbol_quadratic_form(pt, 1.0).matrix - M0

    def ok(s):
        return np.linalg.eigvalsh(M0 + s * M1)[-1] <= tol

    def bisect(inside, outside):
        for _ in range(iters):
            mid = 0.5 * (inside + outside)
            inside, outside = (mid, outside) if ok(mid) else (inside, mid)
        return inside

    hi_out = 1.0
    while ok(hi_out):
        hi_out *= 2.0
    lo_out = -1.0
    while ok(lo_out):
        lo_out *= 2.0
    return bisect(0.0, lo_out), bisect(0.0, hi_out)


def window_closed_form(n: int) -> tuple[float, float]:
    return -1.0 / (8.0 * (n - 2)), 1.0 / 8.0
