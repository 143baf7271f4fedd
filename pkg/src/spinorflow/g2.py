"""The 3-form of a real unit spinor in dimension 7 and the Dirichlet identities.

Forms are stored compressed: one coefficient per increasing index tuple, in
``itertools.combinations`` order.  Norms are the Lambda-metric ones, i.e. the
sum of squares of orthonormal increasing-index coefficients.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .clifford import CliffordRep, gram, inner
from .functionals import SpinorPair, energy, energy_s
from .jets import PointJet, frame_jet, nabla_phi_jet, spin_connection_jet

N7 = 7


@lru_cache(maxsize=None)
def combos(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(itertools.combinations(range(n), p))


@lru_cache(maxsize=None)
def _product_stack(rep: CliffordRep, p: int) -> np.ndarray:
    return np.array([rep.product(I) for I in combos(rep.n, p)])


def _perm_parity(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def require_real7(rep: CliffordRep) -> None:
    if rep.n != N7 or not rep.real:
        raise ValueError("the G2 bridge needs the real 8-dimensional representation in dimension 7")


def bispinor_parts(rep: CliffordRep, phi: np.ndarray, psi: np.ndarray | None = None) -> list[np.ndarray]:
    """Degree-p parts c_I = <phi, gamma_I psi> for p = 0..n, each of shape (..., C(n, p))."""
    psi = phi if psi is None else psi
    out = []
    for p in range(rep.n + 1):
        M = _product_stack(rep, p)  # (K, D, D)
        out.append(inner(phi[..., None, :], np.einsum("kij,...j->...ki", M, psi)))
    return out


@dataclass
class FormBundle7:
    scalar: np.ndarray
    omega: np.ndarray   # (..., 35)
    sigma: np.ndarray   # (..., 35)
    top: np.ndarray
    odd_parts: tuple    # degrees 1, 2, 5, 6, expected to vanish


def bispinor_form(rep: CliffordRep, phi: np.ndarray, tol: float = 1e-10) -> FormBundle7:
    require_real7(rep)
    if np.max(np.abs(inner(phi, phi) - 1.0)) > tol:
        raise ValueError("bispinor_form needs a unit spinor")
    parts = bispinor_parts(rep, phi)
    return FormBundle7(parts[0][..., 0], parts[3], parts[4], parts[7][..., 0],
                       (parts[1], parts[2], parts[5], parts[6]))


def hodge_star(alpha: np.ndarray, n: int, p: int) -> np.ndarray:
    """Flat Hodge star on compressed p-forms: (*a)_J = sign(I, J) a_I, I the complement of J."""
    src = combos(n, p)
    index = {I: k for k, I in enumerate(src)}
    out = np.empty(alpha.shape[:-1] + (len(combos(n, n - p)),))
    for k, J in enumerate(combos(n, n - p)):
        I = tuple(i for i in range(n) if i not in J)
        out[..., k] = _perm_parity(I + J) * alpha[..., index[I]]
    return out


def expand(alpha: np.ndarray, n: int, p: int) -> np.ndarray:
    """Full antisymmetric coefficient array from a compressed form."""
    full = np.zeros(alpha.shape[:-1] + (n,) * p)
    for k, I in enumerate(combos(n, p)):
        for perm in itertools.permutations(range(p)):
            full[(...,) + tuple(I[q] for q in perm)] = _perm_parity(perm) * alpha[..., k]
    return full


def compress(full: np.ndarray, n: int, p: int) -> np.ndarray:
    return np.stack([full[(...,) + I] for I in combos(n, p)], axis=-1)


def compound(A: np.ndarray, p: int) -> np.ndarray:
    """p-th compound matrix det A[I, J] over increasing tuples, batched."""
    n = A.shape[-1]
    C = combos(n, p)
    rows = np.array(C)
    sub = A[..., rows[:, None, :, None], rows[None, :, None, :]]  # (..., K, K, p, p)
    return np.linalg.det(sub)


def form_norm_sq(alpha: np.ndarray) -> np.ndarray:
    return np.sum(alpha**2, axis=-1)


# ---------------------------------------------------------------- jets


def _nabla_full_form(alpha_full, dalpha_full, b, omega):
    """(nabla_{e_c} alpha)_{i..} from frame components alpha, their coordinate
    derivatives d_mu alpha and the frame connection omega_{mu a b}."""
    out = dalpha_full.copy()  # (P, mu, i, j, k)
    p = alpha_full.ndim - 1
    for slot in range(p):
        a = np.moveaxis(alpha_full, slot + 1, -1)  # (P, ..., z)
        conn = np.einsum("pmiz,p...z->pm...i", omega, a)
        out = out - np.moveaxis(conn, -1, slot + 2)
    return np.einsum("pmc,pm...->pc...", b, out)


@dataclass
class NormReport:
    grad_phi_sq: np.ndarray
    grad_omega_sq: np.ndarray
    grad_star_omega_sq: np.ndarray

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(16 * self.grad_phi_sq - self.grad_omega_sq)))

    @property
    def pair_residual(self) -> float:
        return float(np.max(np.abs(32 * self.grad_phi_sq - self.grad_omega_sq - self.grad_star_omega_sq)))


def norm_correspondence(rep: CliffordRep, jet: PointJet) -> NormReport:
    """Compare 16|nabla phi|^2 with |nabla Omega|^2 at exact jets.

    nabla Omega is obtained by differentiating the frame components of Omega
    along the jet and correcting with the Levi-Civita frame connection, without
    using the spinor connection.
    """
    require_real7(rep)
    b, _ = frame_jet(jet)
    omega_conn = spin_connection_jet(jet)
    out = {}
    for p, key in ((3, "om"), (4, "st")):
        M = _product_stack(rep, p)
        c = inner(jet.phi[:, None, :], np.einsum("kij,pj->pki", M, jet.phi))
        dc = 2.0 * inner(jet.dphi[:, :, None, :], np.einsum("kij,pj->pki", M, jet.phi)[:, None])
        full = expand(c, rep.n, p)
        dfull = expand(dc, rep.n, p)
        nab = _nabla_full_form(full, dfull, b, omega_conn)
        out[key] = np.sum(compress(nab, rep.n, p) ** 2, axis=(-1, -2))
    P = nabla_phi_jet(rep, jet)
    return NormReport(np.sum(inner(P, P), axis=-1), out["om"], out["st"])


def bispinor_norm_identity(rep: CliffordRep, phi: np.ndarray, psi: np.ndarray) -> tuple[float, float]:
    """Return (sum_p |degree-p part|^2 in the Lambda metric, 16 |phi|^2 |psi|^2).

    With the tensor metric every degree-p part carries an extra p!, which is
    what ``tensor_metric=True`` of ``degree_norms`` reports.
    """
    parts = bispinor_parts(rep, phi, psi)
    lhs = float(sum(np.sum(c**2) for c in parts))
    return lhs, float(16 * inner(phi, phi) * inner(psi, psi))


def degree_norms(rep: CliffordRep, phi: np.ndarray, tensor_metric: bool = False) -> np.ndarray:
    from math import factorial
    parts = bispinor_parts(rep, phi)
    w = [factorial(p) if tensor_metric else 1 for p in range(rep.n + 1)]
    return np.array([w[p] * np.sum(c**2) for p, c in enumerate(parts)])


# ---------------------------------------------------------------- lattice


def exterior_derivative(lat, alpha: np.ndarray, p: int) -> np.ndarray:
    """d of a compressed coordinate p-form field (S, C(n,p)) -> (S, C(n,p+1))."""
    n = lat.n
    src = {I: k for k, I in enumerate(combos(n, p))}
    da = lat.grad(alpha)  # (S, mu, K)
    out = np.zeros((alpha.shape[0], len(combos(n, p + 1))))
    for k, J in enumerate(combos(n, p + 1)):
        for q, mu in enumerate(J):
            I = J[:q] + J[q + 1:]
            out[:, k] += (-1) ** q * da[:, mu, src[I]]
    return out


def frame_to_coord_form(geo, alpha: np.ndarray, p: int) -> np.ndarray:
    return (np.swapaxes(compound(geo.binv, p), -1, -2) @ alpha[..., None])[..., 0]


def coord_to_frame_form(geo, alpha: np.ndarray, p: int) -> np.ndarray:
    return (np.swapaxes(compound(geo.b, p), -1, -2) @ alpha[..., None])[..., 0]


@dataclass
class G2Fields:
    omega: np.ndarray        # frame components (S, 35)
    star_omega: np.ndarray   # frame components (S, 35)
    omega_coord: np.ndarray
    star_omega_coord: np.ndarray


def g2_fields(pair: SpinorPair) -> G2Fields:
    require_real7(pair.rep)
    fb = bispinor_form(pair.rep, pair.phi, tol=1e-8)
    geo = pair.geo
    return G2Fields(fb.omega, fb.sigma, frame_to_coord_form(geo, fb.omega, 3),
                    frame_to_coord_form(geo, fb.sigma, 4))


def torsion_norms(pair: SpinorPair, fields: G2Fields | None = None) -> tuple[float, float]:
    """L2 norms of d Omega and d *Omega."""
    f = g2_fields(pair) if fields is None else fields
    geo = pair.geo
    dO = coord_to_frame_form(geo, exterior_derivative(pair.lat, f.omega_coord, 3), 4)
    dS = coord_to_frame_form(geo, exterior_derivative(pair.lat, f.star_omega_coord, 4), 5)
    return (float(np.sqrt(geo.integrate(form_norm_sq(dO)))),
            float(np.sqrt(geo.integrate(form_norm_sq(dS)))))


@dataclass
class DirichletReport:
    C: float
    D: float
    sixteen_E0: float
    sixteen_E116: float

    @property
    def rel_C(self) -> float:
        return abs(self.C - self.sixteen_E0) / max(abs(self.sixteen_E0), 1e-300)

    @property
    def rel_D(self) -> float:
        return abs(self.D - self.sixteen_E116) / max(abs(self.sixteen_E116), 1e-300)


def dirichlet_functionals(pair: SpinorPair) -> DirichletReport:
    """C = 1/2 int |nabla Omega|^2 and D = 1/2 int |d Omega|^2 + |d *Omega|^2, with 16 E_0, 16 E_{1/16}."""
    f = g2_fields(pair)
    geo = pair.geo
    nab = geo.cov_deriv(expand(f.omega, N7, 3))  # (S, c, i, j, k)
    C = 0.5 * geo.integrate(np.sum(compress(nab, N7, 3) ** 2, axis=(-1, -2)))
    dO, dS = torsion_norms(pair, f)
    D = 0.5 * (dO**2 + dS**2)
    return DirichletReport(C, D, 16 * energy(pair), 16 * energy_s(pair, 1.0 / 16.0))
