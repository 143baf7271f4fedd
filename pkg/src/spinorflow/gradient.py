"""Negative gradient of the spinorial energy and the operators built around it.

Metric-type outputs are coordinate symmetric 2-tensors (S, n, n); spinor
outputs are components in the square-root frame (S, D); vector fields are
coordinate components (S, n).  Internally most work is done in frame
components, where the metric is the identity.
"""
from __future__ import annotations

import numpy as np

from .clifford import CliffordRep, gram, inner, spin_lie_algebra
from .functionals import SpinorPair
from .lattice import Geometry, christoffels, frame_rotation_rate

# ---------------------------------------------------------------- pointwise kernels


def wedge_phi(rep: CliffordRep, phi: np.ndarray) -> np.ndarray:
    """(e_i ^ e_j) . phi, shape (S, n, n, D)."""
    n, D = rep.n, rep.dim
    return (phi @ rep.wedge2.reshape(n * n * D, D).T).reshape(phi.shape[0], n, n, D)


def energy_momentum_kernel(rep: CliffordRep, phi: np.ndarray, P: np.ndarray) -> np.ndarray:
    """T[i, j, k] = 1/2 (<(e_i^e_j).phi, P_k> + <(e_i^e_k).phi, P_j>), batched over a leading axis."""
    S, n, D = P.shape
    wphi = wedge_phi(rep, phi)
    A = gram(wphi.reshape(S, n * n, D), P).reshape(S, n, n, n)
    return 0.5 * (A + np.swapaxes(A, 2, 3))


def assemble_q1(P: np.ndarray, divT: np.ndarray) -> np.ndarray:
    """Frame components of -1/4 |nabla phi|^2 g - 1/4 div T + 1/2 <nabla phi (x) nabla phi>."""
    NN = gram(P, P)
    n = P.shape[1]
    gsq = np.trace(NN, axis1=1, axis2=2)
    return -0.25 * gsq[:, None, None] * np.eye(n) - 0.25 * divT + 0.5 * NN


def div_T_jet(rep: CliffordRep, phi: np.ndarray, P: np.ndarray, PP: np.ndarray) -> np.ndarray:
    """div T from jets in a frame that is parallel at the point.

    P[s, k] = nabla_k phi and PP[s, c, k] = nabla_c nabla_k phi.
    """
    W = rep.wedge2
    wphi = np.einsum("ijxy,sy->sijx", W, phi)
    # d_c <(e_i^e_j) phi, P_k> = <(e_i^e_j) P_c, P_k> + <(e_i^e_j) phi, PP_ck>
    wP = np.einsum("ijxy,scy->scijx", W, P)
    dA = inner(wP[:, :, :, :, None, :], P[:, None, None, None, :, :]) \
        + inner(wphi[:, None, :, :, None, :], PP[:, :, None, None, :, :])
    dT = 0.5 * (dA + np.swapaxes(dA, 3, 4))  # (s, c, i, j, k)
    return -np.einsum("sccjk->sjk", dT)


def rough_laplacian_jet(PP: np.ndarray) -> np.ndarray:
    return -np.einsum("skki->si", PP)


# ---------------------------------------------------------------- lattice operators


def energy_momentum(pair: SpinorPair) -> np.ndarray:
    """Frame components T[s, i, j, k]; the first slot is the divergence slot."""
    return energy_momentum_kernel(pair.rep, pair.phi, pair.nabla)


def div_T(pair: SpinorPair) -> np.ndarray:
    """Frame components of div T = -sum_k (nabla_{e_k} T)(e_k, ., .)."""
    return pair.geo.divergence(energy_momentum(pair))


def rough_laplacian(pair: SpinorPair) -> np.ndarray:
    """nabla^* nabla phi = -sum_j (nabla_{e_j} nabla phi)(e_j)."""
    return pair.geo.divergence_spinor_form(pair.nabla)


def q1_frame(pair: SpinorPair) -> np.ndarray:
    return assemble_q1(pair.nabla, div_T(pair))


def q1(pair: SpinorPair) -> np.ndarray:
    return pair.geo.to_coord(q1_frame(pair))


def q2(pair: SpinorPair) -> np.ndarray:
    return -rough_laplacian(pair) + pair.grad_sq[:, None] * pair.phi


def negative_gradient(pair: SpinorPair) -> tuple[np.ndarray, np.ndarray]:
    """Q(Phi) = (Q1, Q2), the L2 negative gradient of E."""
    return q1(pair), q2(pair)


def neg_grad_total_scalar(pair: SpinorPair) -> np.ndarray:
    """-grad S = Ric - 1/2 scal g in coordinates."""
    geo = pair.geo
    return geo.ricci - 0.5 * geo.scal[:, None, None] * pair.g


def q_s(pair: SpinorPair, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Negative gradient of E + s * int scal."""
    a, b = negative_gradient(pair)
    if s != 0:
        a = a + s * neg_grad_total_scalar(pair)
    return a, b


# ---------------------------------------------------------------- pairings


def l2_pair(pair: SpinorPair, u, v) -> float:
    """<<(h, psi), (h', psi')>> = int (h, h')_g + Re<psi, psi'> dv."""
    geo = pair.geo
    hh = np.sum((geo.ginv @ u[0] @ geo.ginv) * v[0], axis=(1, 2))
    return geo.integrate(hh + inner(u[1], v[1]))


def l2_norm(pair: SpinorPair, u) -> float:
    return float(np.sqrt(max(l2_pair(pair, u, u), 0.0)))


def l2_pair_vector(pair: SpinorPair, X: np.ndarray, Y: np.ndarray) -> float:
    return pair.geo.integrate(np.einsum("sij,si,sj->s", pair.g, X, Y))


def sup_norm(u) -> float:
    return float(max(np.max(np.abs(u[0])), np.max(np.abs(u[1]))))


# ---------------------------------------------------------------- infinitesimal diffeomorphisms


def spinor_lie_derivative(pair: SpinorPair, X: np.ndarray) -> np.ndarray:
    """nabla_X phi - 1/4 dX^flat . phi."""
    geo = pair.geo
    Xf = np.einsum("sij,sj->si", pair.g, X)
    dX = pair.lat.grad(Xf)
    dX = dX - np.swapaxes(dX, 1, 2)
    dXf = geo.to_frame(dX)
    act = spin_lie_algebra(pair.rep, dXf)  # 1/2 sum_{a<b} dX_ab gamma_a gamma_b
    return geo.nabla_along(X, pair.phi) - 0.25 * 2.0 * np.einsum("sij,sj->si", act, pair.phi)


def lambda_star(pair: SpinorPair, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """lambda^* X = (L_X g, spinor Lie derivative) = (2 delta^* X^flat, nabla_X phi - 1/4 dX^flat . phi)."""
    geo = pair.geo
    Xf = np.einsum("sij,sj->si", pair.g, X)
    nx = pair.lat.grad(Xf) - np.einsum("slij,sl->sij", geo.Gamma, Xf)
    return nx + np.swapaxes(nx, 1, 2), spinor_lie_derivative(pair, X)


def lam(pair: SpinorPair, u) -> np.ndarray:
    """Formal adjoint of lambda^*: 2 (delta h)^# + A^* psi - 1/4 (delta B^* psi)^#."""
    geo = pair.geo
    h, psi = u
    hf = geo.to_frame(h)
    dh = geo.divergence(hf)
    S, n, D = pair.nabla.shape
    A = gram(pair.nabla, psi[:, None])[:, :, 0]
    B = gram(wedge_phi(pair.rep, pair.phi).reshape(S, n * n, D), psi[:, None]).reshape(S, n, n)
    dB = geo.divergence(B)
    return geo.vector_to_coord(2.0 * dh + A - 0.25 * dB)


def deturck_field(pair: SpinorPair, gbar: np.ndarray, Gbar: np.ndarray | None = None,
                  gbinv: np.ndarray | None = None) -> np.ndarray:
    """X_gbar(g) = -2 (delta_gbar g)^#, sharp taken with gbar."""
    lat = pair.lat
    if gbinv is None:
        gbinv = np.linalg.inv(gbar)
    if Gbar is None:
        Gbar = christoffels(lat, gbar, gbinv)
    g = pair.g
    S, n = g.shape[:2]
    t1 = (np.swapaxes(Gbar.reshape(S, n, n * n), 1, 2) @ g).reshape(S, n, n, n)
    ng = lat.grad(g) - t1 - np.swapaxes(t1, 2, 3)
    delta = -(gbinv.reshape(S, 1, n * n) @ ng.reshape(S, n * n, n))[:, 0]
    return -2.0 * (gbinv @ delta[:, :, None])[:, :, 0]


def gauged_q(pair: SpinorPair, s: float, gbar: np.ndarray, Gbar: np.ndarray | None = None):
    """DeTurck-modified negative gradient Q_s + lambda^*(X_gbar(g))."""
    a, b = q_s(pair, s)
    X = deturck_field(pair, gbar, Gbar)
    la, lb = lambda_star(pair, X)
    return a + la, b + lb


def bianchi_residual(pair: SpinorPair, s: float = 0.0) -> float:
    """||lambda(Q_s)|| / (1 + ||Q_s||)."""
    Q = q_s(pair, s)
    lq = lam(pair, Q)
    return float(np.sqrt(max(l2_pair_vector(pair, lq, lq), 0.0)) / (1.0 + l2_norm(pair, Q)))


# ---------------------------------------------------------------- second variation


def kappa(pair: SpinorPair, u) -> np.ndarray:
    """Linearised connection: 1/4 sum_{i!=j} (nabla_i h)(., e_j) e_i e_j phi + nabla psi (frame)."""
    geo = pair.geo
    h, psi = u
    nh = geo.cov_deriv(geo.to_frame(h))  # (s, i, a, j)
    S, n, D = psi.shape[0], pair.lat.n, psi.shape[1]
    wphi = wedge_phi(pair.rep, pair.phi).reshape(S, n * n, D)
    nh = np.swapaxes(nh, 1, 2).reshape(S, n, n * n)  # (s, a, (i, j))
    return 0.25 * (nh @ wphi) + geo.cov_deriv_spinor(psi)


def hessian_quadratic(pair: SpinorPair, u) -> float:
    """int |kappa(u)|^2 dv, the second variation at a critical point."""
    k = kappa(pair, u)
    return pair.geo.integrate(np.sum(inner(k, k), axis=1))


# ---------------------------------------------------------------- flow velocity


def square_root_frame_velocity(pair: SpinorPair, u) -> tuple[np.ndarray, np.ndarray]:
    """Convert a tangent vector (h, psi) into the time derivative of the stored fields.

    The stored spinor components refer to g^{-1/2}; moving g along h rotates
    that frame against the horizontal one, which shows up as an extra
    spin rotation of the components.
    """
    h, psi = u
    K = frame_rotation_rate(pair.g, h, pair.geo.eig)
    return h, psi + np.einsum("sij,sj->si", spin_lie_algebra(pair.rep, K), pair.phi)
