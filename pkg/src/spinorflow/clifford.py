"""Clifford algebra representations for Euclidean R^n.

Convention: gamma_a gamma_b + gamma_b gamma_a = -2 delta_ab, every gamma is
skew-adjoint for the real inner product Re<psi, chi>.  Complex spinors have
dimension 2**(n // 2).  For n = 7 a real 8-dimensional representation built
from octonion left multiplication is available (``real=True``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# Fano plane triples (1-based): e_i e_j = e_k for each cyclic (i, j, k).
FANO_TRIPLES = ((1, 2, 4), (2, 3, 5), (3, 4, 6), (4, 5, 7), (5, 6, 1), (6, 7, 2), (7, 1, 3))


class CliffordError(ValueError):
    pass


def _hermitian_generators(n: int) -> list[np.ndarray]:
    """Pairwise anticommuting Hermitian matrices squaring to +1."""
    gens = [np.ones((1, 1), dtype=complex)]
    count = 1
    while count < n:
        dim = gens[0].shape[0]
        gens = [np.kron(_PAULI[0], a) for a in gens] + [np.kron(_PAULI[1], np.eye(dim))]
        gens.append(np.kron(_PAULI[2], np.eye(dim)))
        count += 2
    return gens[:n] if n > 1 else gens


def octonion_table() -> np.ndarray:
    """Structure constants c[i, j, k] with e_i e_j = sum_k c[i,j,k] e_k, index 0 = 1."""
    c = np.zeros((8, 8, 8))
    for i in range(8):
        c[0, i, i] = 1.0
        c[i, 0, i] = 1.0
    for i in range(1, 8):
        c[i, i, 0] = -1.0
    for a, b, k in FANO_TRIPLES:
        for x, y, z in ((a, b, k), (b, k, a), (k, a, b)):
            c[x, y, z] = 1.0
            c[y, x, z] = -1.0
    return c


def _octonion_gammas() -> list[np.ndarray]:
    c = octonion_table()
    # (L_a)_{kj} = coefficient of e_k in e_a e_j
    gammas = [c[a].T.copy() for a in range(1, 8)]
    prod = np.linalg.multi_dot(gammas)
    if np.allclose(prod, -np.eye(8)):
        gammas = [-g for g in gammas]
    return gammas


@dataclass(frozen=True)
class CliffordRep:
    n: int
    real: bool = False
    gammas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.n <= 8:
            raise CliffordError(f"n must lie in 1..8, got {self.n}")
        if self.real:
            if self.n != 7:
                raise CliffordError("real representation only provided for n = 7")
            gam = np.array(_octonion_gammas())
        else:
            gam = np.array([1j * h for h in _hermitian_generators(self.n)])
        object.__setattr__(self, "gammas", gam)

    @property
    def dim(self) -> int:
        return self.gammas.shape[1]

    @property
    def dtype(self):
        return self.gammas.dtype

    @cached_property
    def pairs(self) -> np.ndarray:
        """pairs[a, b] = gamma_a gamma_b."""
        return np.einsum("aij,bjk->abik", self.gammas, self.gammas)

    @cached_property
    def wedge2(self) -> np.ndarray:
        """Action of e_a wedge e_b: gamma_a gamma_b + delta_ab (zero on the diagonal)."""
        w = self.pairs.copy()
        for a in range(self.n):
            w[a, a] = 0.0
        return w

    def product(self, idx) -> np.ndarray:
        out = np.eye(self.dim, dtype=self.dtype)
        for a in idx:
            out = out @ self.gammas[a]
        return out


def clifford_rep(n: int, real: bool = False) -> CliffordRep:
    return CliffordRep(n, real=real)


def inner(psi: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """Real inner product Re<psi, chi> over the last axis."""
    return np.real(np.sum(np.conj(psi) * chi, axis=-1))


def gram(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Re<A_i, B_j> for stacks of spinors A (S, p, D) and B (S, q, D), shape (S, p, q)."""
    return np.real(np.conj(A) @ np.swapaxes(B, -1, -2))


def clifford_residual(rep: CliffordRep) -> float:
    g = rep.gammas
    worst = 0.0
    for a in range(rep.n):
        for b in range(rep.n):
            anti = g[a] @ g[b] + g[b] @ g[a] + 2.0 * (a == b) * np.eye(rep.dim)
            worst = max(worst, float(np.max(np.abs(anti))))
        worst = max(worst, float(np.max(np.abs(g[a] + np.conj(g[a]).T))))
    return worst


def vec_mul(rep: CliffordRep, X: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Clifford multiplication X . psi; X has shape (..., n), psi (..., dim)."""
    return np.einsum("...a,aij,...j->...i", X, rep.gammas, psi)


def _check_antisymmetric(alpha: np.ndarray, tol: float = 1e-12) -> None:
    p = alpha.ndim
    if p < 2:
        return
    for perm in itertools.permutations(range(p)):
        sign = _perm_sign(perm)
        if np.max(np.abs(np.transpose(alpha, perm) - sign * alpha), initial=0.0) > tol:
            raise CliffordError("form coefficients are not antisymmetric")


def _perm_sign(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def form_action(rep: CliffordRep, alpha: np.ndarray) -> np.ndarray:
    """Matrix of psi -> alpha . psi for an antisymmetric p-index array alpha."""
    alpha = np.asarray(alpha)
    p = alpha.ndim
    if any(s != rep.n for s in alpha.shape):
        raise CliffordError(f"form has shape {alpha.shape}, expected ({rep.n},)*p")
    _check_antisymmetric(alpha)
    if p == 0:
        return complex(alpha) * np.eye(rep.dim) if rep.dtype == complex else float(alpha) * np.eye(rep.dim)
    out = np.zeros((rep.dim, rep.dim), dtype=rep.dtype)
    for idx in itertools.combinations(range(rep.n), p):
        coef = alpha[idx]
        if coef != 0:
            out = out + coef * rep.product(idx)
    return out


def mul_form(rep: CliffordRep, alpha: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return np.einsum("ij,...j->...i", form_action(rep, alpha), psi)


def wedge(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Antisymmetric coefficient array of X wedge Y (so (X^Y)(e_a, e_b) = X_a Y_b - X_b Y_a)."""
    return np.outer(X, Y) - np.outer(Y, X)


def volume_element(rep: CliffordRep, complex_: bool = False) -> np.ndarray:
    """gamma_1 ... gamma_n, or the complex volume element i^(n(n+1)/2) gamma_1...gamma_n."""
    vol = rep.product(range(rep.n))
    if complex_:
        phase = 1j ** ((rep.n * (rep.n + 1) // 2) % 4)
        vol = phase * vol
    return vol


def spin_lie_algebra(rep: CliffordRep, X: np.ndarray) -> np.ndarray:
    """1/2 sum_{a<b} X_ab gamma_a gamma_b for skew X with shape (..., n, n)."""
    return 0.25 * np.tensordot(X, rep.pairs, axes=([-2, -1], [0, 1]))


def spin_lift(rep: CliffordRep, X: np.ndarray) -> np.ndarray:
    """exp(1/2 sum_{a<b} X_ab gamma_a gamma_b), the spinor matrix relating frames b and b exp(X).

    Components psi in frame b become exp(...) psi in frame b exp(X).
    """
    M = spin_lie_algebra(rep, X)
    H = 1j * M  # Hermitian
    w, V = np.linalg.eigh(H)
    out = np.einsum("...ij,...j,...kj->...ik", V, np.exp(-1j * w), np.conj(V))
    if not np.iscomplexobj(rep.gammas):
        out = out.real
    return out


def _real_basis_products(rep: CliffordRep):
    for p in range(rep.n + 1):
        for idx in itertools.combinations(range(rep.n), p):
            yield idx, rep.product(idx)


def real_structure(rep: CliffordRep, tol: float = 1e-12) -> np.ndarray:
    """Matrix C with J(psi) = C conj(psi) antilinear, J^2 = Id, commuting with gamma_a gamma_b.

    Found by brute-force search over products of gamma matrices.  Raises
    CliffordError when no such structure exists (n mod 8 not in {0,1,2,6,7}).
    """
    if rep.real:
        return np.eye(rep.dim)
    pairs = [rep.pairs[a, b] for a in range(rep.n) for b in range(a + 1, rep.n)]
    for _, P in _real_basis_products(rep):
        ok = all(np.max(np.abs(P @ np.conj(s) - s @ P)) < tol for s in pairs)
        if ok and np.max(np.abs(P @ np.conj(P) - np.eye(rep.dim))) < tol:
            return P
    raise CliffordError(f"no real structure found for n = {rep.n}")


def apply_J(C: np.ndarray, psi: np.ndarray) -> np.ndarray:
    return np.einsum("ij,...j->...i", C, np.conj(psi))
