import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinorflow import symbol as S
from spinorflow.clifford import clifford_rep


def _point(n, seed):
    return S.random_point(clifford_rep(n), np.random.default_rng(seed))


def test_sym2_basis_orthonormal():
    B = S.sym2_basis(4)
    gram = np.einsum("aij,bij->ab", B, B)
    assert B.shape[0] == 10 and np.allclose(gram, np.eye(10))


@pytest.mark.parametrize("n", [3, 4, 7])
@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_ungauged_form_is_negative_semidefinite_with_gauge_kernel(n, seed):
    pt = _point(n, seed)
    f = S.symbol_quadratic_form(pt)
    assert f.eigenvalues[-1] <= 1e-12
    K = f.kernel(1e-9)
    assert K.shape[1] == n
    assert S.subspace_distance(K, S.lambda_star_image(pt)) <= 1e-8


@pytest.mark.parametrize("n", [3, 4, 7])
@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_gauged_form_bound(n, seed):
    pt = _point(n, seed)
    fg = S.symbol_quadratic_form(pt, gauged=True)
    bound = np.r_[np.full(pt.n_metric, 1 / 16), np.ones(len(pt.basis) - pt.n_metric)]
    assert np.linalg.eigvalsh(fg.matrix + np.diag(bound))[-1] <= 1e-12


@pytest.mark.parametrize("n", [3, 4, 7])
def test_gauged_value_on_xi_xi(n):
    pt = _point(n, 1)
    h = np.outer(pt.xi, pt.xi)
    psi = np.zeros_like(pt.phi)
    assert S.symbol_quadratic_form(pt).value(h, psi) == pytest.approx(0.0, abs=1e-13)
    assert S.symbol_quadratic_form(pt, gauged=True).value(h, psi) == pytest.approx(-4.0, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5, 7])
def test_window_endpoints(n):
    lo, hi = S.ellipticity_window(_point(n, 2))
    exact = S.window_closed_form(n)
    assert lo == pytest.approx(exact[0], abs=1e-9)
    assert hi == pytest.approx(exact[1], abs=1e-9)


@pytest.mark.parametrize("n", [3, 7])
def test_form_is_positive_outside_window(n):
    pt = _point(n, 3)
    lo, hi = S.window_closed_form(n)
    assert S.max_eig(pt, hi + 1e-3) > 1e-6
    assert S.max_eig(pt, lo - 1e-3) > 1e-6
    assert S.max_eig(pt, 0.5 * (lo + hi)) <= 1e-12


def test_form_homogeneous_of_degree_two_in_xi():
    pt = _point(3, 4)
    scaled = S.SymbolPoint(pt.rep, 2.0 * pt.xi, pt.phi)
    assert np.allclose(S.symbol_quadratic_form(scaled).matrix, 4 * S.symbol_quadratic_form(pt).matrix, atol=1e-12)


def test_adapted_basis_orthonormal():
    xi = np.array([0.3, -1.2, 0.5, 2.0])
    E = S.adapted_basis(xi)
    assert np.allclose(E @ E.T, np.eye(4))
    assert np.allclose(E[0], xi / np.linalg.norm(xi))
