import numpy as np
import pytest

from spinorflow import checks, scenarios
from spinorflow import gradient as G
from spinorflow.clifford import clifford_rep
from spinorflow.functionals import SpinorPair, energy
from spinorflow.lattice import TorusLattice


def _pair(N=16, amplitude=0.05, seed=3, n=3):
    lat = TorusLattice(n, N)
    rep = clifford_rep(n)
    sc = scenarios.perturbed_flat(lat, rep, amplitude, seed=seed)
    return SpinorPair(lat, rep, sc.g, sc.phi)


def _flat(N=8, n=3):
    lat = TorusLattice(n, N)
    rep = clifford_rep(n)
    sc = scenarios.flat_critical(lat, rep)
    return SpinorPair(lat, rep, sc.g, sc.phi)


def test_flat_pair_is_critical():
    pair = _flat()
    q1, q2 = G.q_s(pair, 0.1)
    assert np.max(np.abs(q1)) == 0.0 and np.max(np.abs(q2)) == 0.0


@pytest.mark.parametrize("s", [0.0, 1 / 16])
def test_gradient_matches_directional_derivative(s):
    """Pairing with Q approximates minus the derivative of E_s, improving at second order in h."""
    rep = clifford_rep(3)
    d = checks.random_direction(scenarios.make_rng(11), TorusLattice(3, 8), rep)
    rel = []
    for N in (8, 16):
        pair = _pair(N, amplitude=0.1)
        rel.append(checks.gradient_check(pair, d.sample(pair.lat, pair.phi), s).relative)
    assert rel[1] < 2e-2
    assert checks.measured_order(*rel) >= 1.8


def test_q2_tangency_converges():
    """<Q2, phi> = 0 holds in the continuum; on the lattice it is a discretisation error."""
    r = [checks.tangency_residual(_pair(N)) for N in (16, 32)]
    assert checks.measured_order(*r) >= 1.5


def test_q1_symmetric():
    q1 = G.q1(_pair())
    assert np.max(np.abs(q1 - np.swapaxes(q1, 1, 2))) < 1e-13


def test_lambda_star_is_gauge_direction():
    """E is diffeomorphism invariant, so Q pairs with lambda^*(X) only at discretisation level."""
    errs = []
    for N in (16, 32):
        pair = _pair(N)
        x = pair.lat.points()
        X = np.stack([np.sin(2 * np.pi * x[:, 1]), np.cos(2 * np.pi * x[:, 2]), np.sin(2 * np.pi * x[:, 0])], 1)
        u = G.lambda_star(pair, X)
        errs.append(abs(G.l2_pair(pair, G.q_s(pair, 0.0), u)) / (G.l2_norm(pair, u) * G.l2_norm(pair, G.q_s(pair, 0.0))))
    assert checks.measured_order(*errs) >= 1.8


def test_bianchi_residual_decreases():
    r = [G.bianchi_residual(_pair(N)) for N in (16, 32)]
    assert checks.measured_order(*r) >= 1.9


def test_hessian_nonnegative_and_gauge_null():
    pair = _flat(16)
    rng = scenarios.make_rng(4)
    for _ in range(3):
        u = checks.random_direction(rng, pair.lat, pair.rep).sample(pair.lat, pair.phi)
        assert G.hessian_quadratic(pair, u) >= 0
    x = pair.lat.points()
    X = np.stack([np.cos(2 * np.pi * x[:, 0]), np.sin(2 * np.pi * x[:, 2]), np.cos(2 * np.pi * x[:, 1])], 1)
    assert G.hessian_quadratic(pair, G.lambda_star(pair, X)) < 1e-20


def test_deturck_field_vanishes_at_background():
    pair = _pair(8)
    X = G.deturck_field(pair, pair.g)
    assert np.max(np.abs(X)) < 1e-13


def test_l2_pair_symmetric_and_positive(rng):
    pair = _pair(8)
    d = checks.random_direction(rng, pair.lat, pair.rep)
    e = checks.random_direction(rng, pair.lat, pair.rep)
    u, v = d.sample(pair.lat, pair.phi), e.sample(pair.lat, pair.phi)
    assert G.l2_pair(pair, u, v) == pytest.approx(G.l2_pair(pair, v, u), rel=1e-12)
    assert G.l2_norm(pair, u) > 0


@pytest.mark.parametrize("n", [3, 5, 7])
@pytest.mark.parametrize("lam", [1.0, -1.0, 0.5])
def test_killing_jets(n, lam, rng):
    rep = clifford_rep(n)
    phi = rng.standard_normal((8, rep.dim)) + 1j * rng.standard_normal((8, rep.dim))
    phi /= np.linalg.norm(phi, axis=1)[:, None]
    r = checks.killing_jet_residuals(rep, phi, lam)
    assert r.laplacian < 1e-12 and r.q1 < 1e-12 and r.q2 < 1e-12


def test_energy_decreases_along_negative_gradient():
    pair = _pair(8, amplitude=0.1)
    Q = G.q_s(pair, 0.0)
    eps = 1e-4
    moved = checks.perturb(pair, Q, eps)
    assert energy(moved) < energy(pair)
