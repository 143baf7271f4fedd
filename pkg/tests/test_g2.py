import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spinorflow import g2, jets, scenarios
from spinorflow.clifford import clifford_rep
from spinorflow.functionals import SpinorPair
from spinorflow.lattice import Geometry, TorusLattice

REP = clifford_rep(7, real=True)
unit8 = arrays(float, 8, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1).map(
    lambda v: v / np.linalg.norm(v))


@settings(max_examples=40, deadline=None)
@given(phi=unit8)
def test_bispinor_decomposition(phi):
    fb = g2.bispinor_form(REP, phi)
    assert max(float(np.max(np.abs(c))) for c in fb.odd_parts) <= 1e-12
    assert np.max(np.abs(fb.sigma - g2.hodge_star(fb.omega, 7, 3))) <= 1e-12
    assert fb.scalar == pytest.approx(1.0, abs=1e-12) and fb.top == pytest.approx(1.0, abs=1e-12)
    assert g2.form_norm_sq(fb.omega) == pytest.approx(7.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(phi=unit8, psi=unit8)
def test_bispinor_norm_identity(phi, psi):
    lhs, rhs = g2.bispinor_norm_identity(REP, phi, psi)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_bispinor_form_needs_real_seven_and_unit():
    with pytest.raises(ValueError):
        g2.bispinor_form(clifford_rep(7), np.eye(8)[0].astype(complex))
    with pytest.raises(ValueError):
        g2.bispinor_form(REP, 2 * np.eye(8)[0])


@pytest.mark.parametrize("p", range(8))
def test_hodge_star_squares_to_identity(p, rng):
    a = rng.standard_normal(len(g2.combos(7, p)))
    ss = g2.hodge_star(g2.hodge_star(a, 7, p), 7, 7 - p)
    assert np.allclose(ss, a)  # (-1)^{p(7-p)} = 1 in odd dimension


@pytest.mark.parametrize("p", [1, 2, 3])
def test_expand_compress_roundtrip(p, rng):
    a = rng.standard_normal((2, len(g2.combos(5, p))))
    full = g2.expand(a, 5, p)
    assert np.allclose(g2.compress(full, 5, p), a)
    for perm in itertools.permutations(range(p)):
        sign = np.linalg.det(np.eye(p)[list(perm)])
        assert np.allclose(np.transpose(full, (0,) + tuple(1 + q for q in perm)), sign * full)


def test_compound_is_multiplicative(rng):
    A, B = rng.standard_normal((2, 5, 5))
    for p in (1, 2, 3):
        assert np.allclose(g2.compound(A @ B, p), g2.compound(A, p) @ g2.compound(B, p))


def test_exterior_derivative_squares_to_zero(rng):
    lat = TorusLattice(4, 8)
    a = rng.standard_normal((lat.sites, len(g2.combos(4, 1))))
    dda = g2.exterior_derivative(lat, g2.exterior_derivative(lat, a, 1), 2)
    assert np.max(np.abs(dda)) < 1e-10


def test_frame_coord_roundtrip():
    lat = TorusLattice(7, 8, shape=(8, 8, 8, 1, 1, 1, 1))
    sc = scenarios.perturbed_flat(lat, REP, 0.1, seed=0)
    geo = Geometry(lat, REP, sc.g)
    a = np.random.default_rng(0).standard_normal((lat.sites, 35))
    back = g2.coord_to_frame_form(geo, g2.frame_to_coord_form(geo, a, 3), 3)
    assert np.allclose(back, a, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1])
def test_norm_correspondence_at_jets(seed):
    lat = TorusLattice(7, 8, shape=(8, 8, 8, 1, 1, 1, 1))
    spec = scenarios.perturbed_spec(lat, REP, 0.1, 1, seed)
    x = np.random.default_rng(seed).uniform(0, 1, (10, 7))
    r = g2.norm_correspondence(REP, jets.jet_oracle(spec, x))
    assert r.residual <= 1e-10
    assert r.pair_residual <= 1e-10


def test_flat_pair_is_torsion_free():
    lat = TorusLattice(7, 4, shape=(4, 4, 4, 1, 1, 1, 1))
    sc = scenarios.flat_critical(lat, REP)
    pair = SpinorPair(lat, REP, sc.g, sc.phi)
    d = g2.dirichlet_functionals(pair)
    assert d.C == 0 and d.D == 0 and d.sixteen_E0 == 0


def test_dirichlet_identities_converge():
    rel = []
    for N in (8, 16):
        lat = TorusLattice(7, N, shape=(N, N, N, 1, 1, 1, 1))
        sc = scenarios.perturbed_flat(lat, REP, 0.05, seed=1)
        d = g2.dirichlet_functionals(SpinorPair(lat, REP, sc.g, sc.phi))
        rel.append((d.rel_C, d.rel_D))
    assert max(rel[0]) < 2e-2
    assert rel[1][0] < rel[0][0] and rel[1][1] < rel[0][1]
