"""Named initial pairs and the seeded random generator behind them.

All randomness comes from numpy's Philox counter-based bit generator keyed by
the integer seed, so a seed fixes every field bit for bit on any platform
that ships the same numpy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .clifford import CliffordRep
from .lattice import TorusLattice

SCENARIOS = ("flat_critical", "perturbed_flat", "plane_wave_spinor")


class ScenarioError(ValueError):
    pass


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def base_spinor(rep: CliffordRep) -> np.ndarray:
    e = np.zeros(rep.dim, dtype=rep.dtype)
    e[0] = 1.0
    return e


@dataclass
class Scenario:
    lat: TorusLattice
    rep: CliffordRep
    g: np.ndarray
    phi: np.ndarray
    spec: jets.FieldSpec | None = None


def flat_critical(lat: TorusLattice, rep: CliffordRep) -> Scenario:
    g = np.broadcast_to(np.eye(lat.n), (lat.sites, lat.n, lat.n)).copy()
    phi = np.broadcast_to(base_spinor(rep), (lat.sites, rep.dim)).copy()
    spec = jets.FieldSpec(jets.metric_field(lat.n, L=lat.L),
                          jets.FourierField(base_spinor(rep), np.zeros((0, lat.n), dtype=int),
                                            np.zeros((0, rep.dim), dtype=rep.dtype),
                                            np.zeros((0, rep.dim), dtype=rep.dtype), lat.L))
    return Scenario(lat, rep, g, phi, spec)


def perturbed_spec(lat: TorusLattice, rep: CliffordRep, amplitude: float, modes: int, seed: int,
                   spinor_amplitude: float | None = None) -> jets.FieldSpec:
    rng = make_rng(seed)
    n = lat.n
    active = lat.active_axes
    complex_ = np.iscomplexobj(rep.gammas)
    sa = amplitude if spinor_amplitude is None else spinor_amplitude
    metric = jets.random_field(rng, n, (n, n), amplitude, kmax=modes, L=lat.L, active=active, symmetric=True)
    spinor = jets.random_field(rng, n, (rep.dim,), sa, kmax=modes, L=lat.L, active=active,
                               const=base_spinor(rep), complex_=complex_)
    return jets.FieldSpec(jets.metric_field(n, metric, lat.L), spinor)


def perturbed_flat(lat: TorusLattice, rep: CliffordRep, amplitude: float, modes: int = 1, seed: int = 0,
                   spinor_amplitude: float | None = None) -> Scenario:
    """Band-limited SPD perturbation of the flat pair, spinor renormalised pointwise."""
    if amplitude < 0 or modes < 1:
        raise ScenarioError("amplitude must be >= 0 and modes >= 1")
    spec = perturbed_spec(lat, rep, amplitude, modes, seed, spinor_amplitude)
    g, phi = jets.sample(spec, lat.points())
    if np.min(np.linalg.eigvalsh(g)) <= 0:
        raise ScenarioError("perturbation too large: metric is not positive definite")
    return Scenario(lat, rep, g, phi, spec)


def plane_wave_spinor(lat: TorusLattice, rep: CliffordRep, k) -> Scenario:
    """Flat metric and phi = exp(theta(x) J) phi_0, theta = 2 pi k.x / L.

    J is multiplication by i for complex spinors and gamma_1 gamma_2 for the
    real representation; either way |nabla phi|^2 = |2 pi k / L|^2.
    """
    k = np.broadcast_to(np.asarray(k, dtype=float), (lat.n,))
    g = np.broadcast_to(np.eye(lat.n), (lat.sites, lat.n, lat.n)).copy()
    theta = 2 * np.pi * lat.points() @ k / lat.L
    phi0 = base_spinor(rep)
    if np.iscomplexobj(rep.gammas):
        phi = np.exp(1j * theta)[:, None] * phi0
    else:
        Jphi = rep.pairs[0, 1] @ phi0
        phi = np.cos(theta)[:, None] * phi0 + np.sin(theta)[:, None] * Jphi
    return Scenario(lat, rep, g, phi)


def build_scenario(name: str, lat: TorusLattice, rep: CliffordRep, **params) -> Scenario:
    if name == "flat_critical":
        return flat_critical(lat, rep)
    if name == "perturbed_flat":
        return perturbed_flat(lat, rep, params.get("amplitude", 0.01), params.get("modes", 1),
                              params.get("seed", 0), params.get("spinor_amplitude"))
    if name == "plane_wave_spinor":
        return plane_wave_spinor(lat, rep, params.get("k", (1,) + (0,) * (lat.n - 1)))
    raise ScenarioError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
