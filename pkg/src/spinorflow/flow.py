"""Explicit time stepping of the (DeTurck-gauged) spinor flow."""
from __future__ import annotations

import csv
import dataclasses
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import gradient as G
from .clifford import CliffordRep, inner
from .functionals import SpinorPair, energy, energy_s
from .lattice import MetricError, TorusLattice, christoffels, normalize


class FlowBlowup(RuntimeError):
    def __init__(self, msg: str, rows=None):
        super().__init__(msg)
        self.rows = rows or []


@dataclass
class FlowConfig:
    s: float = 0.0
    gauged: bool = True
    integrator: str = "rk4"
    dt_policy: str = "cfl"
    dt: float = 1e-4
    c_safety: float = 0.1
    steps: int = 100
    snapshot_every: int = 0
    bianchi_every: int = 1
    max_halvings: int = 8
    min_eig_floor: float = 1e-6
    q_sup_ceiling: float = 1e6

    def __post_init__(self):
        if self.integrator not in ("rk4", "euler"):
            raise ValueError(f"unknown integrator {self.integrator!r}")
        if self.dt_policy not in ("cfl", "fixed"):
            raise ValueError(f"unknown dt policy {self.dt_policy!r}")
        if self.steps < 0 or self.c_safety <= 0 or self.dt <= 0:
            raise ValueError("steps, c_safety and dt must be positive")


def s_window(n: int) -> tuple[float, float]:
    """Closed interval of s on which the s-energy flow is weakly parabolic (n >= 3)."""
    return -1.0 / (8.0 * (n - 2)), 1.0 / 8.0


def s_in_open_window(n: int, s: float) -> bool:
    if s == 0.0:
        return True
    if n < 3:
        return False
    lo, hi = s_window(n)
    return lo < s < hi


@dataclass
class DiagnosticsRow:
    step: int
    t: float
    E: float
    E_s: float
    Q_L2: float
    bianchi: float
    vol: float
    phi_norm_dev: float
    min_metric_eig: float
    dt: float


COLUMNS = [f.name for f in dataclasses.fields(DiagnosticsRow)]


def cfl_dt(g: np.ndarray, lat: TorusLattice, c_safety: float = 0.1, min_eig: float | None = None) -> float:
    """dt = c h^2 / (1 + max spectral radius of g^{-1})."""
    if min_eig is None:
        min_eig = float(np.min(np.linalg.eigvalsh(g)))
    return c_safety * lat.h**2 / (1.0 + 1.0 / min_eig)


@dataclass
class FlowState:
    g: np.ndarray
    phi: np.ndarray
    t: float = 0.0
    step: int = 0


@dataclass
class FlowRun:
    """Evolves a pair and records diagnostics; ``gbar`` is the DeTurck background."""

    lat: TorusLattice
    rep: CliffordRep
    cfg: FlowConfig
    gbar: np.ndarray
    rows: list = field(default_factory=list)
    halvings: int = 0
    violations: int = 0
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self._gbinv = np.linalg.inv(self.gbar)
        self._Gbar = christoffels(self.lat, self.gbar, self._gbinv)
        self._cache = None
        if not s_in_open_window(self.lat.n, self.cfg.s):
            msg = f"s = {self.cfg.s} lies outside the open ellipticity window for n = {self.lat.n}"
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            self.notes.append(msg)

    def pair(self, g, phi) -> SpinorPair:
        c = self._cache
        if c is not None and c.g is g and c.phi is phi:
            return c
        return SpinorPair(self.lat, self.rep, g, phi)

    def velocity(self, g, phi):
        pair = self.pair(g, phi)
        Q = G.q_s(pair, self.cfg.s)
        if self.cfg.gauged:
            X = G.deturck_field(pair, self.gbar, self._Gbar, self._gbinv)
            la, lb = G.lambda_star(pair, X)
            V = (Q[0] + la, Q[1] + lb)
        else:
            V = Q
        return pair, Q, G.square_root_frame_velocity(pair, V)

    def objective(self, pair: SpinorPair) -> float:
        return energy_s(pair, self.cfg.s)

    def diagnostics(self, state: FlowState, pair: SpinorPair, Q, dt: float) -> DiagnosticsRow:
        cfg = self.cfg
        E = energy(pair)
        Es = E if cfg.s == 0 else energy_s(pair, cfg.s)
        qn = G.l2_norm(pair, Q)
        if cfg.bianchi_every and state.step % cfg.bianchi_every == 0:
            lq = G.lam(pair, Q)
            bianchi = float(np.sqrt(max(G.l2_pair_vector(pair, lq, lq), 0.0)) / (1.0 + qn))
        else:
            bianchi = float("nan")
        return DiagnosticsRow(
            step=state.step, t=state.t, E=E, E_s=Es, Q_L2=qn, bianchi=bianchi,
            vol=pair.geo.volume(),
            phi_norm_dev=float(np.max(np.abs(np.sqrt(inner(pair.phi, pair.phi)) - 1.0))),
            min_metric_eig=pair.geo.min_eig, dt=dt)

    def _advance(self, g, phi, k1, dt):
        if self.cfg.integrator == "euler":
            return g + dt * k1[0], phi + dt * k1[1]
        _, _, k2 = self.velocity(g + 0.5 * dt * k1[0], phi + 0.5 * dt * k1[1])
        _, _, k3 = self.velocity(g + 0.5 * dt * k2[0], phi + 0.5 * dt * k2[1])
        _, _, k4 = self.velocity(g + dt * k3[0], phi + dt * k3[1])
        g1 = g + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p1 = phi + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        return g1, p1

    def step(self, state: FlowState) -> tuple[FlowState, DiagnosticsRow]:
        """One explicit step; dt is halved while the s-energy would increase."""
        cfg = self.cfg
        pair, Q, k1 = self.velocity(state.g, state.phi)
        if not (G.sup_norm(Q) <= cfg.q_sup_ceiling):
            raise FlowBlowup(f"|Q| exceeded {cfg.q_sup_ceiling:g} at step {state.step}", self.rows)
        dt = cfl_dt(state.g, self.lat, cfg.c_safety, pair.geo.min_eig) if cfg.dt_policy == "cfl" else cfg.dt
        E0 = self.objective(pair)
        tol = 1e-10 * (1.0 + abs(E0))
        for attempt in range(cfg.max_halvings + 1):
            try:
                g1, p1 = self._advance(state.g, state.phi, k1, dt)
            except MetricError as exc:
                raise FlowBlowup(f"metric degenerated inside step {state.step}: {exc}", self.rows) from None
            g1 = 0.5 * (g1 + np.swapaxes(g1, 1, 2))
            p1 = normalize(p1)
            if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(p1))):
                raise FlowBlowup(f"non-finite fields at step {state.step}", self.rows)
            new = SpinorPair(self.lat, self.rep, g1, p1)
            try:
                min_eig = new.geo.min_eig
            except MetricError:
                min_eig = -np.inf
            if min_eig < cfg.min_eig_floor:
                raise FlowBlowup(f"metric degenerated at step {state.step}", self.rows)
            E1 = self.objective(new)
            if not np.isfinite(E1):
                raise FlowBlowup(f"non-finite energy at step {state.step}", self.rows)
            if E1 <= E0 + tol:
                break
            if attempt == cfg.max_halvings:
                self.violations += 1
                break
            dt *= 0.5
            self.halvings += 1
        self._cache = new
        row = self.diagnostics(state, pair, Q, dt)
        self.rows.append(row)
        return FlowState(g1, p1, state.t + dt, state.step + 1), row

    def final_row(self, state: FlowState) -> DiagnosticsRow:
        """Diagnostics of a state without stepping (dt column is 0)."""
        pair = self.pair(state.g, state.phi)
        return self.diagnostics(state, pair, G.q_s(pair, self.cfg.s), 0.0)

    def run(self, state: FlowState, on_step: Callable | None = None) -> FlowState:
        for _ in range(self.cfg.steps):
            state, row = self.step(state)
            if on_step is not None:
                on_step(state, row)
        return state


def write_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([repr(getattr(r, c)) if isinstance(getattr(r, c), float) else getattr(r, c)
                        for c in COLUMNS])
