import numpy as np
import pytest

from spinorflow import scenarios
from spinorflow.clifford import clifford_rep, inner
from spinorflow.flow import (COLUMNS, FlowBlowup, FlowConfig, FlowRun, FlowState, cfl_dt, s_in_open_window,
                             s_window, write_csv)
from spinorflow.functionals import SpinorPair, grad_norm_sq
from spinorflow.lattice import TorusLattice


def _setup(N=8, amplitude=1e-2, seed=0, **cfg):
    lat = TorusLattice(3, N)
    rep = clifford_rep(3)
    sc = scenarios.perturbed_flat(lat, rep, amplitude, seed=seed)
    run = FlowRun(lat, rep, FlowConfig(**cfg), sc.g.copy())
    return run, FlowState(sc.g, sc.phi)


def test_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(integrator="leapfrog")
    with pytest.raises(ValueError):
        FlowConfig(dt_policy="adaptive")
    with pytest.raises(ValueError):
        FlowConfig(c_safety=0)


def test_window():
    lo, hi = s_window(3)
    assert (lo, hi) == (-0.125, 0.125)
    assert s_in_open_window(3, 0.1) and not s_in_open_window(3, 0.125) and s_in_open_window(2, 0.0)


def test_cfl_dt_scales_with_h_squared():
    g = np.broadcast_to(np.eye(3), (8, 3, 3))
    a = cfl_dt(g, TorusLattice(3, 8), 0.1)
    b = cfl_dt(g, TorusLattice(3, 16), 0.1)
    assert a == pytest.approx(4 * b)


@pytest.mark.parametrize("integrator", ["rk4", "euler"])
def test_energy_monotone_and_constraint(integrator):
    run, st = _setup(steps=30, integrator=integrator)
    st = run.run(st)
    E = [r.E for r in run.rows]
    assert all(b <= a for a, b in zip(E, E[1:]))
    assert max(r.phi_norm_dev for r in run.rows) <= 1e-12
    assert run.violations == 0 and st.step == 30


def test_flat_critical_is_fixed():
    lat = TorusLattice(3, 8)
    rep = clifford_rep(3)
    sc = scenarios.flat_critical(lat, rep)
    run = FlowRun(lat, rep, FlowConfig(steps=5), sc.g.copy())
    st = run.run(FlowState(sc.g, sc.phi))
    assert np.max(np.abs(st.g - sc.g)) <= 1e-14 and np.max(np.abs(st.phi - sc.phi)) <= 1e-14


def test_gauged_flow_reduces_gradient():
    run, st = _setup(N=8, steps=200, c_safety=0.4, bianchi_every=0)
    G0 = grad_norm_sq(SpinorPair(run.lat, run.rep, st.g, st.phi))
    st = run.run(st)
    G1 = grad_norm_sq(SpinorPair(run.lat, run.rep, st.g, st.phi))
    assert G1 < 0.5 * G0


def test_spinor_stays_unit_and_volume_reported():
    run, st = _setup(steps=3)
    st = run.run(st)
    assert np.allclose(inner(st.phi, st.phi), 1.0, atol=1e-14)
    assert all(r.vol > 0 for r in run.rows)


def test_large_fixed_dt_blows_up():
    run, st = _setup(steps=50, dt_policy="fixed", dt=1.0, max_halvings=0, amplitude=0.05)
    with pytest.raises(FlowBlowup):
        run.run(st)


def test_s_outside_window_warns():
    with pytest.warns(RuntimeWarning):
        run, _ = _setup(s=0.5)
    assert run.notes


def test_write_csv(tmp_path):
    run, st = _setup(steps=2)
    run.run(st)
    p = tmp_path / "d.csv"
    write_csv(p, run.rows)
    lines = p.read_text().splitlines()
    assert lines[0].split(",") == COLUMNS and len(lines) == 3


def test_deterministic():
    rows = []
    for _ in range(2):
        run, st = _setup(steps=3)
        run.run(st)
        rows.append([(r.E, r.dt) for r in run.rows])
    assert rows[0] == rows[1]
