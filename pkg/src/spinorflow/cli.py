"""Command line front end: ``spinorflow {flow,gradcheck,symbol,g2,oracle}``.

Every run writes into its output directory:

    config.txt        effective configuration (sorted key = value lines)
    diagnostics.csv   flow: one DiagnosticsRow per step; otherwise one row per check
    report.json       summary and pass/fail verdicts
    run_meta.json     version, command line and wall time (not byte-reproducible)
    snapshots/        flow snapshots when flow.snapshot_every > 0

Exit codes: 0 success, 1 suite failure, 2 configuration error, 3 flow blow-up.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, checks, flow, g2, jets, scenarios, symbol
from . import gradient as G
from .clifford import clifford_rep
from .config import ConfigError, RunConfig, load_config
from .functionals import SpinorPair, grad_norm_sq
from .io import read_snapshot, write_snapshot
from .lattice import TorusLattice

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3
CHECK_COLUMNS = ["check", "value", "threshold", "passed"]


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


class CheckTable:
    def __init__(self):
        self.rows = []

    def add(self, name: str, value: float, threshold: float | None, passed: bool | None = None):
        if passed is None:
            passed = threshold is None or (math.isfinite(value) and value <= threshold)
        self.rows.append((name, float(value), threshold, bool(passed)))
        return passed

    @property
    def ok(self) -> bool:
        return all(r[3] for r in self.rows)

    def write(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CHECK_COLUMNS)
            for name, value, thr, passed in self.rows:
                w.writerow([name, repr(value), "" if thr is None else repr(float(thr)), int(passed)])

    def as_dict(self) -> dict:
        return {name: {"value": v, "threshold": t, "passed": p} for name, v, t, p in self.rows}


def lattice_from(cfg: RunConfig) -> TorusLattice:
    n, N = cfg["n"], cfg["N"]
    active = cfg["active_axes"]
    shape = None
    if active:
        shape = tuple(N if mu in active else 1 for mu in range(n))
    return TorusLattice(n, N, cfg["L"], cfg["order"], shape)


def scenario_from(cfg: RunConfig, lat: TorusLattice, rep) -> scenarios.Scenario:
    sc = cfg.section("scenario")
    k = sc["k"]
    if len(k) == 1:
        k = (k[0],) + (0.0,) * (lat.n - 1)
    return scenarios.build_scenario(sc["name"], lat, rep, amplitude=sc["amplitude"], modes=sc["modes"],
                                    seed=sc["seed"], spinor_amplitude=sc["spinor_amplitude"], k=k)


# ---------------------------------------------------------------- commands


def cmd_flow(cfg: RunConfig, out: Path) -> tuple[int, dict, CheckTable | None]:
    rep = clifford_rep(cfg["n"], cfg["real"])
    lat = lattice_from(cfg)
    sc = scenario_from(cfg, lat, rep)
    f = cfg.section("flow")
    fc = flow.FlowConfig(s=f["s"], gauged=f["gauge"] == "deturck", integrator=f["scheme"],
                         dt_policy=f["dt_policy"], dt=f["dt"], c_safety=f["c_safety"], steps=f["steps"],
                         snapshot_every=f["snapshot_every"], bianchi_every=f["bianchi_every"],
                         max_halvings=f["max_halvings"], min_eig_floor=f["min_eig_floor"],
                         q_sup_ceiling=f["q_sup_ceiling"])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        run = flow.FlowRun(lat, rep, fc, sc.g.copy())
    state = flow.FlowState(sc.g, sc.phi)
    snap_dir = out / "snapshots"

    def snapshot(st):
        write_snapshot(snap_dir / f"step_{st.step:06d}", lat, st.g, st.phi, cfg["real"],
                       extra={"step": st.step, "t": st.t})

    def on_step(st, row):
        if fc.snapshot_every and st.step % fc.snapshot_every == 0:
            snapshot(st)

    G0 = grad_norm_sq(SpinorPair(lat, rep, sc.g, sc.phi))
    if fc.snapshot_every:
        snapshot(state)
    status, message = "completed", ""
    try:
        state = run.run(state, on_step)
        run.rows.append(run.final_row(state))
    except flow.FlowBlowup as exc:
        status, message = "blowup", str(exc)
    flow.write_csv(out / "diagnostics.csv", run.rows)
    E = [r.E_s for r in run.rows]
    increases = sum(1 for a, b in zip(E, E[1:]) if b > a + 1e-10 * (1 + abs(a)))
    report = {
        "command": "flow", "status": status, "message": message,
        "steps_completed": state.step, "t_final": state.t,
        "E_initial": run.rows[0].E if run.rows else None,
        "E_final": run.rows[-1].E if run.rows else None,
        "grad_sq_ratio": (grad_norm_sq(SpinorPair(lat, rep, state.g, state.phi)) / G0
                          if status == "completed" and G0 > 0 else None),
        "max_phi_norm_dev": max((r.phi_norm_dev for r in run.rows), default=0.0),
        "energy_increases": increases, "dt_halvings": run.halvings,
        "monotonicity_violations": run.violations,
        "notes": run.notes + cfg.warnings,
    }
    return (EXIT_BLOWUP if status == "blowup" else EXIT_OK), report, None


def cmd_gradcheck(cfg: RunConfig, out: Path):
    rep = clifford_rep(cfg["n"], cfg["real"])
    lat = lattice_from(cfg)
    sc = scenario_from(cfg, lat, rep)
    pair = SpinorPair(lat, rep, sc.g, sc.phi)
    gc = cfg.section("gradcheck")
    tol = gc["tolerance"]
    rng = scenarios.make_rng(cfg["scenario.seed"] + 1)
    table = CheckTable()
    for s in gc["s"]:
        for k in range(gc["directions"]):
            u = checks.random_direction(rng, lat, rep).sample(lat, pair.phi)
            r = checks.gradient_check(pair, u, s)
            # exact critical pairs have a vanishing derivative: fall back to the absolute residual
            value = r.relative if abs(r.derivative) > 1e-9 else r.residual
            table.add(f"gradient_s={s:g}_dir{k}", value, tol if abs(r.derivative) > 1e-9 else 1e-12)
    Q = G.negative_gradient(pair)
    # Bianchi and tangency residuals are O(h^2): judge them by their order from N to 2N
    fine = TorusLattice(lat.n, 2 * lat.N, lat.L, lat.order,
                        tuple(2 * s_ if s_ > 1 else 1 for s_ in lat.shape))
    sf = scenario_from(cfg, fine, rep)
    fine_pair = SpinorPair(fine, rep, sf.g, sf.phi)
    # the pointwise tangency residual is a sup-norm and reaches its asymptotic order later
    for name, fn, min_order in (("bianchi", G.bianchi_residual, 1.9), ("q2_tangency", checks.tangency_residual, 1.5)):
        coarse_v, fine_v = fn(pair), fn(fine_pair)
        table.add(f"{name}_N{lat.N}", coarse_v, None)
        table.add(f"{name}_N{2 * lat.N}", fine_v, None)
        if fine_v < 1e-12:
            table.add(f"{name}_zero", fine_v, 1e-12)
        else:
            order = checks.measured_order(coarse_v, fine_v)
            table.add(f"{name}_order", order, None, order >= min_order)
    critical = G.l2_norm(pair, Q) <= 1e-10
    table.add("q_norm", G.l2_norm(pair, Q), None)
    if critical:
        for k in range(gc["directions"]):
            u = checks.random_direction(rng, lat, rep).sample(lat, pair.phi)
            table.add(f"second_variation_dir{k}", checks.second_variation(pair, u).relative, 1e-3)
    report = {"command": "gradcheck", "scenario": cfg["scenario.name"], "critical": critical,
              "checks": table.as_dict(), "passed": table.ok, "notes": cfg.warnings}
    return (EXIT_OK if table.ok else EXIT_FAIL), report, table


def cmd_symbol(cfg: RunConfig, out: Path):
    n = cfg["n"]
    rep = clifford_rep(n, cfg["real"])
    rng = scenarios.make_rng(cfg["scenario.seed"])
    s, gauged = cfg["symbol.s"], cfg["symbol.gauged"]
    table = CheckTable()
    max_eigs, kernel_dims, dists, coercivity = [], [], [], []
    first = None
    for _ in range(cfg["symbol.points"]):
        pt = symbol.random_point(rep, rng)
        form = symbol.symbol_quadratic_form(pt, s, gauged)
        if first is None:
            first = form
        max_eigs.append(form.eigenvalues[-1])
        kernel_dims.append(form.kernel_dim(1e-9))
        if gauged:
            d = np.r_[np.full(pt.n_metric, 1 / 16), np.ones(len(pt.basis) - pt.n_metric)]
            coercivity.append(float(np.linalg.eigvalsh(form.matrix + np.diag(d))[-1]) if s == 0 else -form.eigenvalues[-1])
        elif s == 0:
            dists.append(symbol.subspace_distance(form.kernel(1e-9), symbol.lambda_star_image(pt)))
    lo, hi = symbol.window_closed_form(n) if n >= 3 else (math.nan, math.nan)
    window = list(symbol.ellipticity_window(symbol.random_point(rep, rng))) if n >= 3 else None
    if not gauged and (s == 0 or (n >= 3 and lo <= s <= hi)):
        table.add("max_eigenvalue", max(max_eigs), 1e-12)
    if not gauged and s == 0:
        table.add("kernel_dim_equals_n", float(all(k == n for k in kernel_dims)), None, all(k == n for k in kernel_dims))
        table.add("kernel_vs_image_distance", max(dists), 1e-8)
    if gauged and s == 0:
        table.add("gauged_bound", max(coercivity), 1e-12)
    if gauged and s != 0:
        table.add("gauged_coercivity", min(coercivity), None, min(coercivity) > 0)
    if window is not None:
        table.add("window_lo_error", abs(window[0] - lo), 1e-6)
        table.add("window_hi_error", abs(window[1] - hi), 1e-6)
    report = {"command": "symbol", "n": n, "s": s, "gauged": gauged,
              "eigenvalues": first.eigenvalues, "kernel_dim": kernel_dims[0],
              "kernel_dims": kernel_dims, "window": window, "window_closed_form": [lo, hi],
              "checks": table.as_dict(), "passed": table.ok}
    return (EXIT_OK if table.ok else EXIT_FAIL), report, table


def cmd_g2(cfg: RunConfig, out: Path):
    rep = clifford_rep(7, real=True)
    table = CheckTable()
    spec = None
    if cfg["g2.snapshot"]:
        lat, g, phi, meta = read_snapshot(cfg["g2.snapshot"])
        if lat.n != 7 or np.iscomplexobj(phi):
            raise ConfigError("key 'g2.snapshot': snapshot must hold a real spinor field on a 7-torus")
    else:
        lat = lattice_from(cfg)
        sc = scenario_from(cfg, lat, rep)
        g, phi, spec = sc.g, sc.phi, sc.spec
    pair = SpinorPair(lat, rep, g, phi)
    fb = g2.bispinor_form(rep, phi, tol=1e-8)
    table.add("odd_degree_parts", max(float(np.max(np.abs(p))) for p in fb.odd_parts), 1e-12)
    table.add("sigma_minus_star_omega", float(np.max(np.abs(fb.sigma - g2.hodge_star(fb.omega, 7, 3)))), 1e-12)
    table.add("scalar_part_minus_one", float(np.max(np.abs(fb.scalar - 1))), 1e-12)
    table.add("top_part_minus_one", float(np.max(np.abs(fb.top - 1))), 1e-12)
    if spec is not None:
        x = lat.points()[:: max(1, lat.sites // 8)]
        nr = g2.norm_correspondence(rep, jets.jet_oracle(spec, x))
        table.add("norm_correspondence", nr.residual, 1e-10)
        table.add("norm_correspondence_pair", nr.pair_residual, 1e-10)
    d = g2.dirichlet_functionals(pair)
    dO, dS = g2.torsion_norms(pair)
    table.add("C_vs_16E0_rel", d.rel_C if d.sixteen_E0 > 0 else abs(d.C), None)
    table.add("D_vs_16E116_rel", d.rel_D if d.sixteen_E116 != 0 else abs(d.D), None)
    report = {"command": "g2", "C": d.C, "D": d.D, "16E_0": d.sixteen_E0, "16E_1/16": d.sixteen_E116,
              "norm_dOmega": dO, "norm_dstarOmega": dS, "checks": table.as_dict(), "passed": table.ok}
    return (EXIT_OK if table.ok else EXIT_FAIL), report, table


def cmd_oracle(cfg: RunConfig, out: Path):
    rep = clifford_rep(cfg["n"], cfg["real"])
    lat = lattice_from(cfg)
    sc = scenario_from(cfg, lat, rep)
    if sc.spec is None:
        raise ConfigError("key 'scenario.name': the oracle needs a band-limited scenario")
    rng = scenarios.make_rng(cfg["scenario.seed"] + 7)
    x = rng.random((cfg["oracle.points"], lat.n)) * lat.L
    for mu in range(lat.n):
        if mu not in lat.active_axes:
            x[:, mu] = 0.0
    jet = jets.jet_oracle(sc.spec, x)
    values = {
        "x": x, "g": jet.g, "dg": jet.dg, "phi": jet.phi, "dphi": jet.dphi,
        "christoffels": jets.christoffels_jet(jet), "spin_connection": jets.spin_connection_jet(jet),
        "nabla_phi": jets.nabla_phi_jet(rep, jet), "dirac": jets.dirac_jet(rep, jet),
        "ricci": jets.ricci_jet(jet), "scal": jets.scal_jet(jet),
    }
    enc = {k: ({"re": np.real(v), "im": np.imag(v)} if np.iscomplexobj(v) else v) for k, v in values.items()}
    table = CheckTable()
    for k, v in values.items():
        table.add(f"max_abs_{k}", float(np.max(np.abs(v))), None)
    report = {"command": "oracle", "layout": "leading axis indexes points; derivative axes follow it",
              "values": enc, "passed": True}
    return EXIT_OK, report, table


COMMANDS = {"flow": cmd_flow, "gradcheck": cmd_gradcheck, "symbol": cmd_symbol, "g2": cmd_g2, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinorflow", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", "-c", help="key = value configuration file")
    p.add_argument("--set", "-s", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration key (repeatable)")
    p.add_argument("--out", "-o", help="output directory (overrides the 'out' key)")
    p.add_argument("--version", action="version", version=f"spinorflow {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = [f"command={args.command}"] + list(args.set)
    if args.out:
        overrides.append(f"out={args.out}")
    start = time.perf_counter()
    try:
        cfg = load_config(args.config, overrides)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(cfg.echo())
        for w in cfg.warnings:
            print(f"warning: {w}", file=sys.stderr)
        code, report, table = COMMANDS[cfg["command"]](cfg, out)
    except (ConfigError, scenarios.ScenarioError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if table is not None:
        table.write(out / "diagnostics.csv")
    write_json(out / "report.json", report)
    write_json(out / "run_meta.json", {
        "version": __version__, "command": cfg["command"], "argv": list(sys.argv[1:] if argv is None else argv),
        "wall_time_s": time.perf_counter() - start, "exit_code": code,
    })
    print(f"{cfg['command']}: exit {code}, outputs in {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
