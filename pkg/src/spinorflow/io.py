"""Snapshots: raw little-endian float64 arrays plus a JSON sidecar.

Layout of a snapshot directory::

    g.f64      metric, shape (S, n, n), row-major
    phi.f64    spinor components, shape (S, D) real or (S, D, 2) with (re, im)
    meta.json  lattice and layout description

Sites are ordered row-major over the lattice shape (last axis fastest).
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .lattice import TorusLattice

FRAME_CONVENTION = "spinor components in the symmetric square-root frame e_a = sum_mu (g^-1/2)_{mu a} d_mu"


def _write_raw(path: Path, a: np.ndarray) -> None:
    path.write_bytes(np.ascontiguousarray(a, dtype="<f8").tobytes())


def write_snapshot(directory, lat: TorusLattice, g: np.ndarray, phi: np.ndarray, real_rep: bool = False,
                   extra: dict | None = None) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    complex_ = np.iscomplexobj(phi)
    _write_raw(d / "g.f64", g)
    _write_raw(d / "phi.f64", np.stack([phi.real, phi.imag], axis=-1) if complex_ else phi)
    meta = {
        "n": lat.n, "N": lat.N, "L": lat.L, "order": lat.order, "shape": list(lat.shape),
        "real_rep": bool(real_rep),
        "fields": {
            "g": {"file": "g.f64", "shape": list(g.shape), "dtype": "<f8"},
            "phi": {"file": "phi.f64", "shape": [phi.shape[0], phi.shape[1]] + ([2] if complex_ else []),
                    "dtype": "<f8", "complex": complex_},
        },
        "site_order": "row-major over shape, last axis fastest",
        "frame_convention": FRAME_CONVENTION,
    }
    if extra:
        meta.update(extra)
    (d / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return d


def read_snapshot(directory):
    """Return (lattice, g, phi, meta)."""
    d = Path(directory)
    meta = json.loads((d / "meta.json").read_text())
    lat = TorusLattice(meta["n"], meta["N"], meta["L"], meta.get("order", 2), tuple(meta["shape"]))
    fg = meta["fields"]["g"]
    fp = meta["fields"]["phi"]
    g = np.frombuffer((d / fg["file"]).read_bytes(), dtype="<f8").reshape(fg["shape"]).astype(float)
    raw = np.frombuffer((d / fp["file"]).read_bytes(), dtype="<f8").reshape(fp["shape"]).astype(float)
    phi = raw[..., 0] + 1j * raw[..., 1] if fp["complex"] else raw
    return lat, g, phi, meta
