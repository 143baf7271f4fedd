"""Flat ``key = value`` run configuration with one level of dotted sections.

Example::

    command = flow
    n = 3
    N = 16
    scenario.name = perturbed_flat
    scenario.amplitude = 0.01
    flow.steps = 100

Blank lines and ``#`` comments are ignored.  Unknown keys, malformed lines
and out-of-range values raise ConfigError with the offending key and line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

COMMANDS = ("flow", "gradcheck", "symbol", "g2", "oracle")


class ConfigError(ValueError):
    pass


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _ints(v: str) -> tuple[int, ...]:
    return tuple(int(x) for x in v.replace(",", " ").split())


def _floats(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.replace(",", " ").split())


def _opt_float(v: str):
    return None if v.strip().lower() in ("", "none") else float(v)


def _choice(*opts):
    def parse(v: str) -> str:
        v = v.strip()
        if v not in opts:
            raise ValueError(f"{v!r} not in {{{', '.join(opts)}}}")
        return v
    return parse


def _positive(conv):
    def parse(v):
        x = conv(v)
        if x <= 0:
            raise ValueError("must be positive")
        return x
    return parse


def _nonneg(conv):
    def parse(v):
        x = conv(v)
        if x < 0:
            raise ValueError("must be non-negative")
        return x
    return parse


def _range(conv, lo, hi):
    def parse(v):
        x = conv(v)
        if not lo <= x <= hi:
            raise ValueError(f"must lie in [{lo}, {hi}]")
        return x
    return parse


# key -> (parser, default); a default of REQUIRED must be supplied
REQUIRED = object()
SCHEMA: dict[str, tuple] = {
    "command": (_choice(*COMMANDS), REQUIRED),
    "n": (_range(int, 2, 8), REQUIRED),
    "N": (_range(int, 4, 4096), 16),
    "L": (_positive(float), 1.0),
    "order": (_choice("2", "4"), "2"),
    "real": (_bool, False),
    "active_axes": (_ints, ()),
    "out": (str, "run"),
    "scenario.name": (_choice("flat_critical", "perturbed_flat", "plane_wave_spinor"), "perturbed_flat"),
    "scenario.amplitude": (_nonneg(float), 0.01),
    "scenario.spinor_amplitude": (_opt_float, None),
    "scenario.modes": (_positive(int), 1),
    "scenario.seed": (_nonneg(int), 0),
    "scenario.k": (_floats, (1.0,)),
    "flow.scheme": (_choice("rk4", "euler"), "rk4"),
    "flow.dt_policy": (_choice("cfl", "fixed"), "cfl"),
    "flow.dt": (_positive(float), 1e-4),
    "flow.c_safety": (_positive(float), 0.1),
    "flow.steps": (_nonneg(int), 100),
    "flow.gauge": (_choice("deturck", "off"), "deturck"),
    "flow.s": (float, 0.0),
    "flow.allow_s_outside_window": (_bool, False),
    "flow.snapshot_every": (_nonneg(int), 0),
    "flow.bianchi_every": (_nonneg(int), 1),
    "flow.max_halvings": (_nonneg(int), 8),
    "flow.min_eig_floor": (_positive(float), 1e-6),
    "flow.q_sup_ceiling": (_positive(float), 1e6),
    "gradcheck.directions": (_positive(int), 3),
    "gradcheck.s": (_floats, (0.0,)),
    "gradcheck.tolerance": (_positive(float), 5e-3),
    "symbol.points": (_positive(int), 20),
    "symbol.s": (float, 0.0),
    "symbol.gauged": (_bool, False),
    "g2.snapshot": (str, ""),
    "oracle.points": (_positive(int), 4),
}


@dataclass
class RunConfig:
    values: dict
    sources: dict = field(default_factory=dict)   # key -> "default" | "file:line" | "flag"
    warnings: list = field(default_factory=list)

    def __getitem__(self, key: str):
        return self.values[key]

    def section(self, name: str) -> dict:
        p = name + "."
        return {k[len(p):]: v for k, v in self.values.items() if k.startswith(p)}

    def echo(self) -> str:
        """Effective configuration, one sorted ``key = value`` line each."""
        lines = []
        for k in sorted(self.values):
            v = self.values[k]
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def _parse_line(raw: str, where: str) -> tuple[str, str] | None:
    line = raw.split("#", 1)[0].strip()
    if not line:
        return None
    if "=" not in line:
        raise ConfigError(f"{where}: expected 'key = value', got {raw.strip()!r}")
    key, value = (s.strip() for s in line.split("=", 1))
    if key.count(".") > 1:
        raise ConfigError(f"{where}: key {key!r} nests deeper than one section")
    return key, value


def parse_config(text: str = "", overrides=(), origin: str = "<config>") -> RunConfig:
    """Parse config text plus ``key=value`` overrides (which win)."""
    raw: dict[str, tuple[str, str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        kv = _parse_line(line, f"{origin}:{lineno}")
        if kv:
            raw[kv[0]] = (kv[1], f"{origin}:{lineno}")
    for item in overrides:
        kv = _parse_line(item, f"flag {item!r}")
        if kv:
            raw[kv[0]] = (kv[1], "flag")
    values, sources = {}, {}
    for key, (value, where) in raw.items():
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown key {key!r}")
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None
        sources[key] = where
    for key, (_, default) in SCHEMA.items():
        if key in values:
            continue
        if default is REQUIRED:
            raise ConfigError(f"missing required key {key!r}")
        values[key] = default
        sources[key] = "default"
    values["order"] = int(values["order"])
    cfg = RunConfig(values, sources)
    _validate(cfg)
    return cfg


def load_config(path=None, overrides=()) -> RunConfig:
    if path is None:
        return parse_config("", overrides)
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {str(p)!r} not found")
    return parse_config(p.read_text(), overrides, origin=str(p))


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    n = v["n"]
    if v["real"] and n != 7:
        raise ConfigError("key 'real': the real representation exists only for n = 7")
    if any(a < 0 or a >= n for a in v["active_axes"]) or len(set(v["active_axes"])) != len(v["active_axes"]):
        raise ConfigError(f"key 'active_axes': entries must be distinct and lie in 0..{n - 1}")
    if len(v["scenario.k"]) not in (1, n):
        raise ConfigError(f"key 'scenario.k': give 1 or {n} components")
    if v["command"] == "g2" and n != 7:
        raise ConfigError("key 'n': the g2 command needs n = 7")
    s = v["flow.s"]
    if s != 0:
        from .flow import s_in_open_window, s_window
        if not s_in_open_window(n, s):
            window = s_window(n) if n >= 3 else "empty"
            msg = f"flow.s = {s} is outside the open ellipticity window {window}"
            if not v["flow.allow_s_outside_window"]:
                msg += "; proceeding anyway (set flow.allow_s_outside_window = true to silence)"
            cfg.warnings.append(msg)
