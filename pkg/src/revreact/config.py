"""Line-oriented ``key = value`` run configuration.

Sections and keys (every key optional; omitted keys take the reference
scenario's values, see ``configs/reference.ini``)::

    [grid]     extent = L1 [L2 [L3]]      nodes = n1 [n2 [n3]]
    [species]  diff = d1 d2 d3 d4         eps = 0.0
               init = constant | cosine | gaussian
               a1 .. a4 = recipe parameters (see InitialData)
    [time]     horizon  dt_init  dt_max  safety  max_steps
    [checks]   enabled = names...         linear_tol  entropy_tol
    [output]   snapshots = N

Errors are raised as ConfigError with a ``file:line:`` prefix.
"""

from __future__ import annotations

import configparser
import re
from pathlib import Path

from .system import CHECK_NAMES, InitialData, SimulationConfig, default_config

SCHEMA = {
    "grid": ("extent", "nodes"),
    "species": ("diff", "eps", "init", "a1", "a2", "a3", "a4"),
    "time": ("horizon", "dt_init", "dt_max", "safety", "max_steps"),
    "checks": ("enabled", "linear_tol", "entropy_tol"),
    "output": ("snapshots",),
}


class ConfigError(ValueError):
    pass


def _locate(text: str, section: str, key: str | None = None) -> int:
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
            continue
        if current == section and key is not None and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return n
    return 0


def parse_config(text: str, source: str = "<config>") -> SimulationConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}".replace("\n", " ")) from None

    def fail(section, key, msg):
        raise ConfigError(f"{source}:{_locate(text, section, key)}: [{section}] {key}: {msg}")

    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}:{_locate(text, section)}: unknown section [{section}]; "
                              f"valid: {', '.join(SCHEMA)}")
        for key in cp[section]:
            if key not in SCHEMA[section]:
                fail(section, key, f"unknown key; valid: {', '.join(SCHEMA[section])}")

    base = default_config()
    kw = {}

    def get(section, key, conv, count=None):
        if not cp.has_option(section, key):
            return None
        raw = cp.get(section, key).split()
        try:
            vals = [conv(v) for v in raw]
        except ValueError:
            fail(section, key, f"cannot parse {' '.join(raw)!r} as {conv.__name__}")
        if count is not None and len(vals) != count:
            fail(section, key, f"expected {count} value(s), got {len(vals)}")
        return vals if count != 1 else vals[0]

    extent = get("grid", "extent", float)
    nodes = get("grid", "nodes", int)
    if nodes is not None:
        kw["nodes"] = tuple(nodes)
        kw["extent"] = tuple(extent) if extent is not None else (1.0,) * len(nodes)
    elif extent is not None:
        kw["extent"] = tuple(extent)
        kw["nodes"] = (base.nodes[0],) * len(extent)
    if "extent" in kw and len(kw["extent"]) != len(kw["nodes"]):
        fail("grid", "extent", f"{len(kw['extent'])} extents for {len(kw['nodes'])} axes")

    for key, conv, count in (("diff", float, 4), ("eps", float, 1)):
        v = get("species", key, conv, count)
        if v is not None:
            kw[key] = tuple(v) if count > 1 else v
    kind = get("species", "init", str, 1)
    rows = [get("species", f"a{i}", float) for i in range(1, 5)]
    if kind is not None or any(r is not None for r in rows):
        if kind is None or any(r is None for r in rows):
            fail("species", "init", "init and all of a1..a4 must be given together")
        try:
            kw["initial"] = InitialData(kind, tuple(tuple(r) for r in rows))
        except ValueError as exc:
            fail("species", "init", str(exc))

    for key, conv in (("horizon", float), ("dt_init", float), ("dt_max", float), ("safety", float),
                      ("max_steps", int)):
        v = get("time", key, conv, 1)
        if v is not None:
            kw[key] = v
    enabled = get("checks", "enabled", str)
    if enabled is not None:
        bad = [e for e in enabled if e not in CHECK_NAMES]
        if bad:
            fail("checks", "enabled", f"unknown checks {bad}; valid: {', '.join(CHECK_NAMES)}")
        kw["checks"] = tuple(enabled)
    for key in ("linear_tol", "entropy_tol"):
        v = get("checks", key, float, 1)
        if v is not None:
            kw[key] = v
    v = get("output", "snapshots", int, 1)
    if v is not None:
        kw["snapshots"] = v

    try:
        cfg = base.with_(**kw)
        if "initial" in kw:
            kw["initial"].build(cfg.grid)
        return cfg
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path | None) -> SimulationConfig:
    if path is None:
        return default_config()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, str(path))


def _fmt(values) -> str:
    return " ".join(repr(v) if isinstance(v, float) else str(v) for v in values)


def dump_config(cfg: SimulationConfig) -> str:
    """Effective configuration in the same format; parse_config(dump_config(c)) == c."""
    lines = [
        "[grid]",
        f"extent = {_fmt(cfg.extent)}",
        f"nodes = {_fmt(cfg.nodes)}",
        "",
        "[species]",
        f"diff = {_fmt(cfg.diff)}",
        f"eps = {cfg.eps!r}",
        f"init = {cfg.initial.kind}",
    ]
    lines += [f"a{i} = {_fmt(row)}" for i, row in enumerate(cfg.initial.species, 1)]
    lines += [
        "",
        "[time]",
        f"horizon = {cfg.horizon!r}",
        f"dt_init = {cfg.dt_init!r}",
        f"dt_max = {cfg.dt_max!r}",
        f"safety = {cfg.safety!r}",
        f"max_steps = {cfg.max_steps}",
        "",
        "[checks]",
        f"enabled = {' '.join(cfg.checks)}",
        f"linear_tol = {cfg.linear_tol!r}",
        f"entropy_tol = {cfg.entropy_tol!r}",
        "",
        "[output]",
        f"snapshots = {cfg.snapshots}",
    ]
    return "\n".join(lines) + "\n"
