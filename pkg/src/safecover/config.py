"""Scenario files and the built-in scenarios.

Scenario files are INI-style key/value sections::

    [scenario]
    name = square16
    n_vehicles = 16
    t_end = 120
    dt = 0.01
    mode = clipped          ; saturated | clipped | raw
    safety = on

    [domain]
    vertices = 0 0; 20 0; 20 20; 0 20   ; counter-clockwise, metres
    velocity = 0 0
    reference_time = 0

    [dynamics]
    v_max = 10
    u_max = 3

    [coverage]
    r_d = auto              ; or a number; auto = sqrt(area / n_vehicles)
    k_I = 1
    k_h = 1
    a = 1

    [safety]
    c_r = 2
    t_safety = 5

    [layout]
    kind = line             ; line | explicit
    spacing = 3
    offset = 5              ; distance below the domain when center is omitted
    center = 10 -5          ; optional
    direction = 1 0         ; optional
    states = 0 0 0 0; 3 0 0 0   ; explicit only: x y vx vy per vehicle

    [analysis]
    eps_v = 0.001
    tail = 5
    snapshots = 0 4.5 11 43

    [output]
    dir = out

Every key except ``vertices``, ``n_vehicles`` and the line/explicit
layout data has a default.
"""

from dataclasses import dataclass, field, fields, replace
import configparser
import math
import re

import numpy as np

from . import geom
from .errors import ParseError, ValidationError
from .potential import CoverageParams, r_d_heuristic
from .reachability import SafetyParams
from .sim import MODES, SimParams

DEFAULTS = {
    "dt": 0.01,
    "t_end": 120.0,
    "mode": "clipped",
    "v_max": 10.0,
    "u_max": 3.0,
    "k_I": 1.0,
    "k_h": 1.0,
    "a": 1.0,
    "c_r": 2.0,
    "t_safety": 5.0,
    "eps_v": 1e-3,
    "tail": 5.0,
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    vertices: tuple
    n_vehicles: int
    r_d: float
    layout: str = "line"
    line_center: tuple | None = None
    line_direction: tuple = (1.0, 0.0)
    line_spacing: float = 3.0
    line_offset: float = 5.0
    explicit_states: tuple = ()
    domain_velocity: tuple = (0.0, 0.0)
    reference_time: float = 0.0
    dt: float = DEFAULTS["dt"]
    t_end: float = DEFAULTS["t_end"]
    mode: str = DEFAULTS["mode"]
    safety_enabled: bool = True
    v_max: float = DEFAULTS["v_max"]
    u_max: float = DEFAULTS["u_max"]
    k_I: float = DEFAULTS["k_I"]
    k_h: float = DEFAULTS["k_h"]
    a: float = DEFAULTS["a"]
    c_r: float = DEFAULTS["c_r"]
    t_safety: float = DEFAULTS["t_safety"]
    eps_v: float = DEFAULTS["eps_v"]
    tail: float = DEFAULTS["tail"]
    snapshots: tuple = ()
    out_dir: str = "out"

    def domain(self):
        return geom.PolygonDomain(self.vertices, self.domain_velocity, self.reference_time)

    def sim_params(self):
        return SimParams(
            v_max=self.v_max,
            u_max=self.u_max,
            coverage=CoverageParams(self.r_d, self.k_I, self.k_h, self.a),
            safety=SafetyParams(self.c_r, self.u_max, self.t_safety),
            dt=self.dt,
            t_end=self.t_end,
            mode=self.mode,
            safety_enabled=self.safety_enabled,
        )

    def initial_states(self):
        """Initial positions and velocities, each of shape ``(N, 2)``."""
        if self.layout == "explicit":
            arr = np.array(self.explicit_states, dtype=float).reshape(-1, 4)
            return arr[:, :2].copy(), arr[:, 2:].copy()
        d = np.array(self.line_direction, dtype=float)
        d /= np.linalg.norm(d)
        if self.line_center is None:
            xmin, ymin, xmax, _ = self.domain().bounds(0.0)
            center = np.array([(xmin + xmax) / 2.0, ymin - self.line_offset])
        else:
            center = np.array(self.line_center, dtype=float)
        k = np.arange(self.n_vehicles) - (self.n_vehicles - 1) / 2.0
        p = center + k[:, None] * self.line_spacing * d
        return p, np.zeros_like(p)

    def with_overrides(self, **kw):
        return replace(self, **kw)


def validate(cfg):
    """Raise :class:`ValidationError` naming the first violated invariant."""
    if cfg.n_vehicles < 1:
        raise ValidationError("n_vehicles must be >= 1")
    if cfg.layout not in ("line", "explicit"):
        raise ValidationError(f"layout.kind must be 'line' or 'explicit', got {cfg.layout!r}")
    if cfg.layout == "explicit" and len(cfg.explicit_states) != cfg.n_vehicles:
        raise ValidationError(
            f"layout.states lists {len(cfg.explicit_states)} vehicles, n_vehicles is {cfg.n_vehicles}")
    if cfg.layout == "line":
        if not cfg.line_spacing > 0:
            raise ValidationError("layout.spacing must be positive")
        if np.linalg.norm(cfg.line_direction) == 0:
            raise ValidationError("layout.direction must be non-zero")
    if cfg.mode not in MODES:
        raise ValidationError(f"scenario.mode must be one of {MODES}")
    try:
        cfg.domain()
    except ValueError as exc:
        raise ValidationError(f"domain: {exc}") from None
    try:
        params = cfg.sim_params()
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    p, v = cfg.initial_states()
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
        raise ValidationError("initial states must be finite")
    if np.any(np.linalg.norm(v, axis=1) > params.v_max):
        raise ValidationError("initial speed exceeds v_max")
    if len(p) > 1:
        diff = p[:, None, :] - p[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        i, j = np.unravel_index(np.argmin(dist), dist.shape)
        if dist[i, j] <= cfg.c_r:
            raise ValidationError(
                f"unsafe initial condition: vehicles {min(i, j)} and {max(i, j)} are "
                f"{dist[i, j]:.3f} m apart (collision radius {cfg.c_r} m)")
    if not (cfg.eps_v > 0 and cfg.tail >= 0):
        raise ValidationError("analysis.eps_v must be positive and analysis.tail non-negative")
    return cfg


# ---------------------------------------------------------------- parsing

def _key_line(text, section, key):
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        m = re.match(r"\[(.+)\]", stripped)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", stripped, re.I):
            return lineno
    return None


class _Reader:
    def __init__(self, text, source):
        self.text = text
        self.source = source
        self.cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        self.cp.optionxform = str
        try:
            self.cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ParseError(f"{source}: {exc}") from None

    def fail(self, section, key, msg):
        line = _key_line(self.text, section, key)
        where = f"{self.source}:{line}" if line else self.source
        raise ParseError(f"{where}: [{section}] {key}: {msg}")

    def raw(self, section, key, default=None, required=False):
        if self.cp.has_option(section, key):
            return self.cp.get(section, key).strip()
        if required:
            raise ParseError(f"{self.source}: missing required key [{section}] {key}")
        return default

    def number(self, section, key, default=None, required=False):
        s = self.raw(section, key, required=required)
        if s is None:
            return default
        try:
            return float(s)
        except ValueError:
            self.fail(section, key, f"expected a number, got {s!r}")

    def integer(self, section, key, required=False):
        s = self.raw(section, key, required=required)
        try:
            return int(s)
        except (TypeError, ValueError):
            self.fail(section, key, f"expected an integer, got {s!r}")

    def vector(self, section, key, width, default=None, required=False):
        s = self.raw(section, key, required=required)
        if s is None:
            return default
        try:
            vals = tuple(float(x) for x in s.replace(",", " ").split())
        except ValueError:
            self.fail(section, key, f"expected {width} numbers, got {s!r}")
        if len(vals) != width:
            self.fail(section, key, f"expected {width} numbers, got {len(vals)}")
        return vals

    def numbers(self, section, key):
        s = self.raw(section, key, default="")
        try:
            return tuple(float(x) for x in s.replace(",", " ").split())
        except ValueError:
            self.fail(section, key, f"expected numbers, got {s!r}")

    def rows(self, section, key, width, required=False):
        s = self.raw(section, key, required=required)
        if s is None:
            return ()
        out = []
        for k, chunk in enumerate(c for c in s.split(";") if c.strip()):
            try:
                vals = tuple(float(x) for x in chunk.replace(",", " ").split())
            except ValueError:
                self.fail(section, key, f"entry {k}: expected numbers, got {chunk.strip()!r}")
            if len(vals) != width:
                self.fail(section, key, f"entry {k}: expected {width} numbers, got {len(vals)}")
            out.append(vals)
        return tuple(out)

    def flag(self, section, key, default):
        s = self.raw(section, key)
        if s is None:
            return default
        low = s.lower()
        if low in ("on", "true", "yes", "1"):
            return True
        if low in ("off", "false", "no", "0"):
            return False
        self.fail(section, key, f"expected on/off, got {s!r}")


def parse_scenario(text, source="<string>"):
    """Parse scenario text into a validated :class:`ScenarioConfig`."""
    r = _Reader(text, source)
    vertices = r.rows("domain", "vertices", 2, required=True)
    n = r.integer("scenario", "n_vehicles", required=True)
    r_d_raw = r.raw("coverage", "r_d", default="auto")
    if r_d_raw.lower() == "auto":
        if len(vertices) < 3:
            r.fail("domain", "vertices", "need at least 3 vertices")
        area = geom.shoelace(vertices)
        if area <= 0 or n < 1:
            raise ValidationError("r_d = auto needs a positive-area domain and n_vehicles >= 1")
        r_d = r_d_heuristic(area, n)
    else:
        r_d = r.number("coverage", "r_d")
    kind = r.raw("layout", "kind", default="line")
    kw = {}
    if kind == "explicit":
        kw["explicit_states"] = r.rows("layout", "states", 4, required=True)
    cfg = ScenarioConfig(
        name=r.raw("scenario", "name", default="scenario"),
        vertices=vertices,
        n_vehicles=n,
        r_d=r_d,
        layout=kind,
        line_center=r.vector("layout", "center", 2),
        line_direction=r.vector("layout", "direction", 2, default=(1.0, 0.0)),
        line_spacing=r.number("layout", "spacing", default=3.0),
        line_offset=r.number("layout", "offset", default=5.0),
        domain_velocity=r.vector("domain", "velocity", 2, default=(0.0, 0.0)),
        reference_time=r.number("domain", "reference_time", default=0.0),
        dt=r.number("scenario", "dt", DEFAULTS["dt"]),
        t_end=r.number("scenario", "t_end", DEFAULTS["t_end"]),
        mode=r.raw("scenario", "mode", default=DEFAULTS["mode"]),
        safety_enabled=r.flag("scenario", "safety", True),
        v_max=r.number("dynamics", "v_max", DEFAULTS["v_max"]),
        u_max=r.number("dynamics", "u_max", DEFAULTS["u_max"]),
        k_I=r.number("coverage", "k_I", DEFAULTS["k_I"]),
        k_h=r.number("coverage", "k_h", DEFAULTS["k_h"]),
        a=r.number("coverage", "a", DEFAULTS["a"]),
        c_r=r.number("safety", "c_r", DEFAULTS["c_r"]),
        t_safety=r.number("safety", "t_safety", DEFAULTS["t_safety"]),
        eps_v=r.number("analysis", "eps_v", DEFAULTS["eps_v"]),
        tail=r.number("analysis", "tail", DEFAULTS["tail"]),
        snapshots=r.numbers("analysis", "snapshots"),
        out_dir=r.raw("output", "dir", default="out"),
        **kw,
    )
    return validate(cfg)


def load_scenario(path):
    """Read a scenario file, or return a built-in scenario when ``path`` names one."""
    name = str(path)
    if name in builtin_names() or _BUILTIN_RE.fullmatch(name):
        return builtin(name)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text, source=name)


def _fmt(x):
    return repr(float(x))


def format_scenario(cfg):
    """Serialise a config; ``parse_scenario(format_scenario(c)) == c``."""
    rows = lambda seq: "; ".join(" ".join(_fmt(c) for c in row) for row in seq)
    lines = [
        "[scenario]",
        f"name = {cfg.name}",
        f"n_vehicles = {cfg.n_vehicles}",
        f"t_end = {_fmt(cfg.t_end)}",
        f"dt = {_fmt(cfg.dt)}",
        f"mode = {cfg.mode}",
        f"safety = {'on' if cfg.safety_enabled else 'off'}",
        "",
        "[domain]",
        f"vertices = {rows(cfg.vertices)}",
        f"velocity = {rows([cfg.domain_velocity])}",
        f"reference_time = {_fmt(cfg.reference_time)}",
        "",
        "[dynamics]",
        f"v_max = {_fmt(cfg.v_max)}",
        f"u_max = {_fmt(cfg.u_max)}",
        "",
        "[coverage]",
        f"r_d = {_fmt(cfg.r_d)}",
        f"k_I = {_fmt(cfg.k_I)}",
        f"k_h = {_fmt(cfg.k_h)}",
        f"a = {_fmt(cfg.a)}",
        "",
        "[safety]",
        f"c_r = {_fmt(cfg.c_r)}",
        f"t_safety = {_fmt(cfg.t_safety)}",
        "",
        "[layout]",
        f"kind = {cfg.layout}",
        f"spacing = {_fmt(cfg.line_spacing)}",
        f"offset = {_fmt(cfg.line_offset)}",
        f"direction = {rows([cfg.line_direction])}",
    ]
    if cfg.line_center is not None:
        lines.append(f"center = {rows([cfg.line_center])}")
    if cfg.layout == "explicit":
        lines.append(f"states = {rows(cfg.explicit_states)}")
    lines += [
        "",
        "[analysis]",
        f"eps_v = {_fmt(cfg.eps_v)}",
        f"tail = {_fmt(cfg.tail)}",
        f"snapshots = {' '.join(_fmt(s) for s in cfg.snapshots)}",
        "",
        "[output]",
        f"dir = {cfg.out_dir}",
        "",
    ]
    return "\n".join(lines)


def write_scenario(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_scenario(cfg))


# ---------------------------------------------------------------- built-ins

SQUARE_SIDE = 20.0
TRIANGLE_SIDE = 25.0 * math.sqrt(3.0) / 2.0
ARROW_VELOCITY = (0.3, 0.3)

# Arrowhead ("dart"): tip, upper barb, rear notch, lower barb in
# a frame pointing along +x.  Area = 10 * (30 - 7.5) = 225 m^2.
_ARROW_LOCAL = ((30.0, 0.0), (0.0, 10.0), (7.5, 0.0), (0.0, -10.0))
_ARROW_ORIGIN = (10.0, 10.0)


def _rotate(points, angle, origin):
    c, s = math.cos(angle), math.sin(angle)
    return tuple((origin[0] + c * x - s * y, origin[1] + s * x + c * y) for x, y in points)


def square_vertices(side=SQUARE_SIDE):
    return ((0.0, 0.0), (side, 0.0), (side, side), (0.0, side))


def triangle_vertices(side=TRIANGLE_SIDE):
    return ((0.0, 0.0), (side, 0.0), (side / 2.0, side * math.sqrt(3.0) / 2.0))


def arrow_vertices():
    """Arrowhead pointing along the domain velocity (45 degrees)."""
    return _rotate(_ARROW_LOCAL, math.pi / 4.0, _ARROW_ORIGIN)


# Gains and launch geometry chosen by tuning; see README "Built-in scenarios".
LINE_SPACING = 3.0
LINE_OFFSET = 10.0
BUILTIN_K_I = 3.0
BUILTIN_K_H = 1.0
BUILTIN_DAMPING = 0.3


def _base(name, vertices, n, **kw):
    area = geom.shoelace(vertices)
    kw.setdefault("line_spacing", LINE_SPACING)
    kw.setdefault("line_offset", LINE_OFFSET)
    return ScenarioConfig(name=name, vertices=vertices, n_vehicles=n,
                          r_d=r_d_heuristic(area, n), k_I=BUILTIN_K_I, k_h=BUILTIN_K_H,
                          a=BUILTIN_DAMPING, **kw)


def square_scenario(n=16):
    return _base(f"square{n}", square_vertices(), n, snapshots=(0.0, 4.5, 11.0, 43.0, 120.0))


def triangle_scenario(n=15):
    return _base(f"triangle{n}", triangle_vertices(), n, snapshots=(0.0, 5.0, 15.0, 120.0))


def arrow_scenario(n=9):
    # line perpendicular to the motion, centred on the arrow axis behind the notch
    axis = np.array(ARROW_VELOCITY) / np.linalg.norm(ARROW_VELOCITY)
    center = np.array(_ARROW_ORIGIN) - 8.0 * axis
    return _base(
        f"arrow{n}", arrow_vertices(), n,
        domain_velocity=ARROW_VELOCITY,
        line_center=(float(center[0]), float(center[1])),
        line_direction=(float(axis[1]), float(-axis[0])),
        t_end=90.0, tail=30.0, snapshots=(0.0, 9.0, 39.0, 69.0, 90.0),
    )


_FACTORIES = {"square": square_scenario, "triangle": triangle_scenario, "arrow": arrow_scenario}
_BUILTIN_RE = re.compile(r"(square|triangle|arrow)(\d+)")


def builtin_names():
    return ("square9", "square16", "square25", "triangle6", "triangle10", "triangle15", "arrow9")


def builtin(name):
    """Built-in scenario by name, e.g. ``square16`` or ``triangle10``."""
    m = _BUILTIN_RE.fullmatch(name)
    if not m:
        raise ValidationError(f"unknown built-in scenario {name!r}")
    return validate(_FACTORIES[m.group(1)](int(m.group(2))))
