"""Plain ``key = value`` run configuration.

Values are numbers or arithmetic expressions (``2*pi*40e9``), ``true`` /
``false``, ``none`` or bare words. A number may carry its documented unit
as a trailing token (``lambda_vac = 580e-9 m``); any other unit is an
error. ``#`` starts a comment.
"""

from __future__ import annotations

import ast
import hashlib
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Any, Mapping

from .instrument import InstrumentConfig
from .params import PhysicalParams

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # float | int | bool | word | path
    default: Any
    unit: str
    doc: str
    optional: bool = False
    choices: tuple = ()


_PHYSICAL = [
    Key("lambda_vac", "float", 580e-9, "m", "vacuum wavelength"),
    Key("n_L", "float", 1.33, "1", "refractive index of the dye solution"),
    Key("L0", "float", 2e-6, "m", "cavity length"),
    Key("q", "int", 7, "1", "longitudinal mode number"),
    Key("delta_omega", "float", 0.0, "rad/s", "detuning"),
    Key("T", "float", 300.0, "K", "temperature"),
    Key("N_bec", "float", 1e5, "1", "condensate photon number"),
    Key("g_tilde", "float", 1e-3, "1", "dimensionless interaction (default 1e-3 unless chi3 is set)", True),
    Key("chi3", "float", None, "m^2/V^2", "Kerr coefficient, alternative to g_tilde", True),
    Key("Omega0", "float", TWO_PI * 40e9, "rad/s", "trap frequency"),
    Key("gamma_net", "float", TWO_PI * 1e9, "rad/s", "net gain rate"),
    Key("kappa_broad", "float", None, "rad/s", "closed-model line half-width (default gamma_net)", True),
    Key("sigma_dye", "float", 2e-22, "m^2", "dye cross section"),
    Key("n_dye", "float", 1e24, "1/m^3", "dye number density"),
    Key("kappa_cav", "float", TWO_PI * 1e9, "rad/s", "cavity loss rate"),
]

_INSTRUMENT = [
    Key("f_obj", "float", 0.2, "m", "objective focal length"),
    Key("L_prop", "float", 0.3, "m", "objective to camera distance"),
    Key("d_slit", "float", 240e-6, "m", "slit width"),
    Key("M_y", "float", 75.0, "1", "telescope magnification"),
    Key("d_grating", "float", 1e-3 / 900, "m", "grating period"),
    Key("f_im", "float", 0.05, "m", "imaging lens focal length"),
    Key("px_momentum", "float", 180e-6, "m", "pixel size along k"),
    Key("px_energy", "float", 4e-6, "m", "pixel size along energy"),
    Key("bit_depth", "int", 12, "bit", "camera bit depth", choices=(8, 12, 16)),
    Key("full_well_fraction", "float", 1.0, "1", "grid peak as a fraction of full well"),
    Key("exposure", "float", 1.0, "1", "over-exposure factor (>1 saturates)"),
    Key("n_objective", "float", 1.0, "1", "index around the collection optics"),
    Key("delta_eps_override", "float", None, "rad/s", "replace the grating energy resolution", True),
]

_RUN = [
    Key("model", "word", "open", "", "spectrum model", choices=("open", "closed")),
    Key("lda", "bool", True, "", "closed model: integrate over the trap"),
    Key("local_bose", "bool", True, "", "closed model: position-dependent occupation"),
    Key("r_cut", "float", 1.0, "R_TF", "closed model: radial cutoff"),
    Key("quad_rtol", "float", 1e-4, "1", "closed model: quadrature tolerance"),
    Key("n_k", "int", 512, "1", "k samples"),
    Key("n_omega", "int", 1024, "1", "omega samples"),
    Key("k_max", "float", None, "1/m", "k half-range (default from mu and kappa)", True),
    Key("omega_max", "float", None, "rad/s", "omega half-range (default 5 xi(k_max))", True),
    Key("normalization", "word", "unit-max", "", "spectrum scaling", choices=("unit-max", "raw")),
    Key("grid_n", "int", 256, "1", "solver grid points per side"),
    Key("grid_extent", "float", None, "m", "solver box size (default 4 R_TF)", True),
    Key("dt", "float", None, "s", "solver time step", True),
    Key("solve_tol", "float", 1e-10, "1", "relative energy change at convergence"),
    Key("max_steps", "int", 50000, "1", "relaxation step limit"),
    Key("open_steps", "int", 0, "1", "real-time steps with gain after relaxation"),
    Key("mirror_profile", "path", None, "", "CSV grid of mirror displacement (m)", True),
    Key("out", "path", None, "", "output path (default pbec_<command>.<ext>)", True),
]

KEYS: dict[str, Key] = {k.name: k for k in _PHYSICAL + _INSTRUMENT + _RUN}
PHYSICAL_KEYS = tuple(k.name for k in _PHYSICAL)
INSTRUMENT_KEYS = tuple(k.name for k in _INSTRUMENT)

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi}


def safe_eval(text: str) -> float:
    """Evaluate an arithmetic expression over numbers and ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except SyntaxError:
        raise ValueError(f"cannot parse {text!r}") from None


def _convert(key: Key, raw: str):
    raw = raw.strip()
    if raw.lower() == "none":
        if not key.optional:
            raise ValueError(f"{key.name} is required")
        return None
    if key.kind == "bool":
        if raw.lower() not in ("true", "false"):
            raise ValueError(f"{key.name} must be true or false")
        return raw.lower() == "true"
    if key.kind == "word":
        if key.choices and raw not in key.choices:
            raise ValueError(f"{key.name} must be one of {', '.join(key.choices)}")
        return raw
    if key.kind == "path":
        return raw
    try:
        val = safe_eval(raw)
    except (ValueError, ZeroDivisionError, OverflowError):
        head, _, unit = raw.rpartition(" ")
        if not head:
            raise ValueError(f"{key.name}: cannot parse {raw!r}") from None
        if unit != key.unit:
            raise ValueError(f"{key.name}: unit {unit!r} given, expected {key.unit!r}") from None
        val = safe_eval(head)
    if key.kind == "int":
        if float(val) != int(val):
            raise ValueError(f"{key.name} must be an integer")
        val = int(val)
        if key.choices and val not in key.choices:
            raise ValueError(f"{key.name} must be one of {key.choices}")
        return val
    val = float(val)
    if not math.isfinite(val):
        raise ValueError(f"{key.name} must be finite")
    return val


@dataclass(frozen=True)
class RunConfig:
    values: Mapping[str, Any]
    lines: Mapping[str, int] = field(default_factory=dict, compare=False)

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def with_(self, **changes) -> "RunConfig":
        vals = dict(self.values)
        for k, v in changes.items():
            if k not in KEYS:
                raise ConfigError(f"unknown key {k!r}")
            vals[k] = v
        return _validated(vals, dict(self.lines))

    def physical(self) -> PhysicalParams:
        return PhysicalParams(**{k: self.values[k] for k in PHYSICAL_KEYS})

    def instrument(self) -> InstrumentConfig:
        return InstrumentConfig(**{k: self.values[k] for k in INSTRUMENT_KEYS})

    def emit(self) -> str:
        return emit_config(self)

    def sha256(self) -> str:
        return hashlib.sha256(emit_config(self).encode("utf-8")).hexdigest()


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_config(cfg: RunConfig) -> str:
    """Canonical text with every key; ``parse_config`` of it returns ``cfg``."""
    return "".join(f"{k} = {_fmt(cfg.values[k])}\n" for k in KEYS)


def _validated(vals: dict, lines: dict) -> RunConfig:
    def fail(msg, *names):
        line = next((lines[n] for n in names if n in lines), None)
        raise ConfigError(msg, line)

    for name in ("n_k", "n_omega", "grid_n", "max_steps"):
        if vals[name] < 1:
            fail(f"{name} must be positive", name)
    if vals["open_steps"] < 0:
        fail("open_steps must be >= 0", "open_steps")
    for name in ("r_cut", "quad_rtol", "solve_tol", "k_max", "omega_max", "grid_extent", "dt"):
        if vals[name] is not None and not vals[name] > 0:
            fail(f"{name} must be positive", name)
    cfg = RunConfig(vals, lines)
    for build, names in ((cfg.physical, PHYSICAL_KEYS), (cfg.instrument, INSTRUMENT_KEYS)):
        try:
            build()
        except ValueError as exc:
            msg = str(exc)
            culprits = [n for n in names if re.search(rf"\b{n}\b", msg)] or list(names)
            if "ambiguous" in msg:
                culprits = ["chi3", "g_tilde"]
            fail(msg, *culprits)
    return cfg


def parse_config(text: str) -> RunConfig:
    vals = {k.name: k.default for k in KEYS.values()}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        name, eq, value = body.partition("=")
        name = name.strip()
        if not eq or not name:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if name not in KEYS:
            raise ConfigError(f"unknown key {name!r}", lineno)
        if name in lines:
            raise ConfigError(f"{name} already set on line {lines[name]}", lineno)
        try:
            vals[name] = _convert(KEYS[name], value)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ConfigError(str(exc), lineno) from None
        lines[name] = lineno
    # the default interaction only applies when chi3 is not the source
    if vals["chi3"] is not None and "g_tilde" not in lines:
        vals["g_tilde"] = None
    return _validated(vals, lines)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def defaults_table() -> str:
    """Markdown table of every key, its default and unit."""
    rows = ["| key | default | unit | meaning |", "|---|---|---|---|"]
    for k in KEYS.values():
        d = _fmt(k.default)
        if k.choices:
            d += " (" + " / ".join(map(str, k.choices)) + ")"
        rows.append(f"| `{k.name}` | {d} | {k.unit} | {k.doc} |")
    return "\n".join(rows)
