"""INI run configuration: parsing with strict key checking, validation and serialization."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .geometry import CATALOG, Surface, builtin_surface
from .material import MaterialParams


@dataclass(frozen=True)
class SurfaceConfig:
    name: str = "plate"
    params: tuple = ()
    domain: tuple = ()  # (x1 min, x1 max, x2 min, x2 max); empty for the catalog default
    mode: str = "analytic"
    eps: tuple = ()
    coeffs: tuple = ()  # ((i, j, c), ...) for polynomial graphs

    def build(self) -> Surface:
        dom = None
        if self.domain:
            dom = ((self.domain[0], self.domain[1]), (self.domain[2], self.domain[3]))
        return builtin_surface(self.name, self.params, dom, self.mode, self.eps or None, self.coeffs)


@dataclass(frozen=True)
class RunOptions:
    seed: int = 0
    samples: int = 64
    tol: float | None = None
    threads: int = 1
    out: str = "out"


@dataclass(frozen=True)
class IntegrateOptions:
    h_list: tuple = (0.02, 0.01, 0.005)
    relative_h: bool = True  # h_list in units of the curvature scale 1/max|kappa|
    n_gauss_x3: int = 8
    n_cells: tuple = (4, 4)
    n_gauss_cell: int = 3
    amp_m: float = 0.05
    amp_q: float = 0.1
    slope_min: float = 6.3
    slope_max: float = 7.7


@dataclass(frozen=True)
class SolveOptions:
    n1: int = 9
    n2: int = 9
    clamp_sides: tuple = ("left",)
    stretch: float = 1.0  # clamped nodes placed at stretch * y0
    traction_sides: tuple = ()
    f_bar: tuple = (0.0, 0.0, 0.0)
    t_bar: tuple = (0.0, 0.0, 0.0)
    c_omega: tuple = (0.0, 0.0, 0.0)
    c_gamma: tuple = (0.0, 0.0, 0.0)
    max_iters: int = 2000
    gtol: float = 1e-10
    optimizer: str = "lbfgs"
    memory: int = 10
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    fd_step: float = 1e-6


@dataclass(frozen=True)
class CompareOptions:
    alpha_s: float = 5 / 6
    alpha_t: float = 7 / 10


@dataclass(frozen=True)
class RunConfig:
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    material: MaterialParams = field(default_factory=lambda: MaterialParams(mu=1.0, lam=1.0))
    run: RunOptions = field(default_factory=RunOptions)
    integrate: IntegrateOptions = field(default_factory=IntegrateOptions)
    solve: SolveOptions = field(default_factory=SolveOptions)
    compare: CompareOptions = field(default_factory=CompareOptions)


SECTIONS = {"surface": SurfaceConfig, "material": MaterialParams, "run": RunOptions,
            "integrate": IntegrateOptions, "solve": SolveOptions, "compare": CompareOptions}
_REQUIRED = {"material": ("mu", "lam")}


# ---------------------------------------------------------------------------
# value conversion


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _coeffs(text: str) -> tuple:
    out = []
    for term in filter(None, (t.strip() for t in text.split(";"))):
        i, j, c = term.split()
        out.append((int(i), int(j), float(c)))
    return tuple(out)


def _words(text: str) -> tuple:
    return tuple(w for w in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_SPECIAL = {
    ("surface", "params"): _floats, ("surface", "domain"): _floats, ("surface", "eps"): _floats,
    ("surface", "coeffs"): _coeffs, ("integrate", "h_list"): _floats,
    ("integrate", "n_cells"): lambda t: tuple(int(v) for v in _words(t)),
    ("solve", "clamp_sides"): _words, ("solve", "traction_sides"): _words,
    ("solve", "f_bar"): _floats, ("solve", "t_bar"): _floats,
    ("solve", "c_omega"): _floats, ("solve", "c_gamma"): _floats,
}


def _convert(section: str, f: dataclasses.Field, text: str):
    conv = _SPECIAL.get((section, f.name))
    if conv is not None:
        return conv(text)
    t = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", str(f.type))
    if t.startswith("float | None"):
        return None if text.strip().lower() in ("", "none") else float(text)
    if t == "float":
        return float(text)
    if t == "int":
        return int(text)
    if t == "bool":
        return _bool(text)
    return text.strip()


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(f"{i} {j} {c!r}" for i, j, c in value)
        return ", ".join(_format(v) for v in value)
    return str(value)


# ---------------------------------------------------------------------------


def _line_of(text: str, section: str, key: str) -> int:
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return n
    return 0


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",), strict=True)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        if lineno is None and getattr(exc, "errors", None):
            lineno = exc.errors[0][0]
        raise ConfigError(f"{source}:{lineno}: parse error: {exc.message.splitlines()[0]}") from None
    parts = {}
    for section in cp.sections():
        if section not in SECTIONS:
            n = _line_of_section(text, section)
            raise ConfigError(f"{source}:{n}: unknown section [{section}]")
        cls = SECTIONS[section]
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kw = {}
        for key, raw in cp.items(section):
            n = _line_of(text, section, key)
            if key not in fields:
                raise ConfigError(f"{source}:{n}: unknown key '{key}' in [{section}]")
            try:
                kw[key] = _convert(section, fields[key], raw)
            except ValueError as exc:
                raise ConfigError(f"{source}:{n}: {section}.{key}: {exc}") from None
        for req in _REQUIRED.get(section, ()):
            if req not in kw:
                raise ConfigError(f"{section}.{req} is required")
        parts[section] = kw
    if "material" not in parts:
        raise ConfigError("[material] section with mu and lam is required")
    try:
        cfg = RunConfig(**{s: SECTIONS[s](**kw) for s, kw in parts.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    validate(cfg)
    return cfg


def _line_of_section(text: str, section: str) -> int:
    for n, line in enumerate(text.splitlines(), 1):
        if line.strip() == f"[{section}]":
            return n
    return 0


def parse_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text(encoding="utf-8"), str(p))


def validate(cfg: RunConfig) -> None:
    def finite(section, obj):
        for f in dataclasses.fields(obj):
            v = getattr(obj, f.name)
            vals = v if isinstance(v, tuple) else (v,)
            for x in vals:
                flat = x if isinstance(x, tuple) else (x,)
                for y in flat:
                    if isinstance(y, float) and not math.isfinite(y):
                        raise ConfigError(f"{section}.{f.name} must be finite")

    for s in SECTIONS:
        finite(s, getattr(cfg, s))
    sc = cfg.surface
    if sc.name not in CATALOG:
        raise ConfigError(f"surface.name must be one of {', '.join(CATALOG)}")
    if sc.domain and len(sc.domain) != 4:
        raise ConfigError("surface.domain needs four numbers")
    if sc.eps and len(sc.eps) != 2:
        raise ConfigError("surface.eps needs two numbers")
    if sc.mode not in ("analytic", "fd"):
        raise ConfigError("surface.mode must be analytic or fd")
    try:
        sc.build()
    except Exception as exc:  # surface constructor errors carry the reason
        raise ConfigError(f"surface: {exc}") from None
    r = cfg.run
    if r.samples < 1:
        raise ConfigError("run.samples must be positive")
    if r.threads < 1:
        raise ConfigError("run.threads must be positive")
    if r.tol is not None and r.tol <= 0:
        raise ConfigError("run.tol must be positive")
    if r.seed < 0:
        raise ConfigError("run.seed must be non-negative")
    it = cfg.integrate
    if not it.h_list or min(it.h_list) <= 0:
        raise ConfigError("integrate.h_list must hold positive thicknesses")
    if it.n_gauss_x3 < 6:
        raise ConfigError("integrate.n_gauss_x3 must be at least 6")
    if it.n_gauss_cell not in (2, 3):
        raise ConfigError("integrate.n_gauss_cell must be 2 or 3")
    if len(it.n_cells) != 2 or min(it.n_cells) < 1:
        raise ConfigError("integrate.n_cells needs two positive integers")
    sv = cfg.solve
    if sv.n1 < 2 or sv.n2 < 2:
        raise ConfigError("solve.n1 and solve.n2 must be at least 2")
    if not sv.clamp_sides:
        raise ConfigError("solve.clamp_sides must name at least one side")
    for name in ("f_bar", "t_bar", "c_omega", "c_gamma"):
        if len(getattr(sv, name)) != 3:
            raise ConfigError(f"solve.{name} needs three components")
    for s in sv.clamp_sides + sv.traction_sides:
        if s not in ("left", "right", "bottom", "top"):
            raise ConfigError(f"unknown side {s!r}")
    if sv.stretch <= 0:
        raise ConfigError("solve.stretch must be positive")
    if sv.optimizer not in ("lbfgs", "gradient_descent"):
        raise ConfigError("solve.optimizer must be lbfgs or gradient_descent")


def serialize(cfg: RunConfig) -> str:
    lines = []
    for section in SECTIONS:
        obj = getattr(cfg, section)
        lines.append(f"[{section}]")
        for f in dataclasses.fields(obj):
            lines.append(f"{f.name} = {_format(getattr(obj, f.name))}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: RunConfig) -> str:
    """Hash of everything that can change results; the output directory and thread count are left out."""
    neutral = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, out="", threads=1))
    return hashlib.sha256(serialize(neutral).encode("utf-8")).hexdigest()[:16]
