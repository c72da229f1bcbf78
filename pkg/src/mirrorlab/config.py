"""Run configuration: INI-style ``key = value`` files with sections.

Numeric values may be arithmetic expressions over ``pi``, ``e``, ``sqrt``,
``log``, ``exp`` and, once the parameter source is resolved, ``xi`` plus the
helpers ``seed(n)`` (= n pi + 1/xi), ``x2n(n)`` (polished force maximizer) and
``xstar(n)`` (well bottom). Lists are comma separated or ``linspace(a, b, n)``.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import potential
from .dynamics import Kind, Scenario, State, Tolerances, Treatment
from .params import Cantilever, Laser, NondimParams, PhysicalParams, cantilever_pipeline, nondimensionalize

__all__ = ["ConfigError", "RunConfig", "SCHEMA", "load", "evaluate", "parse_list", "figure_config_path"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (CLI exit code 2)."""


# section -> allowed keys; "*" accepts any key
SCHEMA = {
    "scenario": {"kind", "treatment", "trap_center", "well"},
    "params": {"xi", "Omega", "Gamma", "omega_ho", "x_E"},
    "physical": {"chi0", "M0", "k_N0", "g0", "gamma", "k_ho", "q_E"},
    "cantilever": {
        "length", "width", "thickness", "spring_constant", "omega1", "damping_rate",
        "reflectivity", "thinning", "g0", "chi0", "q_E",
    },
    "laser": {"wavelength", "max_power"},
    "initial": {"x", "v", "tau0"},
    "run": {"tau_end", "tol_rel", "tol_abs", "samples", "tau_min", "factor"},
    "output": {"dir", "name", "plot"},
    "potential": {"xi", "x_min", "x_max", "n", "n_max"},
    "modes": {"k", "chi0", "q_min", "q_max", "n", "n_max"},
    "sweep": {"xi", "Omega", "Gamma", "omega_ho", "v0"},
    "figure": {"*"},
}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_BASE_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}
_BASE_FUNCS = {"sqrt": math.sqrt, "log": math.log, "exp": math.exp, "atan": math.atan}


def evaluate(text, names=None, funcs=None):
    """Evaluate a restricted arithmetic expression."""
    names = {**_BASE_NAMES, **(names or {})}
    funcs = {**_BASE_FUNCS, **(funcs or {})}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ConfigError(f"unknown name {node.id!r} in {text!r}")
            return float(names[node.id])
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
            if node.func.id not in funcs:
                raise ConfigError(f"unknown function {node.func.id!r} in {text!r}")
            return float(funcs[node.func.id](*[ev(a) for a in node.args]))
        raise ConfigError(f"unsupported expression {text!r}")

    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse {text!r}: {exc.msg}") from None
    try:
        return ev(tree)
    except (ZeroDivisionError, OverflowError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot evaluate {text!r}: {exc}") from None


def parse_list(text, names=None, funcs=None):
    """``"1, 2, 3"`` or ``"linspace(a, b, n)"`` -> list of floats (empty string -> [])."""
    text = str(text).strip()
    if not text:
        return []
    if text.startswith("linspace(") and text.endswith(")"):
        parts = [p.strip() for p in text[len("linspace(") : -1].split(",")]
        if len(parts) != 3:
            raise ConfigError(f"linspace needs three arguments: {text!r}")
        a, b, n = (evaluate(p, names, funcs) for p in parts)
        if n < 0 or n != int(n):
            raise ConfigError(f"linspace count must be a non-negative integer: {text!r}")
        return [float(z) for z in np.linspace(a, b, int(n))]
    return [evaluate(p, names, funcs) for p in text.split(",") if p.strip()]


def _xi_funcs(xi):
    return {
        "seed": lambda n: n * math.pi + 1.0 / xi,
        "x2n": lambda n: potential.force_maximizer(xi, int(n)),
        "xstar": lambda n: potential.force_zero(xi, int(n)),
    }


def figure_config_path(name):
    """Locate a shipped figure config by file name (``fig11a.cfg``) or id (``11a``)."""
    stem = name[:-4] if name.endswith(".cfg") else name
    if stem[:1].isdigit():
        stem = "fig" + stem
    res = resources.files("mirrorlab") / "figure_configs" / f"{stem}.cfg"
    if not res.is_file():
        raise ConfigError(f"no shipped figure config named {name!r}")
    return Path(str(res))


@dataclass
class RunConfig:
    raw: configparser.ConfigParser
    source: str | None = None  # "params" | "physical" | "cantilever"
    nondim: NondimParams | None = None
    physical: PhysicalParams | None = None
    pipeline: object = None
    scenario: Scenario | None = None
    initial: State | None = None
    tau_end: float | None = None
    tol: Tolerances = field(default_factory=Tolerances)
    samples: int | None = None
    tau_min: float | None = None
    factor: float = 10.0
    out_dir: Path = Path(".")
    name: str | None = None
    plot: bool = False

    def get(self, section, key, default=None):
        if self.raw.has_option(section, key):
            return self.raw.get(section, key)
        return default

    def number(self, section, key, default=None, names=None):
        text = self.get(section, key)
        if text is None:
            return default
        return evaluate(text, self.names(names), self.funcs())

    def numbers(self, section, key, default=None):
        text = self.get(section, key)
        if text is None:
            return default
        return parse_list(text, self.names(), self.funcs())

    def names(self, extra=None):
        out = {}
        if self.nondim is not None:
            out.update(xi=self.nondim.xi, Omega=self.nondim.Omega)
        out.update(extra or {})
        return out

    def funcs(self):
        if self.nondim is not None and self.nondim.xi > 0:
            return _xi_funcs(self.nondim.xi)
        return {}

    def resolved_items(self):
        """Flattened ``section.key = value`` pairs for provenance headers (sorted)."""
        items = [(f"{s}.{k}", v) for s in self.raw.sections() for k, v in self.raw.items(s)]
        if self.nondim is not None:
            for k in ("xi", "Omega", "Gamma", "omega_ho", "x_E"):
                items.append((f"resolved.{k}", repr(getattr(self.nondim, k))))
        if self.initial is not None:
            items += [("resolved.x0", repr(self.initial.x)), ("resolved.v0", repr(self.initial.v))]
        if self.tau_end is not None:
            items.append(("resolved.tau_end", repr(self.tau_end)))
        items += [("resolved.tol_rel", repr(self.tol.rel)), ("resolved.tol_abs", repr(self.tol.abs))]
        return sorted(items)


def _read(path, sets):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (Omega vs omega_ho)
    if path is not None:
        p = Path(path)
        if not p.is_file():
            p = figure_config_path(str(path))
        try:
            with open(p, encoding="utf-8") as fh:
                cp.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"{p}: {exc}") from None
    for item in sets or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if "." in key:
            section, key = key.split(".", 1)
        else:
            owners = [s for s, keys in SCHEMA.items() if key in keys]
            if len(owners) != 1:
                raise ConfigError(f"--set key {key!r} is ambiguous or unknown; use section.key")
            section = owners[0]
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        allowed = SCHEMA[section]
        if "*" in allowed:
            continue
        for key in cp.options(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    return cp


def load(path=None, sets=(), overrides=None, need_params=True, need_scenario=False) -> RunConfig:
    """Parse, validate and resolve a configuration.

    ``overrides`` maps ``run`` keys (``tau_end``, ``tol_rel``, ``tol_abs``) or
    ``output.dir`` to values coming from dedicated CLI flags.
    """
    cp = _read(path, sets)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, k = key.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, k, str(value))
    rc = RunConfig(raw=cp)
    sources = [s for s in ("params", "physical", "cantilever") if cp.has_section(s)]
    if len(sources) > 1:
        raise ConfigError(f"exactly one parameter source allowed, found {sources}")
    if sources:
        rc.source = sources[0]
        try:
            _resolve_params(rc)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
    elif need_params:
        raise ConfigError("no parameter source: give [params], [physical] or [cantilever]+[laser]")
    try:
        run = "run"
        rc.tau_end = rc.number(run, "tau_end")
        rel = rc.number(run, "tol_rel", 1e-9)
        ab = rc.number(run, "tol_abs", 1e-12)
        rc.tol = Tolerances(rel, ab)
        samples = rc.number(run, "samples")
        rc.samples = int(samples) if samples is not None else None
        rc.tau_min = rc.number(run, "tau_min")
        rc.factor = rc.number(run, "factor", 10.0)
        rc.out_dir = Path(rc.get("output", "dir") or os.environ.get("MIRRORLAB_OUT") or ".")
        rc.name = rc.get("output", "name")
        rc.plot = (rc.get("output", "plot", "no") or "no").strip().lower() in ("1", "yes", "true", "on")
        if cp.has_section("scenario") and rc.nondim is not None:
            _resolve_scenario(rc)
        elif need_scenario:
            raise ConfigError("a [scenario] section and a parameter source are required")
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return rc


def _resolve_params(rc):
    cp = rc.raw
    if rc.source == "params":
        xi = rc.number("params", "xi")
        if xi is None:
            raise ConfigError("[params] needs xi")
        rc.nondim = NondimParams(xi=xi, Omega=1.0)  # provisional, so expressions can use xi
        values = {k: rc.number("params", k) for k in ("Omega", "Gamma", "omega_ho", "x_E")}
        rc.nondim = NondimParams(
            xi=xi,
            Omega=values["Omega"] if values["Omega"] is not None else 1.0,
            Gamma=values["Gamma"] or 0.0,
            omega_ho=values["omega_ho"] or 0.0,
            x_E=values["x_E"] or 0.0,
        )
        if values["Omega"] is None:
            cp.set("params", "Omega", "1  # default, irrelevant for RWA")
        return
    if rc.source == "physical":
        kw = {k: rc.number("physical", k) for k in SCHEMA["physical"]}
        missing = [k for k in ("chi0", "M0", "k_N0", "g0") if kw[k] is None]
        if missing:
            raise ConfigError(f"[physical] missing {missing}")
        kw = {k: v for k, v in kw.items() if v is not None}
        rc.physical = PhysicalParams(**kw)
    else:
        if not cp.has_section("laser"):
            raise ConfigError("[cantilever] needs a [laser] section")
        ckeys = ("length", "width", "thickness", "spring_constant", "omega1", "damping_rate", "reflectivity")
        c = {k: rc.number("cantilever", k) for k in ckeys}
        missing = [k for k in ckeys[:-1] if c[k] is None]
        if missing:
            raise ConfigError(f"[cantilever] missing {missing}")
        lz = {k: rc.number("laser", k) for k in ("wavelength", "max_power")}
        if lz["wavelength"] is None:
            raise ConfigError("[laser] needs wavelength")
        rc.pipeline = cantilever_pipeline(
            Cantilever(**c),
            Laser(**lz),
            g0=rc.number("cantilever", "g0"),
            chi0=rc.number("cantilever", "chi0"),
            q_E=rc.number("cantilever", "q_E", 0.0),
            thinning=rc.number("cantilever", "thinning", 0.01),
        )
        rc.physical = rc.pipeline.params
    if rc.physical.g0 is not None:
        rc.nondim = nondimensionalize(rc.physical)


def _resolve_scenario(rc):
    cp = rc.raw
    kind = (rc.get("scenario", "kind") or "radiation").strip().lower()
    treatment = (rc.get("scenario", "treatment") or "rwa").strip().lower()
    center = (rc.get("scenario", "trap_center") or "polished").strip().lower()
    try:
        kind, treatment = Kind(kind), Treatment(treatment)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    nd = rc.nondim
    if kind is Kind.HARMONIC and not cp.has_option("params", "x_E") and rc.source == "params":
        well = int(rc.number("scenario", "well", 4))
        sc = Scenario.build(kind, treatment, nd.xi, nd.Omega, nd.Gamma, nd.omega_ho, well=well, trap_center=center)
        rc.nondim = sc.params
    else:
        sc = Scenario(kind, treatment, nd, trap_center=center)
    rc.scenario = sc
    text = (rc.get("initial", "x") or "").strip()
    if text == "fixed_point" or (not text and kind is Kind.HARMONIC):
        from .analysis import harmonic_fixed_point

        if kind is not Kind.HARMONIC:
            raise ConfigError("initial x = fixed_point is only defined for the harmonic trap")
        x0, info = harmonic_fixed_point(sc)
        if x0 is None:
            raise ConfigError(info["diagnostic"])
    else:
        x0 = rc.number("initial", "x")
    if x0 is None:
        well = int(rc.number("scenario", "well", 4))
        x0 = well * math.pi + 1.0 / nd.xi if nd.xi > 0 else well * math.pi + 1.0
    rc.initial = State(rc.number("initial", "tau0", 0.0), x0, rc.number("initial", "v", 0.0))
