"""JSON experiment configurations (schema version 1).

A configuration is a single JSON object::

    {
      "schema": 1,
      "label": "divcurl",
      "kind": "compcomp",                       # compcomp | optimal | parabolic
      "grid": [512, 512],                       # null for the counterexample (grid chosen by the family)
      "alpha": [1, 1],                          # omitted for parabolic runs
      "family": {"label": "divcurl", "params": {"k1": [1, 0], "k2": [0, 1], "profile": {...}}},
      "quadratic": "auto",                      # auto | identity | divcurl | [[...]]
      "constraint": "auto",                     # auto | none | divcurl
      "phi_bank": [{"type": "gaussian", "center": [0.45, 0.55], "width": 0.1, "label": "phi"}],
      "symbol_bank": ["one", "riesz:0"],
      "even_symbols": [],                       # parabolic runs only
      "r_schedule": [4, 8, 16, 32],
      "l_schedule": [],                         # optimal runs only
      "exponents": {"p": "inf", "q": "inf", "s_bar": null, "t": null, "mode": "diagnostic"},
      "tolerances": {},
      "output": "runs",
      "seed": 0
    }

Infinite exponents are written as the string ``"inf"``. Every problem found
while reading a configuration raises :class:`ConfigError` naming the field.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compcomp import (NONLINEARITY_LABELS, ExperimentReport, Tolerances, _default_directions, run_compcomp,
                       run_optimal_variant, run_parabolic_application)
from .grid import Grid
from .hdist import DifferentialConstraint, QuadraticForm, TestBank
from .profiles import CompactBump, ConstantProfile, GaussianBump
from .sequences import (FAMILY_LABELS, AliasingError, concentration_family, divcurl_pair, oscillation_family,
                        paper_counterexample_family, stack_families)
from .symbols import symbol_from_label

__all__ = ["CONFIG_SCHEMA", "KINDS", "ConfigError", "ExperimentConfig", "load_config", "run_experiment"]

CONFIG_SCHEMA = 1
KINDS = ("compcomp", "optimal", "parabolic")
PROFILE_TYPES = ("gaussian", "compact", "constant")

_KEYS = {"schema", "label", "kind", "grid", "alpha", "family", "quadratic", "constraint", "phi_bank",
         "symbol_bank", "even_symbols", "r_schedule", "l_schedule", "exponents", "tolerances", "output", "seed",
         "description"}

_FAMILY_PARAMS = {
    "oscillation": {"profile", "direction", "phase", "p"},
    "concentration": {"profile", "center", "p"},
    "counterexample": {"x0", "n"},
    "divcurl": {"k1", "k2", "profile"},
    "parabolic-pair": {"a", "profile", "tau", "k", "g", "u_mean"},
}


class ConfigError(ValueError):
    """Malformed configuration; the message starts with the offending field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.field = where


def _number(x, where, allow_inf=False) -> float:
    if isinstance(x, str) and allow_inf and x.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        what = 'a number or "inf"' if allow_inf else "a number"
        raise ConfigError(where, f"expected {what}, got {x!r}")
    x = float(x)
    if not math.isfinite(x) and not (allow_inf and x == math.inf):
        raise ConfigError(where, "must be finite")
    return x


def _int_vector(x, where, length=None) -> tuple:
    if not isinstance(x, (list, tuple)) or not x:
        raise ConfigError(where, "expected a nonempty list of integers")
    if any(isinstance(v, bool) or not isinstance(v, int) for v in x):
        raise ConfigError(where, f"expected integers, got {x!r}")
    if length is not None and len(x) != length:
        raise ConfigError(where, f"expected {length} entries, got {len(x)}")
    return tuple(int(v) for v in x)


def _float_vector(x, where, length=None) -> tuple:
    if not isinstance(x, (list, tuple)) or not x:
        raise ConfigError(where, "expected a nonempty list of numbers")
    if length is not None and len(x) != length:
        raise ConfigError(where, f"expected {length} entries, got {len(x)}")
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(x))


def _schedule(x, where, required=True) -> list:
    if x is None or x == []:
        if required:
            raise ConfigError(where, "schedule is required")
        return []
    if not isinstance(x, list):
        raise ConfigError(where, "expected a list")
    vals = [_number(v, f"{where}[{i}]") for i, v in enumerate(x)]
    if any(v <= 0 for v in vals):
        raise ConfigError(where, "entries must be positive")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(where, f"must be strictly increasing, got {x}")
    return vals


def _profile(spec, where, dim):
    if not isinstance(spec, dict):
        raise ConfigError(where, "expected an object with a 'type'")
    kind = spec.get("type")
    allowed = {"gaussian": {"center", "width", "amplitude"}, "compact": {"center", "radius", "amplitude"},
               "constant": {"value"}}
    if kind not in allowed:
        raise ConfigError(f"{where}.type", f"unknown profile type {kind!r}; choose from {PROFILE_TYPES}")
    extra = set(spec) - allowed[kind] - {"type", "label"}
    if extra:
        raise ConfigError(where, f"unknown keys {sorted(extra)}")
    label = spec.get("label")
    if label is not None and not isinstance(label, str):
        raise ConfigError(f"{where}.label", "must be a string")
    if kind == "constant":
        return ConstantProfile(_number(spec.get("value", 1.0), f"{where}.value"), dim, label or "const")
    if "center" not in spec:
        raise ConfigError(f"{where}.center", "required")
    center = _float_vector(spec["center"], f"{where}.center", dim)
    amp = _number(spec.get("amplitude", 1.0), f"{where}.amplitude")
    if kind == "gaussian":
        width = _number(spec.get("width", 0.06), f"{where}.width")
        if width <= 0:
            raise ConfigError(f"{where}.width", "must be positive")
        return GaussianBump(center, width, amp, label or "gauss")
    radius = _number(spec.get("radius", 0.25), f"{where}.radius")
    try:
        return CompactBump(center, radius, amp, label or "bump")
    except ValueError as exc:
        raise ConfigError(f"{where}.radius", str(exc)) from None


def _symbol(label, where, parity=None):
    if not isinstance(label, str):
        raise ConfigError(where, "symbol labels are strings")
    try:
        sym = symbol_from_label(label)
    except (KeyError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None
    if parity is not None and sym.parity != parity:
        raise ConfigError(where, f"symbol {label!r} is not {parity}")
    return sym


def _exponents(spec, where, kind) -> dict:
    spec = dict(spec or {})
    extra = set(spec) - {"p", "q", "p_bar", "s_bar", "t", "mode"}
    if extra:
        raise ConfigError(where, f"unknown keys {sorted(extra)}")
    mode = spec.get("mode", "diagnostic")
    if mode not in ("theorem", "diagnostic"):
        raise ConfigError(f"{where}.mode", "must be 'theorem' or 'diagnostic'")
    out = {"mode": mode}
    for k in ("p", "q", "p_bar", "s_bar", "t"):
        v = spec.get(k)
        out[k] = None if v is None else _number(v, f"{where}.{k}", allow_inf=True)
        if out[k] is not None and out[k] < 1:
            raise ConfigError(f"{where}.{k}", "exponents are at least 1")
    if mode == "theorem":
        p, q = out["p"], out["q"]
        if p is None or q is None:
            raise ConfigError(where, "theorem mode needs both p and q")
        inv = lambda x: 0.0 if math.isinf(x) else 1.0 / x  # noqa: E731
        s = inv(p) + inv(q)
        if kind == "optimal" and s > 1 + 1e-15:
            raise ConfigError(where, f"1/p + 1/q = {s:g} exceeds 1")
        if kind != "optimal" and s >= 1:
            raise ConfigError(where, f"1/p + 1/q = {s:g} must be below 1")
        if out["p_bar"] is not None and not 1 < out["p_bar"] < p:
            raise ConfigError(f"{where}.p_bar", "must lie strictly between 1 and p")
        if out["s_bar"] is not None:
            if not 1 < out["s_bar"] < 1 / s:
                raise ConfigError(f"{where}.s_bar", f"must lie strictly between 1 and pq/(p+q) = {1 / s:g}")
            if out["t"] is not None and out["t"] < 1 / (1 - 1 / out["s_bar"]):
                raise ConfigError(f"{where}.t", "must be at least the conjugate of s_bar")
            if out["t"] is not None and inv(out["t"]) + s >= 1:
                raise ConfigError(f"{where}.t", "1/t + 1/p + 1/q must be below 1")
    return out


def _encode(x):
    """JSON-safe copy with infinities spelled ``"inf"``."""
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class ExperimentConfig:
    """Validated configuration. ``raw`` keeps the normalised JSON echo written into reports."""

    label: str
    kind: str
    grid: tuple | None
    alpha: tuple | None
    family: str
    params: dict
    quadratic: object
    constraint: str
    phi_bank: list
    symbol_bank: list
    even_symbols: list
    r_schedule: list
    l_schedule: list
    exponents: dict
    tolerances: Tolerances
    output: str
    seed: int
    raw: dict = field(repr=False, default_factory=dict)

    @classmethod
    def from_dict(cls, d) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config", "top level must be a JSON object")
        extra = set(d) - _KEYS
        if extra:
            raise ConfigError("config", f"unknown keys {sorted(extra)}")
        if d.get("schema") != CONFIG_SCHEMA:
            raise ConfigError("schema", f"expected {CONFIG_SCHEMA}, got {d.get('schema')!r}")
        label = d.get("label")
        if not isinstance(label, str) or not label or "/" in label:
            raise ConfigError("label", "a nonempty string without '/' is required")
        kind = d.get("kind")
        if kind not in KINDS:
            raise ConfigError("kind", f"expected one of {KINDS}, got {kind!r}")

        fam = d.get("family")
        if not isinstance(fam, dict) or "label" not in fam:
            raise ConfigError("family", "expected an object with 'label' and 'params'")
        if set(fam) - {"label", "params"}:
            raise ConfigError("family", f"unknown keys {sorted(set(fam) - {'label', 'params'})}")
        flabel = fam["label"]
        if flabel not in FAMILY_LABELS:
            raise ConfigError("family.label", f"unknown family {flabel!r}; choose from {FAMILY_LABELS}")
        params = fam.get("params", {}) or {}
        if not isinstance(params, dict):
            raise ConfigError("family.params", "expected an object")
        extra = set(params) - _FAMILY_PARAMS[flabel]
        if extra:
            raise ConfigError("family.params", f"unknown keys {sorted(extra)} for family {flabel!r}")
        if (kind == "parabolic") != (flabel == "parabolic-pair"):
            raise ConfigError("kind", f"kind {kind!r} cannot run family {flabel!r}")

        grid = d.get("grid")
        if flabel == "counterexample":
            if grid is not None and len(_int_vector(grid, "grid")) != 1:
                raise ConfigError("grid", "the counterexample lives on a one-dimensional grid")
        else:
            if grid is None:
                raise ConfigError("grid", "required")
        grid = None if grid is None else _int_vector(grid, "grid")
        if grid is not None and any(n < 4 or n & (n - 1) for n in grid):
            raise ConfigError("grid", f"each size must be a power of two >= 4, got {grid}")
        dim = 1 if flabel == "counterexample" else len(grid)
        if flabel == "divcurl" and dim != 2:
            raise ConfigError("grid", "the div-curl family is two-dimensional")

        alpha = d.get("alpha")
        if kind == "parabolic":
            if alpha is not None:
                raise ConfigError("alpha", "parabolic runs fix alpha = (1, 2, ..., 2)")
        else:
            alpha = _float_vector(alpha if alpha is not None else [1] * dim, "alpha", dim)
            if any(a <= 0 for a in alpha):
                raise ConfigError("alpha", "orders must be positive")

        quadratic = d.get("quadratic", "auto")
        if isinstance(quadratic, list):
            try:
                quadratic = np.array(quadratic, dtype=float)
            except (TypeError, ValueError):
                raise ConfigError("quadratic", "matrix entries must be numbers") from None
            if quadratic.ndim != 2 or quadratic.shape[0] != quadratic.shape[1]:
                raise ConfigError("quadratic", "expected a square matrix")
            if not np.allclose(quadratic, quadratic.T):
                raise ConfigError("quadratic", "matrix must be symmetric")
        elif quadratic not in ("auto", "identity", "divcurl"):
            raise ConfigError("quadratic", "expected 'auto', 'identity', 'divcurl' or a matrix")
        constraint = d.get("constraint", "auto")
        if constraint not in ("auto", "none", "divcurl"):
            raise ConfigError("constraint", "expected 'auto', 'none' or 'divcurl'")
        if constraint == "divcurl" and flabel != "divcurl":
            raise ConfigError("constraint", "the div-curl constraint needs the divcurl family")

        phis = d.get("phi_bank")
        if not isinstance(phis, list) or not phis:
            raise ConfigError("phi_bank", "a nonempty list of profiles is required")
        phi_bank = [_profile(p, f"phi_bank[{i}]", dim) for i, p in enumerate(phis)]
        labels = [p.label for p in phi_bank]
        if len(set(labels)) != len(labels):
            raise ConfigError("phi_bank", f"labels must be unique, got {labels}")
        syms = d.get("symbol_bank", ["one"])
        if not isinstance(syms, list) or not syms:
            raise ConfigError("symbol_bank", "a nonempty list of symbol labels is required")
        for i, s in enumerate(syms):
            _symbol(s, f"symbol_bank[{i}]")
        evens = d.get("even_symbols", []) or []
        if not isinstance(evens, list):
            raise ConfigError("even_symbols", "expected a list")
        if evens and kind != "parabolic":
            raise ConfigError("even_symbols", "only used by parabolic runs")
        for i, s in enumerate(evens):
            _symbol(s, f"even_symbols[{i}]", parity="even")

        r_schedule = _schedule(d.get("r_schedule"), "r_schedule")
        l_schedule = _schedule(d.get("l_schedule"), "l_schedule", required=(kind == "optimal"))
        if l_schedule and kind != "optimal":
            raise ConfigError("l_schedule", "only used by optimal runs")
        exponents = _exponents(d.get("exponents"), "exponents", kind)
        try:
            tolerances = Tolerances.from_dict(d.get("tolerances"))
        except (TypeError, ValueError) as exc:
            raise ConfigError("tolerances", str(exc)) from None
        output = d.get("output", "runs")
        if not isinstance(output, str) or not output:
            raise ConfigError("output", "expected a directory path")
        seed = d.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("seed", "expected a nonnegative integer")

        cfg = cls(label, kind, grid, alpha, flabel, params, quadratic, constraint, phi_bank, list(syms),
                  list(evens), r_schedule, l_schedule, exponents, tolerances, output, seed)
        _check_family_params(cfg)
        raw = _encode(copy.deepcopy(d))
        raw.setdefault("quadratic", "auto")
        raw.setdefault("constraint", "auto")
        raw.setdefault("seed", 0)
        raw.setdefault("output", "runs")
        cfg.raw = raw
        return cfg

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return ExperimentConfig.from_dict(data)


def _check_family_params(cfg: ExperimentConfig) -> None:
    p, w = cfg.params, "family.params"
    dim = 1 if cfg.family == "counterexample" else len(cfg.grid)
    if cfg.family in ("oscillation", "concentration", "divcurl", "parabolic-pair") and "profile" in p:
        _profile(p["profile"], f"{w}.profile", dim)
    if cfg.family == "oscillation":
        if "profile" not in p:
            raise ConfigError(f"{w}.profile", "required")
        _int_vector(p.get("direction"), f"{w}.direction", dim)
        if p.get("phase", "cosine") not in ("cosine", "exponential"):
            raise ConfigError(f"{w}.phase", "must be 'cosine' or 'exponential'")
        _number(p.get("p", "inf"), f"{w}.p", allow_inf=True)
    elif cfg.family == "concentration":
        if "profile" not in p:
            raise ConfigError(f"{w}.profile", "required")
        _float_vector(p.get("center"), f"{w}.center", dim)
        _number(p.get("p", 2.0), f"{w}.p", allow_inf=True)
    elif cfg.family == "counterexample":
        _number(p.get("x0", 0.5), f"{w}.x0")
        if p.get("n") is not None:
            n = _int_vector([p["n"]], f"{w}.n")[0]
            if cfg.grid is not None and cfg.grid != (n,):
                raise ConfigError("grid", f"grid {list(cfg.grid)} disagrees with family n={n}")
    elif cfg.family == "divcurl":
        _int_vector(p.get("k1"), f"{w}.k1", 2)
        _int_vector(p.get("k2"), f"{w}.k2", 2)
    elif cfg.family == "parabolic-pair":
        a = p.get("a")
        if a is None:
            raise ConfigError(f"{w}.a", "required")
        if not isinstance(a, list) or not all(isinstance(row, list) for row in a):
            raise ConfigError(f"{w}.a", "expected a square matrix of numbers")
        for i, row in enumerate(a):
            _float_vector(row, f"{w}.a[{i}]", len(a))
        if len(a) != dim - 1:
            raise ConfigError(f"{w}.a", f"expected a {dim - 1}x{dim - 1} matrix for a {dim}-dimensional grid")
        if "profile" not in p:
            raise ConfigError(f"{w}.profile", "required")
        _number(p.get("tau", 0.25), f"{w}.tau")
        if p.get("k") is not None:
            _int_vector(p["k"], f"{w}.k", dim - 1)
        g = p.get("g", "linear:1")
        if not isinstance(g, str) or g.partition(":")[0] not in {n.partition(":")[0] for n in NONLINEARITY_LABELS}:
            raise ConfigError(f"{w}.g", f"unknown nonlinearity {g!r}")
        _number(p.get("u_mean", 0.5), f"{w}.u_mean")


def _families(cfg: ExperimentConfig):
    """``(u_fam, v_fam, Q, constraint)`` for non-parabolic kinds."""
    p, w = cfg.params, "family.params"
    grid = Grid(cfg.grid) if cfg.grid is not None else None
    dim = 1 if cfg.family == "counterexample" else len(cfg.grid)
    try:
        if cfg.family == "oscillation":
            fam = oscillation_family(grid, _profile(p["profile"], f"{w}.profile", dim), tuple(p["direction"]),
                                     phase=p.get("phase", "cosine"),
                                     p=_number(p.get("p", "inf"), f"{w}.p", allow_inf=True))
            u = v = fam
        elif cfg.family == "concentration":
            fam = concentration_family(grid, _profile(p["profile"], f"{w}.profile", dim), tuple(p["center"]),
                                       p=_number(p.get("p", 2.0), f"{w}.p", allow_inf=True))
            u = v = fam
        elif cfg.family == "counterexample":
            n = p.get("n") if p.get("n") is not None else (cfg.grid[0] if cfg.grid else None)
            fam = paper_counterexample_family(cfg.r_schedule, x0=float(p.get("x0", 0.5)), n=n)
            u = v = fam
        else:
            prof = _profile(p["profile"], f"{w}.profile", dim) if "profile" in p else None
            a, b = divcurl_pair(grid, tuple(p["k1"]), tuple(p["k2"]), prof)
            u = v = stack_families("divcurl", a, b)
    except AliasingError as exc:
        raise ConfigError("r_schedule", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("family.params", str(exc)) from None

    n = u.n_components
    if isinstance(cfg.quadratic, np.ndarray):
        if cfg.quadratic.shape != (n, n):
            raise ConfigError("quadratic", f"expected a {n}x{n} matrix for family {cfg.family!r}")
        Q = QuadraticForm(cfg.quadratic)
    elif cfg.quadratic == "divcurl" or (cfg.quadratic == "auto" and cfg.family == "divcurl"):
        if n != 4:
            raise ConfigError("quadratic", "the div-curl form needs the four-component divcurl family")
        Q = QuadraticForm.divcurl(2)
    else:
        Q = QuadraticForm.identity(n)
    if cfg.constraint == "divcurl" or (cfg.constraint == "auto" and cfg.family == "divcurl"):
        constraint = DifferentialConstraint.stack(DifferentialConstraint.divergence(2, 0, 4),
                                                  DifferentialConstraint.curl2d(2, 4))
    else:
        constraint = DifferentialConstraint.none(n, u.grid.dim)
    # aliasing and support checks on the finest member before any numerics
    try:
        u.member(cfg.r_schedule[-1])
    except AliasingError as exc:
        raise ConfigError("r_schedule", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("family.params", str(exc)) from None
    return u, v, Q, constraint


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Build the families and banks described by ``cfg`` and run the matching driver."""
    if cfg.kind == "parabolic":
        p = cfg.params
        grid = Grid(cfg.grid)
        dim = len(cfg.grid)
        profile = _profile(p["profile"], "family.params.profile", dim)
        bank = TestBank.from_profiles(grid, cfg.phi_bank, cfg.symbol_bank)
        try:
            return run_parabolic_application(
                grid, [list(map(float, row)) for row in p["a"]], profile, bank, cfg.even_symbols, cfg.r_schedule,
                g=p.get("g", "linear:1"), u_mean=float(p.get("u_mean", 0.5)), tau=float(p.get("tau", 0.25)),
                k=None if p.get("k") is None else tuple(p["k"]), tolerances=cfg.tolerances, label=cfg.label,
                config=cfg.to_dict())
        except AliasingError as exc:
            raise ConfigError("r_schedule", str(exc)) from None

    u, v, Q, constraint = _families(cfg)
    bank = TestBank.from_profiles(u.grid, cfg.phi_bank, cfg.symbol_bank)
    dirs = _default_directions(u.grid.dim, seed=cfg.seed)
    common = dict(tolerances=cfg.tolerances, label=cfg.label, config=cfg.to_dict(), xi_samples=dirs)
    if cfg.kind == "compcomp":
        return run_compcomp(u, v, Q, constraint, bank, cfg.alpha, cfg.r_schedule, **common)
    return run_optimal_variant(u, v, Q, constraint, bank, cfg.alpha, cfg.r_schedule, cfg.l_schedule, **common)
