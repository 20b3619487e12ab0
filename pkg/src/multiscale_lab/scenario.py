"""Scenario and study files: parsing, validation and serialisation.

A scenario is a YAML mapping::

    name: underdamped
    model: oscillator
    output: {directory: underdamped, cadence: 1}
    params: {...}

A study wraps a base scenario and sweeps one parameter::

    name: pendulum-k
    study: {parameter: k, values: [100.0, 1000.0, 10000.0], metric: max_angle_error}
    base: {...scenario...}

Validation collects every problem, each prefixed by its field path, before
anything is run.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

__all__ = [
    "MODELS",
    "Scenario",
    "StudySpec",
    "ScenarioError",
    "parse_scenario",
    "parse_study",
    "scenario_from_dict",
    "study_from_dict",
    "serialize_scenario",
    "serialize_study",
    "validate_params",
    "get_path",
    "set_path",
]

MODELS = ("oscillator", "pendulum", "sorption1d", "sorption1d-compare", "sorption2d", "sw-network", "euler-eigen")
SCHEMES_1D = ("explicit-euler", "implicit-euler", "crank-nicolson")
ODE_SCHEMES = ("explicit-euler", "rk4", "implicit-euler", "crank-nicolson")
POTENTIALS = ("lennard-jones", "gaussian-well", "two-wall-gaussian", "square-well", "none")


class ScenarioError(ValueError):
    """Validation failure carrying every error message."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    params: dict
    output_dir: str
    cadence: int = 1

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "model": self.model,
            "output": {"directory": self.output_dir, "cadence": self.cadence},
            "params": copy.deepcopy(self.params),
        }


@dataclass(frozen=True)
class StudySpec:
    name: str
    parameter: str
    values: tuple
    metric: str
    base: Scenario

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "study": {"parameter": self.parameter, "values": list(self.values), "metric": self.metric},
            "base": self.base.to_dict(),
        }


def get_path(d: dict, dotted: str):
    cur = d
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise KeyError(dotted)
        cur = cur[part]
    return cur


def set_path(d: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    cur = d
    for part in parts[:-1]:
        cur = cur.setdefault(part, {})
    cur[parts[-1]] = value


# --------------------------------------------------------------------------
# field checks


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, msg: str):
        self.errors.append(f"{path}: {msg}")

    def mapping(self, d, key, path, required=True):
        if not isinstance(d, dict) or key not in d:
            if required:
                self.fail(f"{path}.{key}", "required mapping is missing")
            return None
        v = d[key]
        if not isinstance(v, dict):
            self.fail(f"{path}.{key}", "must be a mapping")
            return None
        return v

    def seq(self, d, key, path, required=True, min_len=1):
        if not isinstance(d, dict) or key not in d:
            if required:
                self.fail(f"{path}.{key}", "required list is missing")
            return None
        v = d[key]
        if not isinstance(v, list):
            self.fail(f"{path}.{key}", "must be a list")
            return None
        if len(v) < min_len:
            self.fail(f"{path}.{key}", f"needs at least {min_len} entries")
            return None
        return v

    def number(self, d, key, path, required=True, gt=None, ge=None, le=None, integer=False, msg=None):
        """Check (and coerce in place) a numeric field; returns the value or None."""
        p = f"{path}.{key}"
        if not isinstance(d, dict) or key not in d:
            if required:
                self.fail(p, "required field is missing")
            return None
        v = d[key]
        if isinstance(v, bool):
            self.fail(p, "must be a number")
            return None
        if isinstance(v, str):
            try:
                v = float(v)
            except ValueError:
                self.fail(p, f"must be a number, got {v!r}")
                return None
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(p, f"must be a finite number, got {v!r}")
            return None
        if integer:
            if float(v) != int(v):
                self.fail(p, f"must be an integer, got {v}")
                return None
            v = int(v)
        else:
            v = float(v)
        d[key] = v
        bad = (gt is not None and not v > gt) or (ge is not None and not v >= ge) or (le is not None and not v <= le)
        if bad:
            if msg is None:
                parts = [f"> {gt}" if gt is not None else None, f">= {ge}" if ge is not None else None,
                         f"<= {le}" if le is not None else None]
                msg = "must be " + " and ".join(p_ for p_ in parts if p_)
            self.fail(p, f"{msg} (got {v})")
            return None
        return v

    def choice(self, d, key, path, options, required=True, default=None):
        p = f"{path}.{key}"
        if not isinstance(d, dict) or key not in d:
            if required:
                self.fail(p, "required field is missing")
            return default
        v = d[key]
        if v not in options:
            self.fail(p, f"must be one of {', '.join(map(str, options))}, got {v!r}")
            return None
        return v

    def string(self, d, key, path, required=True):
        p = f"{path}.{key}"
        if not isinstance(d, dict) or key not in d:
            if required:
                self.fail(p, "required field is missing")
            return None
        if not isinstance(d[key], str) or not d[key]:
            self.fail(p, "must be a non-empty string")
            return None
        return d[key]


def _check_profile_1d(ck: _Checker, d, path):
    prof = ck.mapping(d, "c0", path)
    if prof is None:
        return
    p = f"{path}.c0"
    kind = ck.choice(prof, "kind", p, ("uniform", "linear", "gaussian", "cosine"))
    if kind == "uniform":
        ck.number(prof, "value", p, ge=0)
    elif kind == "linear":
        ck.number(prof, "a", p)
        ck.number(prof, "b", p)
    elif kind == "gaussian":
        ck.number(prof, "center", p)
        ck.number(prof, "width", p, gt=0)
        ck.number(prof, "amplitude", p, ge=0)
        ck.number(prof, "base", p, required=False, ge=0)
    elif kind == "cosine":
        ck.number(prof, "mean", p)
        ck.number(prof, "amplitude", p)
        ck.number(prof, "wavenumber", p)


def _check_profile_2d(ck: _Checker, d, path):
    prof = ck.mapping(d, "c0", path)
    if prof is None:
        return
    p = f"{path}.c0"
    kind = ck.choice(prof, "kind", p, ("uniform", "radial-gaussian", "gaussian"))
    if kind == "uniform":
        ck.number(prof, "value", p, ge=0)
    elif kind in ("radial-gaussian", "gaussian"):
        c = ck.seq(prof, "center", p, required=False, min_len=2)
        if c is not None and (len(c) != 2 or not all(isinstance(v, (int, float)) for v in c)):
            ck.fail(f"{p}.center", "must be two numbers")
        if kind == "radial-gaussian":
            ck.number(prof, "radius", p, ge=0)
        ck.number(prof, "width", p, gt=0)
        ck.number(prof, "amplitude", p, ge=0)
        ck.number(prof, "base", p, required=False, ge=0)


def _check_times(ck: _Checker, d, key, path, required=True):
    ts = ck.seq(d, key, path, required=required)
    if ts is None:
        return None
    out = []
    for i, t in enumerate(ts):
        if isinstance(t, str):
            try:
                t = float(t)
            except ValueError:
                pass
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not t > 0:
            ck.fail(f"{path}.{key}[{i}]", f"must be a positive time, got {t!r}")
            return None
        out.append(float(t))
    if out != sorted(out):
        ck.fail(f"{path}.{key}", "times must be increasing")
    d[key] = out
    return out


def _validate_oscillator(ck, p, path):
    ck.number(p, "t_end", path, gt=0)
    scheme = ck.choice(p, "scheme", path, ODE_SCHEMES + ("analytic",), required=False, default="rk4")
    if scheme != "analytic":
        ck.number(p, "dt", path, gt=0)
    ck.number(p, "samples", path, required=False, gt=1, integer=True)
    cases = ck.seq(p, "cases", path)
    for i, c in enumerate(cases or []):
        cp = f"{path}.cases[{i}]"
        if not isinstance(c, dict):
            ck.fail(cp, "must be a mapping")
            continue
        ck.string(c, "name", cp)
        ck.number(c, "m", cp, gt=0, msg="mass must be positive")
        ck.number(c, "k", cp, ge=0, msg="spring constant must be >= 0")
        ck.number(c, "gamma", cp, ge=0, msg="damping must be >= 0")
        ck.number(c, "x0", cp)
        ck.number(c, "v0", cp)


def _validate_pendulum(ck, p, path):
    for key in ("m", "L", "k"):
        ck.number(p, key, path, gt=0)
    ck.number(p, "g", path, required=False, gt=0)
    ck.number(p, "theta0_deg", path, ge=-180, le=180)
    ck.number(p, "t_end", path, gt=0)
    ck.number(p, "dt", path, required=False, gt=0)
    ck.choice(p, "start", path, ("natural", "balanced"), required=False)


def _validate_potential(ck, d, path):
    pot = ck.mapping(d, "potential", path)
    if pot is None:
        return None
    pp = f"{path}.potential"
    tag = ck.choice(pot, "tag", pp, POTENTIALS)
    ck.number(pot, "eps", pp, gt=0, msg="epsilon must be positive")
    ck.number(pot, "L", pp, required=False, gt=0, msg="cutoff L must be positive")
    if tag in ("lennard-jones", "square-well"):
        ck.number(pot, "phi", pp, ge=0)
    if tag in ("gaussian-well", "two-wall-gaussian"):
        for key in ("a1", "b1", "a2", "b2"):
            ck.number(pot, key, pp, ge=0)
        if tag == "gaussian-well":
            ck.number(pot, "x0", pp, ge=0, le=1)
    return tag


def _validate_sorption1d(ck, p, path):
    _validate_potential(ck, p, path)
    ck.number(p, "D", path, gt=0, msg="diffusivity must be positive")
    ck.choice(p, "models", path, ("full", "multiscale", "both"))
    ck.choice(p, "scheme", path, SCHEMES_1D)
    ck.number(p, "dt", path, gt=0)
    _check_times(ck, p, "output_times", path)
    ck.number(p, "cells_per_eps", path, required=False, gt=1, integer=True)
    ck.number(p, "n_quad", path, required=False, gt=1, integer=True)
    ms = ck.mapping(p, "multiscale", path, required=False)
    if ms is not None:
        mp = f"{path}.multiscale"
        if "cells" in ms:
            ck.number(ms, "cells", mp, gt=1, integer=True)
        elif "h" in ms:
            ck.number(ms, "h", mp, gt=0, le=0.5)
        else:
            ck.fail(mp, "give 'cells' or 'h'")
    _check_profile_1d(ck, p, path)


def _validate_compare(ck, p, path):
    ck.number(p, "D", path, gt=0, msg="diffusivity must be positive")
    ck.number(p, "phi", path, ge=0)
    ck.number(p, "L", path, required=False, gt=0)
    eps = ck.seq(p, "eps", path)
    for i, e in enumerate(eps or []):
        ck.number({"v": e}, "v", f"{path}.eps[{i}]", gt=0, msg="epsilon must be positive")
    if eps:
        p["eps"] = [float(e) for e in eps if not isinstance(e, bool) and _is_num(e)]
    ck.choice(p, "scheme", path, SCHEMES_1D)
    ck.number(p, "dt", path, gt=0)
    ck.number(p, "cells_per_eps", path, gt=1, integer=True)
    ck.number(p, "multiscale_cells", path, gt=1, integer=True)
    ck.choice(p, "reduced_origin", path, ("layer-edge", "wall"), required=False)
    _check_times(ck, p, "output_times", path)
    _check_profile_1d(ck, p, path)


def _is_num(v) -> bool:
    try:
        float(v)
        return True
    except (TypeError, ValueError):
        return False


def _validate_sorption2d(ck, p, path):
    shapes = ck.seq(p, "shapes", path, min_len=0)
    for i, s in enumerate(shapes or []):
        sp_ = f"{path}.shapes[{i}]"
        if not isinstance(s, dict):
            ck.fail(sp_, "must be a mapping")
            continue
        kind = ck.choice(s, "kind", sp_, ("circle", "square"))
        c = ck.seq(s, "center", sp_, min_len=2)
        if c is not None and (len(c) != 2 or not all(_is_num(v) and not isinstance(v, bool) for v in c)):
            ck.fail(f"{sp_}.center", "must be two numbers")
        elif c is not None:
            s["center"] = [float(v) for v in c]
        if kind == "circle":
            ck.number(s, "radius", sp_, gt=0)
        elif kind == "square":
            ck.number(s, "half_width", sp_, gt=0)
    ck.number(p, "n_cells", path, gt=3, integer=True)
    ck.number(p, "D", path, gt=0, msg="diffusivity must be positive")
    ck.number(p, "M", path, ge=0, msg="adsorption length must be >= 0")
    ck.choice(p, "scheme", path, SCHEMES_1D)
    ck.number(p, "dt", path, gt=0)
    _check_times(ck, p, "output_times", path)
    ck.choice(p, "oracle", path, ("none", "radial"), required=False)
    ck.number(p, "oracle_cells", path, required=False, gt=1, integer=True)
    _check_profile_2d(ck, p, path)


def _validate_sw(ck, p, path):
    ck.number(p, "g", path, required=False, gt=0)
    ck.number(p, "cfl", path, required=False, gt=0, le=1)
    ck.number(p, "t_end", path, gt=0)
    ck.choice(p, "check", path, ("none", "exact-riemann", "single-channel", "split"), required=False)
    net = ck.mapping(p, "network", path)
    if net is None:
        return
    # structural checks are delegated to the network builder, which collects every problem
    from .network import NetworkConfigError, build_network

    try:
        build_network(copy.deepcopy(net), float(p.get("g", 9.81)) if _is_num(p.get("g", 9.81)) else 9.81,
                      path=f"{path}.network")
    except NetworkConfigError as exc:
        ck.errors.extend(exc.errors)
    except (ValueError, TypeError, KeyError) as exc:
        ck.fail(f"{path}.network", str(exc))


def _validate_euler(ck, p, path):
    states = ck.seq(p, "states", path)
    for i, s in enumerate(states or []):
        sp_ = f"{path}.states[{i}]"
        if not isinstance(s, dict):
            ck.fail(sp_, "must be a mapping")
            continue
        ck.number(s, "rho", sp_, gt=0, msg="density must be positive")
        ck.number(s, "u", sp_)
        ck.number(s, "p", sp_, required=False)
        ck.number(s, "a2", sp_)


_VALIDATORS = {
    "oscillator": _validate_oscillator,
    "pendulum": _validate_pendulum,
    "sorption1d": _validate_sorption1d,
    "sorption1d-compare": _validate_compare,
    "sorption2d": _validate_sorption2d,
    "sw-network": _validate_sw,
    "euler-eigen": _validate_euler,
}


def validate_params(model: str, params: dict, path: str = "params") -> list[str]:
    """All validation errors for a parameter block (the block is normalised in place)."""
    ck = _Checker()
    if model not in _VALIDATORS:
        return [f"model: unknown model tag {model!r}; expected one of {', '.join(MODELS)}"]
    if not isinstance(params, dict):
        return [f"{path}: must be a mapping"]
    _VALIDATORS[model](ck, params, path)
    return ck.errors


def scenario_from_dict(data: Any, where: str = "") -> Scenario:
    errors = []
    prefix = f"{where}: " if where else ""
    if not isinstance(data, dict):
        raise ScenarioError([f"{prefix}scenario must be a mapping"])
    data = copy.deepcopy(data)
    name = data.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name: required non-empty string")
    model = data.get("model")
    if model not in MODELS:
        errors.append(f"model: unknown model tag {model!r}; expected one of {', '.join(MODELS)}")
    out = data.get("output", {}) or {}
    if not isinstance(out, dict):
        errors.append("output: must be a mapping")
        out = {}
    directory = out.get("directory", name)
    if not isinstance(directory, str) or not directory or Path(directory).is_absolute() or ".." in Path(directory).parts:
        errors.append("output.directory: must be a relative path inside the output root")
    cadence = out.get("cadence", 1)
    if isinstance(cadence, bool) or not isinstance(cadence, int) or cadence < 1:
        errors.append("output.cadence: must be an integer >= 1")
    params = data.get("params")
    if not isinstance(params, dict):
        errors.append("params: required mapping is missing")
    elif model in MODELS:
        errors.extend(validate_params(model, params))
    unknown = set(data) - {"name", "model", "output", "params"}
    if unknown:
        errors.append(f"unknown top-level keys: {', '.join(sorted(unknown))}")
    if errors:
        raise ScenarioError([prefix + e for e in errors])
    return Scenario(name, model, params, directory, cadence)


def parse_scenario(path) -> Scenario:
    """Read and validate a scenario file; raises ``ScenarioError`` listing every problem."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError([f"{path}: cannot read file ({exc.strerror})"]) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError([f"{path}: invalid YAML ({exc})"]) from exc
    return scenario_from_dict(data, str(path))


def study_from_dict(data: Any, where: str = "") -> StudySpec:
    prefix = f"{where}: " if where else ""
    if not isinstance(data, dict):
        raise ScenarioError([f"{prefix}study file must be a mapping"])
    errors = []
    name = data.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name: required non-empty string")
    st = data.get("study")
    base = None
    if not isinstance(st, dict):
        errors.append("study: required mapping is missing")
        st = {}
    param = st.get("parameter")
    if not isinstance(param, str) or not param:
        errors.append("study.parameter: required string (dotted path into params)")
    values = st.get("values")
    if not isinstance(values, list) or len(values) < 2:
        errors.append("study.values: at least 2 sweep values are required")
        values = []
    elif not all(_is_num(v) and not isinstance(v, bool) for v in values):
        errors.append("study.values: every value must be a number")
        values = []
    metric = st.get("metric")
    if not isinstance(metric, str) or not metric:
        errors.append("study.metric: required string")
    try:
        base = scenario_from_dict(data.get("base"))
    except ScenarioError as exc:
        errors.extend(f"base.{e}" for e in exc.errors)
    if base is not None and isinstance(param, str) and param:
        try:
            get_path(base.params, param)
        except KeyError:
            errors.append(f"study.parameter: {param!r} is not a field of base.params")
        for v in values:
            trial = copy.deepcopy(base.params)
            set_path(trial, param, float(v))
            errs = validate_params(base.model, trial)
            if errs:
                errors.append(f"study.values: value {v} is invalid ({errs[0]})")
    if errors:
        raise ScenarioError([prefix + e for e in errors])
    return StudySpec(name, param, tuple(float(v) for v in values), metric, base)


def parse_study(path) -> StudySpec:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ScenarioError([f"{path}: cannot read file ({exc.strerror})"]) from exc
    except yaml.YAMLError as exc:
        raise ScenarioError([f"{path}: invalid YAML ({exc})"]) from exc
    return study_from_dict(data, str(path))


def serialize_scenario(s: Scenario) -> str:
    return yaml.safe_dump(s.to_dict(), sort_keys=False)


def serialize_study(s: StudySpec) -> str:
    return yaml.safe_dump(s.to_dict(), sort_keys=False)
