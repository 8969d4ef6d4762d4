"""Experiment configuration: JSON files validated against a fixed schema.

A config names one experiment, its problem parameters, a list of solvers
with their settings and where to write results.  Validation happens before
any computation; unknown keys are rejected with the path of the offending
field, and JSON syntax errors report line and column.
"""

import copy
import json

import jsonschema

from .errors import ReviError

__all__ = ["ConfigError", "EXPERIMENTS", "SOLVER_NAMES", "METRICS", "default_config",
           "load_config", "parse_config", "validate_config"]

EXPERIMENTS = ("box_simplex", "erm", "synthetic")

SOLVER_NAMES = {
    "box_simplex": ("alg1", "alg2", "alg3", "nonadaptive_eg", "classical_eg"),
    "erm": ("alg1", "alg2", "alg3", "nonadaptive_eg", "classical_eg", "mirror_descent"),
    "synthetic": ("alg1", "alg2", "alg3", "nonadaptive_eg", "classical_eg", "mirror_descent"),
}

METRICS = {
    "box_simplex": ("gap",),
    "erm": ("objective", "suboptimality"),
    "synthetic": ("bregman_to_solution", "theoretical_bound", "uniform_bound"),
}


class ConfigError(ReviError, ValueError):
    """Invalid configuration; the CLI maps it to exit code 2."""


_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}
_SEEDS = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}
_OPT_POS = {"anyOf": [_POS, {"type": "null"}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_PROBLEM = {
    "box_simplex": _obj({
        "n": _POS_INT,
        "mu_pairs": {"type": "array", "minItems": 1,
                     "items": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2}},
        "seeds": _SEEDS,
        "entropy_scale": _OPT_POS,
    }, required=("n", "mu_pairs", "seeds")),
    "erm": _obj({
        "n": _POS_INT, "s": _POS_INT, "m": _POS_INT,
        "lams": {"type": "array", "items": _POS, "minItems": 1},
        "distribution": {"enum": ["exponential", "cauchy"]},
        "seeds": _SEEDS,
        "gamma": _OPT_POS,
        "mu_mode": {"enum": ["relative", "euclidean"]},
    }, required=("n", "s", "m", "lams", "seeds")),
    "synthetic": _obj({
        "n": _POS_INT, "mu": _POS, "L": _POS,
        "seeds": _SEEDS,
        "deltas": {"type": "array", "items": _NONNEG, "minItems": 1},
    }, required=("n", "mu", "L", "seeds")),
}

_SOLVER_COMMON = {"name": {"type": "string"}, "max_iters": _POS_INT}
_ADAPTIVE = dict(_SOLVER_COMMON, L0=_POS, max_trials_per_iter=_POS_INT,
                 stop_tol={"anyOf": [_NONNEG, {"type": "null"}]})
_SOLVER = {
    "alg1": _obj(_ADAPTIVE, required=("name",)),
    "alg2": _obj(dict(_ADAPTIVE, delta={"anyOf": [_NONNEG, {"type": "null"}]}), required=("name",)),
    "alg3": _obj(dict(_ADAPTIVE, delta={"anyOf": [_NONNEG, {"type": "null"}]}), required=("name",)),
    "nonadaptive_eg": _obj(dict(_SOLVER_COMMON, L=_OPT_POS, mu=_OPT_POS), required=("name",)),
    "classical_eg": _obj(dict(_SOLVER_COMMON, step=_OPT_POS), required=("name",)),
    "mirror_descent": _obj(dict(_SOLVER_COMMON), required=("name",)),
}

_TOP = _obj({
    "experiment": {"enum": list(EXPERIMENTS)},
    "problem": {"type": "object"},
    "solvers": {"type": "array", "minItems": 1, "items": {"type": "object"}},
    "output_dir": {"type": "string", "minLength": 1},
    "metrics": {"type": "array", "items": {"type": "string"}, "minItems": 1},
    "plot": _obj({"enabled": {"type": "boolean"}, "log_y": {"type": "boolean"},
                  "width": {"type": "integer", "minimum": 100},
                  "height": {"type": "integer", "minimum": 100}}),
    "record_wall_time": {"type": "boolean"},
}, required=("experiment", "problem", "solvers"))

_PROBLEM_DEFAULTS = {
    "box_simplex": {"entropy_scale": None},
    "erm": {"distribution": "exponential", "gamma": None, "mu_mode": "relative"},
    "synthetic": {"deltas": [0.0]},
}
_SOLVER_DEFAULTS = {
    "alg1": {"L0": 1.0, "max_iters": 100, "max_trials_per_iter": 60, "stop_tol": None},
    "alg2": {"L0": 1.0, "max_iters": 100, "max_trials_per_iter": 60, "stop_tol": None,
             "delta": None},
    "alg3": {"L0": 1.0, "max_iters": 100, "max_trials_per_iter": 60, "stop_tol": None,
             "delta": None},
    "nonadaptive_eg": {"max_iters": 100, "L": None, "mu": None},
    "classical_eg": {"max_iters": 100, "step": None},
    "mirror_descent": {"max_iters": 100},
}
_PLOT_DEFAULTS = {"enabled": True, "log_y": True, "width": 640, "height": 420}


def _path(prefix, error):
    parts = list(prefix) + list(error.absolute_path)
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _check(instance, schema, prefix=()):
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(instance),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        lines = [f"{_path(prefix, e)}: {e.message}" for e in errors]
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines))


def validate_config(cfg):
    """Validate a parsed config and return a copy with defaults filled in."""
    _check(cfg, _TOP)
    exp = cfg["experiment"]
    _check(cfg["problem"], _PROBLEM[exp], ("problem",))
    out = copy.deepcopy(cfg)
    out["problem"] = {**_PROBLEM_DEFAULTS[exp], **cfg["problem"]}
    solvers = []
    seen = set()
    for i, s in enumerate(cfg["solvers"]):
        name = s.get("name")
        if name not in SOLVER_NAMES[exp]:
            raise ConfigError(f"invalid config:\n  solvers[{i}].name: {name!r} is not one of "
                              f"{list(SOLVER_NAMES[exp])} for experiment {exp!r}")
        _check(s, _SOLVER[name], ("solvers", i))
        if name in seen:
            raise ConfigError(f"invalid config:\n  solvers[{i}].name: duplicate solver {name!r}")
        seen.add(name)
        solvers.append({**_SOLVER_DEFAULTS[name], **s})
    out["solvers"] = solvers
    metrics = cfg.get("metrics", list(METRICS[exp]))
    for i, m in enumerate(metrics):
        if m not in METRICS[exp]:
            raise ConfigError(f"invalid config:\n  metrics[{i}]: {m!r} is not one of "
                              f"{list(METRICS[exp])}")
    out["metrics"] = list(metrics)
    out["plot"] = {**_PLOT_DEFAULTS, **cfg.get("plot", {})}
    out.setdefault("output_dir", f"runs/{exp}")
    out.setdefault("record_wall_time", False)
    return out


def parse_config(text):
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    return validate_config(cfg)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def default_config(experiment):
    """Settings of the published experiments (iteration budgets are our own)."""
    if experiment == "box_simplex":
        cfg = {
            "experiment": "box_simplex",
            "problem": {"n": 200, "mu_pairs": [[1e-2, 1e-2], [1e-6, 1e-2]], "seeds": [0],
                        "entropy_scale": None},
            "solvers": [{"name": "alg1", "L0": 1.0, "max_iters": 500},
                        {"name": "nonadaptive_eg", "L": None, "max_iters": 500},
                        {"name": "classical_eg", "step": None, "max_iters": 500}],
            "metrics": ["gap"],
        }
    elif experiment == "erm":
        cfg = {
            "experiment": "erm",
            "problem": {"n": 50, "s": 100, "m": 100, "lams": [1e-1, 1e-3],
                        "distribution": "exponential", "seeds": [0], "gamma": None,
                        "mu_mode": "relative"},
            "solvers": [{"name": "alg1", "L0": 1.0, "max_iters": 300},
                        {"name": "nonadaptive_eg", "L": None, "max_iters": 300},
                        {"name": "mirror_descent", "max_iters": 300}],
            "metrics": ["objective", "suboptimality"],
        }
    elif experiment == "synthetic":
        cfg = {
            "experiment": "synthetic",
            "problem": {"n": 20, "mu": 1.0, "L": 10.0, "seeds": [0],
                        "deltas": [0.0, 1e-3, 1e-2]},
            "solvers": [{"name": "alg1", "L0": 20.0, "max_iters": 200},
                        {"name": "alg2", "L0": 20.0, "max_iters": 200, "delta": None},
                        {"name": "alg3", "L0": 20.0, "max_iters": 200, "delta": None}],
            "metrics": ["bregman_to_solution", "theoretical_bound", "uniform_bound"],
        }
    else:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {list(EXPERIMENTS)}")
    cfg["output_dir"] = f"runs/{experiment}"
    cfg["plot"] = dict(_PLOT_DEFAULTS)
    cfg["record_wall_time"] = False
    return validate_config(cfg)
