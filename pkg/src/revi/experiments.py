"""Run grids of (problem instance x solver) cells and write CSV/SVG/manifest artifacts.

Every cell rebuilds its problem from the seed, so cells are independent and
may run on a thread pool.  Each cell writes its own CSV under ``cells/``;
per-instance CSVs are then merged in sorted cell-key order, which keeps the
merged files byte-identical across runs and thread counts.
"""

import csv
import io
import json
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from .config import ConfigError
from .errors import LineSearchError, ReviError
from .metrics import box_simplex_gap, erm_objective
from .problems import (box_simplex_start, erm_reference_solution, erm_start, make_box_simplex,
                       make_erm, make_synthetic_affine, with_radial_noise)
from .solvers import (AdaptiveConfig, DeltaConfig, solve_adaptive, solve_classical_eg,
                      solve_delta_additive, solve_delta_multiplicative, solve_mirror_descent,
                      solve_nonadaptive_eg, theoretical_bound, uniform_bound)
from .svg import line_chart

__all__ = ["CSV_COLUMNS", "Cell", "CellResult", "RunReport", "build_cells", "run_cell",
           "run_experiment", "thread_count", "read_trace_csv"]

CSV_COLUMNS = ("iter", "solver", "L_k", "trials", "oracle_calls", "metric_name",
               "metric_value", "wall_ms")


@dataclass
class Cell:
    key: str
    group: str
    experiment: str
    params: dict
    seed: int
    solver: dict


@dataclass
class CellResult:
    cell: Cell
    status: str
    rows: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    error: str = ""
    wall_time_s: float = 0.0


@dataclass
class RunReport:
    output_dir: str
    results: list
    csv_files: list
    svg_files: list
    manifest: str

    @property
    def ok(self):
        return all(r.status == "ok" for r in self.results)


def thread_count(env=None):
    """Worker threads from ``REVI_THREADS`` (default 1)."""
    env = os.environ if env is None else env
    raw = env.get("REVI_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"REVI_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"REVI_THREADS must be a positive integer, got {raw!r}")
    return n


def _g(v):
    return format(float(v), "g")


def build_cells(cfg):
    """Expand a validated config into cells, sorted by key."""
    exp, prob = cfg["experiment"], cfg["problem"]
    variants = []
    if exp == "box_simplex":
        for mu_y, mu_z in prob["mu_pairs"]:
            variants.append((f"mu_y={_g(mu_y)}_mu_z={_g(mu_z)}", {"mu_y": mu_y, "mu_z": mu_z}))
    elif exp == "erm":
        for lam in prob["lams"]:
            variants.append((f"lam={_g(lam)}", {"lam": lam}))
    else:
        for delta in prob["deltas"]:
            variants.append((f"delta={_g(delta)}", {"delta": delta}))
    cells = []
    for label, extra in variants:
        for seed in prob["seeds"]:
            group = f"{exp}_{label}_seed{seed}"
            for s in cfg["solvers"]:
                cells.append(Cell(key=f"{group}/{s['name']}", group=group, experiment=exp,
                                  params={**prob, **extra}, seed=int(seed), solver=dict(s)))
    return sorted(cells, key=lambda c: c.key)


def _setup(cell):
    """Problem, start point and metric functions of a cell."""
    p, exp, seed = cell.params, cell.experiment, cell.seed
    if exp == "box_simplex":
        inst, problem = make_box_simplex(p["n"], p["mu_y"], p["mu_z"], seed,
                                         entropy_scale=p.get("entropy_scale"))
        n = p["n"]
        metrics = {"gap": lambda x: box_simplex_gap(inst, x[:n], x[n:])}
        return problem, box_simplex_start(n, seed), metrics
    if exp == "erm":
        inst, problem = make_erm(p["n"], p["s"], p["m"], p["lam"], p["distribution"], seed,
                                 gamma=p.get("gamma"), mu_mode=p["mu_mode"])
        F_star = erm_objective(inst, erm_reference_solution(inst))
        problem.notes["reference_objective"] = F_star
        metrics = {"objective": lambda x: erm_objective(inst, x),
                   "suboptimality": lambda x: erm_objective(inst, x) - F_star}
        return problem, erm_start(p["n"]), metrics
    inst, problem = make_synthetic_affine(p["n"], p["mu"], p["L"], seed)
    if p["delta"] > 0:
        problem = with_radial_noise(problem, p["delta"], seed)
    return problem, problem.geometry.center(problem.Q), {}


def _solve(cell, problem, z0, metrics):
    s = dict(cell.solver)
    name = s.pop("name")
    iters = s["max_iters"]
    if name in ("alg1", "alg2", "alg3"):
        common = dict(L0=s["L0"], mu=problem.mu, max_iters=iters,
                      max_trials_per_iter=s["max_trials_per_iter"], stop_tol=s["stop_tol"])
        if name == "alg1":
            return solve_adaptive(problem, AdaptiveConfig(**common), z0, metrics,
                                  keep_iterates=False)
        delta = s["delta"]
        if delta is None:
            delta = cell.params.get("delta", 0.0)
        fn = solve_delta_additive if name == "alg2" else solve_delta_multiplicative
        return fn(problem, DeltaConfig(delta=delta, **common), z0, metrics, keep_iterates=False)
    if name == "nonadaptive_eg":
        return solve_nonadaptive_eg(problem, L=s["L"], mu=s["mu"], max_iters=iters, z0=z0,
                                    metrics=metrics, keep_iterates=False)
    if name == "classical_eg":
        return solve_classical_eg(problem, step=s["step"], max_iters=iters, z0=z0,
                                  metrics=metrics, keep_iterates=False)
    return solve_mirror_descent(problem, max_iters=iters, z0=z0, metrics=metrics,
                                keep_iterates=False)


def _bound_traces(cell, run):
    """Bound curves for the synthetic experiment, where the solution is known."""
    name = cell.solver["name"]
    if name not in ("alg1", "alg2", "alg3") or "bregman_to_solution" not in run.metrics:
        return {}
    noise = cell.params.get("delta", 0.0)
    if name == "alg1" and noise > 0:
        return {}  # the noiseless bound does not cover perturbed oracles
    delta = cell.solver.get("delta")
    delta = noise if delta is None else delta
    V0 = run.metrics["bregman_to_solution"].values[0]
    mu = float(cell.params["mu"])
    k = np.arange(run.n_iters + 1)
    out = {"theoretical_bound": theoretical_bound(run.L, mu, V0, name, delta)}
    if name in ("alg1", "alg3"):
        out["uniform_bound"] = uniform_bound(k, mu, cell.params["L"], V0, delta, name)
    return out


def _rows(cell, run, wanted, record_wall):
    traces = {n: t.values for n, t in run.metrics.items()}
    traces.update(_bound_traces(cell, run))
    solver = cell.solver["name"]
    rows = []
    for metric in wanted:
        if metric not in traces:
            continue
        for k, value in enumerate(traces[metric]):
            L_k = run.L0 if k == 0 else run.L[k - 1]
            trials = 0 if k == 0 else int(run.trials[k - 1])
            wall = f"{run.wall_ms[k]:.3f}" if record_wall else ""
            rows.append((k, solver, repr(float(L_k)), trials, int(run.oracle_calls[k]),
                         metric, repr(float(value)), wall))
    return rows


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def run_cell(cell, metrics, record_wall=False):
    """Run one cell; failures are captured in the result, never raised."""
    t0 = time.perf_counter()
    notes = {}
    try:
        problem, z0, fns = _setup(cell)
        notes = problem.notes
        fns = {m: f for m, f in fns.items() if m in metrics}
        run = _solve(cell, problem, z0, fns)
        rows = _rows(cell, run, metrics, record_wall)
        status, error = "ok", ""
    except LineSearchError as exc:
        rows = _rows(cell, exc.run, metrics, record_wall) if exc.run is not None else []
        status, error = "failed", f"{type(exc).__name__}: {exc}"
    except (ReviError, ValueError, ArithmeticError) as exc:
        rows, status, error = [], "failed", f"{type(exc).__name__}: {exc}"
    return CellResult(cell, status, rows, _jsonable(dict(notes)), error,
                      time.perf_counter() - t0)


def _write_csv(path, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_trace_csv(path):
    """Rows of a trace CSV as dicts with numeric fields converted."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        out = []
        for r in reader:
            out.append({"iter": int(r["iter"]), "solver": r["solver"], "L_k": float(r["L_k"]),
                        "trials": int(r["trials"]), "oracle_calls": int(r["oracle_calls"]),
                        "metric_name": r["metric_name"],
                        "metric_value": float(r["metric_value"]),
                        "wall_ms": float(r["wall_ms"]) if r["wall_ms"] else None})
        return out


def plot_rows(rows, metric, title="", log_y=True, width=640, height=420, label_prefix=""):
    series = {}
    for r in rows:
        if r["metric_name"] != metric:
            continue
        xs, ys = series.setdefault(label_prefix + r["solver"], ([], []))
        xs.append(r["iter"])
        ys.append(r["metric_value"])
    return line_chart(series, title=title, ylabel=metric, log_y=log_y, width=width,
                      height=height)


def run_experiment(cfg, threads=1):
    """Execute every cell of a validated config and write all artifacts."""
    out_dir = cfg["output_dir"]
    cell_dir = os.path.join(out_dir, "cells")
    os.makedirs(cell_dir, exist_ok=True)
    cells = build_cells(cfg)
    metrics, record_wall = cfg["metrics"], cfg["record_wall_time"]
    t0 = time.perf_counter()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: run_cell(c, metrics, record_wall), cells))
    else:
        results = [run_cell(c, metrics, record_wall) for c in cells]

    groups = {}
    for res in results:
        name = res.cell.key.replace("/", "__") + ".csv"
        _write_csv(os.path.join(cell_dir, name), res.rows)
        groups.setdefault(res.cell.group, []).append(res)
    csv_files, svg_files = [], []
    for group in sorted(groups):
        rows = [row for res in sorted(groups[group], key=lambda r: r.cell.key) for row in res.rows]
        path = os.path.join(out_dir, f"{group}.csv")
        _write_csv(path, rows)
        csv_files.append(path)
        if cfg["plot"]["enabled"]:
            parsed = read_trace_csv(path)
            for metric in metrics:
                if not any(r["metric_name"] == metric for r in parsed):
                    continue
                svg = plot_rows(parsed, metric, title=f"{group}: {metric}",
                                log_y=cfg["plot"]["log_y"], width=cfg["plot"]["width"],
                                height=cfg["plot"]["height"])
                spath = os.path.join(out_dir, f"{group}_{metric}.svg")
                with open(spath, "w", encoding="utf-8") as fh:
                    fh.write(svg)
                svg_files.append(spath)

    from . import __version__
    manifest = {
        "revi_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "threads": threads,
        "wall_time_s": time.perf_counter() - t0,
        "config": cfg,
        "status": "ok" if all(r.status == "ok" for r in results) else "failed",
        "cells": [{"key": r.cell.key, "group": r.cell.group, "solver": r.cell.solver["name"],
                   "seed": r.cell.seed, "status": r.status, "error": r.error,
                   "runtime_adjustments": r.notes, "wall_time_s": r.wall_time_s}
                  for r in results],
        "csv": [os.path.relpath(p, out_dir) for p in csv_files],
        "svg": [os.path.relpath(p, out_dir) for p in svg_files],
    }
    mpath = os.path.join(out_dir, "manifest.json")
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return RunReport(out_dir, results, csv_files, svg_files, mpath)
