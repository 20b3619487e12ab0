"""Run validated scenarios and studies, writing CSV artifacts.

Every CSV is written with ``repr`` formatting of floats and ``\\n`` line
endings, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import copy
import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .euler import EulerPrimitiveState, characteristic_polynomial, euler_eigenvalues
from .levelset import Circle, build_level_set
from .network import build_network, network_dt, network_mass, step_network
from .numerics import Grid1D, Grid2D, TimeStepper, integrate_ode, observed_order
from .oscillator import (
    OscillatorParams,
    OscillatorRegime,
    PendulumParams,
    analytic_solution,
    classify_regime,
    oscillator_rhs,
    overdamped_limit_solution,
    simulate_rigid_pendulum,
    simulate_stiff_pendulum,
)
from .scenario import Scenario, ScenarioError, StudySpec, set_path, validate_params
from .shallow_water import ChannelState, channel_dt_limit, exact_riemann, step_channel
from .sorption1d import (
    CompareScenario,
    FullModelConfig,
    MultiscaleModelConfig,
    MultiscaleSeries,
    PotentialSpec,
    compare_full_vs_multiscale,
    compute_M,
    full_diagnostics,
    full_model_initial_state,
    multiscale_diagnostics,
    multiscale_initial_state,
    step_full_model,
    step_multiscale_model,
)
from .sorption2d import (
    Multiscale2DConfig,
    initial_state_2d,
    radial_oracle_solution,
    step_multiscale_2d,
    total_mass_2d,
)

__all__ = ["OUTPUT_ROOT_ENV", "ModelRunError", "RunResult", "StudyResult", "output_root", "run_scenario", "run_study"]

OUTPUT_ROOT_ENV = "MSLAB_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "mslab-output"
POST_LAYER_FACTOR = 5.0  # initial layer ends after this many t0^2/tg = m/gamma
ERROR_METRIC_WORDS = ("error", "violation", "drift", "deviation", "difference")


class ModelRunError(RuntimeError):
    """A model failed while running a validated scenario."""


@dataclass
class RunResult:
    scenario: Scenario
    directory: Path
    metrics: dict
    files: list = field(default_factory=list)

    def summary_line(self) -> str:
        parts = [f"{k}={_fmt(v)}" for k, v in self.metrics.items() if not isinstance(v, (list, dict))]
        return f"{self.scenario.name} [{self.scenario.model}]: " + ", ".join(parts)


@dataclass
class StudyResult:
    spec: StudySpec
    directory: Path
    values: list
    metrics: list
    order: float | None

    def summary_line(self) -> str:
        order = "n/a" if self.order is None else f"{self.order:.4g}"
        pairs = ", ".join(f"{v:g}->{m:.4g}" for v, m in zip(self.values, self.metrics))
        return f"{self.spec.name}: {self.spec.metric} vs {self.spec.parameter}: {pairs}; log-log slope {order}"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def output_root(override: str | os.PathLike | None = None) -> Path:
    if override is not None:
        return Path(override)
    return Path(os.environ.get(OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


class _CsvSink:
    """Deterministic CSV writer that remembers the files it produced."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.files: list[Path] = []
        directory.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, header, rows) -> Path:
        path = self.directory / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
        self.files.append(path)
        return path


def _steps_to(times, dt) -> list[int]:
    steps = []
    for t in times:
        n = int(round(t / dt))
        if n <= 0 or not math.isclose(n * dt, t, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"output time {t} is not a positive multiple of dt={dt}")
        steps.append(n)
    return steps


# --------------------------------------------------------------------------
# initial profiles


def profile_1d(spec: dict | None) -> Callable:
    spec = spec or {"kind": "uniform", "value": 1.0}
    kind = spec["kind"]
    if kind == "uniform":
        v = float(spec["value"])
        return lambda x: np.full_like(np.asarray(x, dtype=float), v)
    if kind == "linear":
        a, b = float(spec["a"]), float(spec["b"])
        return lambda x: a + b * np.asarray(x, dtype=float)
    if kind == "gaussian":
        c, w = float(spec["center"]), float(spec["width"])
        amp, base = float(spec["amplitude"]), float(spec.get("base", 0.0))
        return lambda x: base + amp * np.exp(-(((np.asarray(x, dtype=float) - c) / w) ** 2))
    if kind == "cosine":
        mean, amp, k = float(spec["mean"]), float(spec["amplitude"]), float(spec["wavenumber"])
        return lambda x: mean + amp * np.cos(k * math.pi * np.asarray(x, dtype=float))
    raise ValueError(f"unknown profile kind {kind!r}")


def profile_2d(spec: dict | None) -> Callable:
    spec = spec or {"kind": "uniform", "value": 1.0}
    kind = spec["kind"]
    if kind == "uniform":
        v = float(spec["value"])
        return lambda x, y: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, v)
    cx, cy = (float(v) for v in spec.get("center", (0.0, 0.0)))
    w, amp, base = float(spec["width"]), float(spec["amplitude"]), float(spec.get("base", 0.0))
    r0 = float(spec.get("radius", 0.0)) if kind == "radial-gaussian" else 0.0
    return lambda x, y: base + amp * np.exp(-(((np.hypot(np.asarray(x) - cx, np.asarray(y) - cy) - r0) / w) ** 2))


# --------------------------------------------------------------------------
# model runners; each returns a metrics dict


def _run_oscillator(p: dict, out: _CsvSink, cadence: int) -> dict:
    t_end = p["t_end"]
    scheme = p.get("scheme", "rk4")
    metrics: dict = {}
    worst_err = worst_dev = 0.0
    have_dev = False
    for case in p["cases"]:
        op = OscillatorParams(case["m"], case["k"], case["gamma"])
        x0, v0 = case["x0"], case["v0"]
        if scheme == "analytic":
            t = np.linspace(0.0, t_end, int(p.get("samples", 1001)))
            x, v = analytic_solution(op, x0, v0, t)
        else:
            t, y = integrate_ode(oscillator_rhs(op), [x0, v0], t_end, TimeStepper(scheme, p["dt"]))
            x, v = y[:, 0], y[:, 1]
        xa, va = analytic_solution(op, x0, v0, t)
        err = float(max(np.max(np.abs(x - xa)), np.max(np.abs(v - va))))
        cols = [t, x, v, xa, va]
        header = ["t", "x", "v", "x_analytic", "v_analytic"]
        name = case["name"]
        metrics[f"{name}.regime"] = classify_regime(op).value
        metrics[f"{name}.max_error"] = err
        worst_err = max(worst_err, err)
        if classify_regime(op) is OscillatorRegime.OVERDAMPED and x0 != 0:
            xl = overdamped_limit_solution(op.tg, x0, t)
            cols.append(xl)
            header.append("x_limit")
            post = t >= POST_LAYER_FACTOR * op.m / op.gamma
            dev = float(np.max(np.abs(x[post] - xl[post])) / abs(x0)) if post.any() else math.nan
            metrics[f"{name}.limit_deviation"] = dev
            if op.t0 is not None:
                metrics[f"{name}.t0_over_tg"] = op.t0 / op.tg
            worst_dev = max(worst_dev, dev)
            have_dev = True
        keep = np.zeros(t.size, dtype=bool)
        keep[::cadence] = True
        keep[-1] = True
        out.write(f"{name}.csv", header, zip(*(c[keep] for c in cols)))
    metrics["max_error"] = worst_err
    if have_dev:
        metrics["limit_deviation"] = worst_dev
    return metrics


def _run_pendulum(p: dict, out: _CsvSink, cadence: int) -> dict:
    pp = PendulumParams(p["m"], p["L"], p["k"], p.get("g", 9.81), math.radians(p["theta0_deg"]))
    stepper = TimeStepper("rk4", p["dt"]) if "dt" in p else pp.default_stepper()
    traj = simulate_stiff_pendulum(pp, stepper, p["t_end"], p.get("start", "natural"))
    rigid = simulate_rigid_pendulum(pp.L, pp.g, pp.theta0, stepper, p["t_end"])
    rows = list(traj.rows())
    out.write("trajectory.csv", ["t", "x1", "x2", "theta_equiv", "constraint_violation", "lambda_k"],
              (r for i, r in enumerate(rows) if i % cadence == 0 or i == len(rows) - 1))
    n = rigid.t.size
    out.write("rigid.csv", ["t", "theta", "omega"],
              ((rigid.t[i], rigid.theta[i], rigid.omega[i]) for i in range(n) if i % cadence == 0 or i == n - 1))
    return {
        "k": pp.k,
        "dt": stepper.dt,
        "max_angle_error": float(np.max(np.abs(traj.theta - rigid.theta))),
        "max_constraint_violation": traj.max_constraint_violation,
        "min_tension": float(np.min(traj.tension)),
    }


def _potential(d: dict) -> PotentialSpec:
    keys = ("L", "phi", "a1", "b1", "a2", "b2", "x0")
    return PotentialSpec(d["tag"], d["eps"], **{k: d[k] for k in keys if k in d})


def _run_sorption1d(p: dict, out: _CsvSink, cadence: int) -> dict:
    pot = _potential(p["potential"])
    stepper = TimeStepper(p["scheme"], p["dt"])
    c0 = profile_1d(p.get("c0"))
    which = p["models"]
    steps = _steps_to(p["output_times"], p["dt"])
    n_quad = int(p.get("n_quad", 2000))
    metrics: dict = {}
    finals = {}

    def march(name, state, step, diag, xs):
        profile, diags = [], []
        d0 = diag(state)
        diags.append(d0.row())
        done = 0
        for target in steps:
            for n in range(done + 1, target + 1):
                state = step(state)
                if n % cadence == 0:
                    diags.append(diag(state).row())
            done = target
            profile.extend((state.t, x, c) for x, c in zip(xs, state.values))
        header = ["t", "bulk_mass", "adsorbed_mass", "total_mass", "c_at_wall"]
        out.write(f"{name}_profile.csv", ["t", "x", "c"], profile)
        out.write(f"{name}_diagnostics.csv", header, diags)
        metrics[f"{name}_mass_drift"] = abs(diag(state).total_mass - d0.total_mass)
        return state

    if which in ("full", "both"):
        cfg = FullModelConfig(pot, p["D"], FullModelConfig.default_grid(pot, int(p.get("cells_per_eps", 20))), stepper)
        st = march("full", full_model_initial_state(cfg, c0), lambda s: step_full_model(s, cfg),
                   lambda s: full_diagnostics(s, cfg), cfg.grid.centers)
        finals["full"] = (cfg.grid.centers, st.values)
    if which in ("multiscale", "both"):
        M = compute_M(pot, n_quad)
        lo, hi = pot.reduced_domain()
        ms = p.get("multiscale", {"cells": 400})
        cells = int(ms["cells"]) if "cells" in ms else int(round((hi - lo) / ms["h"]))
        M_right = M if pot.tag == "two-wall-gaussian" else 0.0
        cfg = MultiscaleModelConfig(p["D"], M, Grid1D(lo, hi, cells), stepper, M_right)
        st = march("multiscale", multiscale_initial_state(cfg, c0), lambda s: step_multiscale_model(s, cfg),
                   lambda s: multiscale_diagnostics(s, cfg), cfg.grid.centers)
        finals["multiscale"] = (cfg.grid.centers, st.values)
        metrics["M"] = M
        metrics["multiscale_cells"] = cells
        if M_right == 0 and (lo, hi) == (0.0, 1.0):
            ref = MultiscaleSeries(M, p["D"]).evaluate(c0, cfg.grid.centers, st.t)
            metrics["series_error"] = float(np.max(np.abs(st.values - ref)))
    if len(finals) == 2:
        xs, cm = finals["multiscale"]
        xf, cf = finals["full"]
        lo_edge = pot.layer_edge()
        hi_edge = pot.walls[1] - pot.L * pot.eps if pot.tag == "two-wall-gaussian" else math.inf
        sel = (xs >= lo_edge) & (xs <= hi_edge)
        metrics["full_vs_multiscale_sup"] = float(np.max(np.abs(np.interp(xs[sel], xf, cf) - cm[sel])))
    return metrics


def _run_compare(p: dict, out: _CsvSink, cadence: int) -> dict:
    sc = CompareScenario(
        D=p["D"], phi=p["phi"], L=p.get("L", 2.0), c0=profile_1d(p.get("c0")), output_times=tuple(p["output_times"]),
        dt=p["dt"], scheme=p["scheme"], cells_per_eps=p["cells_per_eps"], multiscale_cells=p["multiscale_cells"],
        reduced_origin=p.get("reduced_origin", "layer-edge"),
    )
    rows = compare_full_vs_multiscale(p["eps"], sc)
    out.write("errors.csv", ["eps", "M", "sup_error", "l2_error"], ((r.eps, r.M, r.sup_error, r.l2_error) for r in rows))
    sups = [r.sup_error for r in rows]
    metrics = {"sup_error": sups[-1], "monotone": all(b < a for a, b in zip(sups, sups[1:]))}
    if len(rows) >= 2:
        metrics["order"] = observed_order([r.eps for r in rows], sups)
    return metrics


def _run_sorption2d(p: dict, out: _CsvSink, cadence: int) -> dict:
    grid = Grid2D.square(-1.0, 1.0, p["n_cells"])
    ls = build_level_set(p["shapes"], grid)
    cfg = Multiscale2DConfig(ls, p["D"], p["M"], TimeStepper(p["scheme"], p["dt"]))
    c0 = profile_2d(p.get("c0"))
    bulk, surf = initial_state_2d(cfg, c0)
    steps = _steps_to(p["output_times"], p["dt"])
    X, Y = grid.mesh()
    d0 = total_mass_2d(bulk, surf, cfg)
    diags = [d0.row()]
    done = 0
    for k, target in enumerate(steps):
        for n in range(done + 1, target + 1):
            bulk, surf = step_multiscale_2d(bulk, surf, cfg)
            if n % cadence == 0:
                diags.append(total_mass_2d(bulk, surf, cfg).row())
        done = target
        out.write(f"field_{k:03d}.csv", ["x", "y", "c", "phi"],
                  zip(X.ravel(), Y.ravel(), bulk.values.ravel(), ls.values.ravel()))
        nodes = cfg.surface
        out.write(f"surface_{k:03d}.csv", ["shape", "arclength", "x", "y", "c_surface"],
                  zip(nodes.shape, nodes.tau, nodes.x, nodes.y, surf.values))
    out.write("diagnostics.csv", ["t", "bulk_mass", "adsorbed_mass", "total_mass", "c_at_wall"], diags)
    final = total_mass_2d(bulk, surf, cfg)
    metrics = {
        "mass_drift": abs(final.total_mass - d0.total_mass) / abs(d0.total_mass),
        "fluid_nodes": cfg.n_bulk,
        "surface_nodes": cfg.surface.size,
    }
    if p.get("oracle", "none") == "radial":
        shapes = ls.shapes
        if len(shapes) != 1 or not isinstance(shapes[0], Circle) or shapes[0].center != (0.0, 0.0):
            raise ValueError("the radial oracle needs a single circle centred at the origin")
        prof = p.get("c0") or {"kind": "uniform", "value": 1.0}
        if tuple(prof.get("center", (0.0, 0.0))) != (0.0, 0.0):
            raise ValueError("the radial oracle needs initial data centred on the bubble")
        g = lambda r: c0(np.asarray(r, dtype=float), np.zeros_like(np.asarray(r, dtype=float)))
        oracle = radial_oracle_solution(shapes[0].radius, 1.0, p["D"], p["M"], g, bulk.t, cfg.stepper,
                                        int(p.get("oracle_cells", 2000)))
        r = np.hypot(X, Y)
        sel = ls.fluid & (r <= 1.0)
        metrics["oracle_sup_error"] = float(np.max(np.abs(bulk.values[sel] - oracle(r[sel]))))
    return metrics


def _collinear_reference(net, p):
    """Single channel equivalent to two collinear channels joined through one junction."""
    if len(net.junctions) != 1 or len(net.channels) != 2:
        raise ValueError("the single-channel check needs exactly two channels and one junction")
    j = net.junctions[0]
    linked = [e for e in j.edges if not e.is_wall]
    by_end = {e.end: e for e in linked}
    if set(by_end) != {"left", "right"}:
        raise ValueError("the single-channel check needs one channel entering and one leaving the junction")
    a = net.channels[by_end["right"].channel]
    b = net.channels[by_end["left"].channel]
    if not math.isclose(a.dx, b.dx, rel_tol=1e-12):
        raise ValueError("collinear channels must share the cell size")
    width = by_end["right"].length
    n_j = j.area / width / a.dx
    if abs(n_j - round(n_j)) > 1e-9 or round(n_j) < 1:
        raise ValueError("junction length (area / width) must be a whole number of cells")
    n_j = int(round(n_j))
    h = np.concatenate([a.h, np.full(n_j, j.q[0]), b.h])
    u_j = (j.q[1] * math.cos(a.angle) + j.q[2] * math.sin(a.angle)) / j.q[0]
    hu = np.concatenate([a.hu, np.full(n_j, j.q[0] * u_j), b.hu])
    ref = ChannelState(h, hu, a.length + b.length + n_j * a.dx, a.g, a.bc_left, b.bc_right, a.angle, 0.0, "reference")
    return ref, a.name, b.name, a.h.size, n_j


def _run_sw(p: dict, out: _CsvSink, cadence: int) -> dict:
    g, cfl = p.get("g", 9.81), p.get("cfl", 0.45)
    net = build_network(copy.deepcopy(p["network"]), g, cfl)
    t_end = p["t_end"]
    check = p.get("check", "none")
    m0 = network_mass(net)
    series = {name: [] for name in net.channels}
    mass_rows = [(0.0, m0)]
    metrics: dict = {}

    def record(n):
        for name, ch in net.channels.items():
            series[name].extend((net.t, x, h, u) for x, h, u in zip(ch.x, ch.h, ch.u))

    record(0)
    ref = None
    split_diff = 0.0
    coll_err = 0.0
    if check == "single-channel":
        ref, a_name, b_name, n_a, n_j = _collinear_reference(net, p)
    if check == "split":
        pair = p.get("split_channels")
        if not (isinstance(pair, list) and len(pair) == 2 and all(c in net.channels for c in pair)):
            raise ValueError("the split check needs 'split_channels' naming two channels")
    steps = 0
    while net.t < t_end - 1e-14 * max(1.0, t_end):
        dt = min(network_dt(net), t_end - net.t)
        if ref is not None:
            dt = min(dt, channel_dt_limit(ref, cfl))
        net = step_network(net, dt)
        steps += 1
        if ref is not None:
            ref = step_channel(ref, dt, cfl=cfl)
            h_ref = np.concatenate([ref.h[:n_a], ref.h[n_a + n_j:]])
            h_net = np.concatenate([net.channels[a_name].h, net.channels[b_name].h])
            coll_err = float(np.max(np.abs(h_net - h_ref)))  # kept for the final time
        if check == "split":
            ha, hb = (net.channels[c].h for c in pair)
            split_diff = max(split_diff, float(np.max(np.abs(ha - hb))))
        if steps % cadence == 0 or net.t >= t_end - 1e-14 * max(1.0, t_end):
            record(steps)
            mass_rows.append((net.t, network_mass(net)))
    for name, rows in series.items():
        out.write(f"channel_{name}.csv", ["t", "x", "h", "u"], rows)
    out.write("diagnostics.csv", ["t", "total_mass"], mass_rows)
    metrics["steps"] = steps
    metrics["mass_drift"] = abs(network_mass(net) - m0) / m0
    if check == "single-channel":
        metrics["single_channel_sup_error"] = coll_err
    if check == "split":
        metrics["split_difference"] = split_diff
    if check == "exact-riemann":
        metrics.update(_dam_break_metrics(net, p))
    return metrics


def _dam_break_metrics(net, p) -> dict:
    if len(net.channels) != 1:
        raise ValueError("the exact-riemann check needs a single channel")
    (cfg_ch,) = p["network"]["channels"]
    init = cfg_ch["initial"]
    hl, hr = float(init["h_left"]), float(init["h_right"])
    split = float(init.get("x_split", 0.5 * float(cfg_ch["length"])))
    u0 = float(init.get("u", 0.0))
    ex = exact_riemann(hl, u0, hr, u0, net.channels[cfg_ch["id"]].g)
    (ch,) = net.channels.values()
    t = net.t
    a_star = math.sqrt(ex.g * ex.h_star)
    lo = ex.u_star - a_star if not ex.left_is_shock else ex._shock_speed("L")
    hi = ex.right_front_speed
    x_mid = split + 0.5 * (lo + hi) * t
    h_mid = float(np.interp(x_mid, ch.x, ch.h))
    level = 0.5 * (ex.h_star + hr)
    above = np.nonzero(ch.h >= level)[0]
    i = int(above[-1])
    if i + 1 >= ch.h.size:
        raise ValueError("the front has left the channel")
    frac = (ch.h[i] - level) / (ch.h[i] - ch.h[i + 1])
    front = ch.x[i] + frac * ch.dx
    front_exact = split + hi * t
    return {
        "star_height": h_mid,
        "star_height_exact": ex.h_star,
        "star_height_error": abs(h_mid - ex.h_star) / ex.h_star,
        "front_position": front,
        "front_position_exact": front_exact,
        "front_error": abs(front - front_exact) / abs(front_exact - split),
    }


def _run_euler(p: dict, out: _CsvSink, cadence: int) -> dict:
    rows = []
    worst = 0.0
    lines = []
    for i, s in enumerate(p["states"]):
        st = EulerPrimitiveState(s["rho"], s["u"], s.get("p", 0.0), s["a2"])
        eig = euler_eigenvalues(st)
        vals = [complex(v) for v in eig.values]
        res = max(abs(characteristic_polynomial(st, v)) for v in vals)
        worst = max(worst, res)
        rows.append([i, st.rho, st.u, st.p, st.a2] + [c for v in vals for c in (v.real, v.imag)]
                    + [eig.hyperbolic, eig.degenerate, res])
        shown = ", ".join(f"{v.real:g}" if v.imag == 0 else f"{v.real:g}{v.imag:+g}i" for v in vals)
        lines.append(f"state {i}: {{{shown}}} {eig.describe()}")
    header = ["state", "rho", "u", "p", "a2", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im",
              "lambda3_re", "lambda3_im", "hyperbolic", "degenerate", "det_residual"]
    out.write("eigenvalues.csv", header, rows)
    return {"max_det_residual": worst, "states": len(rows), "report": lines}


_RUNNERS = {
    "oscillator": _run_oscillator,
    "pendulum": _run_pendulum,
    "sorption1d": _run_sorption1d,
    "sorption1d-compare": _run_compare,
    "sorption2d": _run_sorption2d,
    "sw-network": _run_sw,
    "euler-eigen": _run_euler,
}


def run_scenario(s: Scenario, root: str | os.PathLike | None = None, subdir: str | None = None) -> RunResult:
    """Run a validated scenario; artifacts go to ``<root>/<output.directory>``.

    Model failures are re-raised as ``ModelRunError`` naming the scenario.
    """
    directory = output_root(root) / (subdir if subdir is not None else s.output_dir)
    sink = _CsvSink(directory)
    params = copy.deepcopy(s.params)
    try:
        metrics = _RUNNERS[s.model](params, sink, s.cadence)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        raise ModelRunError(f"scenario {s.name!r} ({s.model}): {exc}") from exc
    scalar = [(k, v) for k, v in metrics.items() if not isinstance(v, (list, dict))]
    sink.write("summary.csv", ["metric", "value"], scalar)
    return RunResult(s, directory, metrics, sink.files)


def _is_error_metric(name: str) -> bool:
    return any(w in name for w in ERROR_METRIC_WORDS)


def run_study(spec: StudySpec, root: str | os.PathLike | None = None) -> StudyResult:
    """Sweep one parameter of the base scenario and tabulate a metric.

    The table is rewritten after every run so a failure keeps the completed
    rows; the failing run is re-raised as ``ModelRunError``.
    """
    base = spec.base
    directory = output_root(root) / spec.name
    sink = _CsvSink(directory)
    values, metrics = [], []
    header = ["parameter", spec.metric]
    for v in spec.values:
        params = copy.deepcopy(base.params)
        set_path(params, spec.parameter, v)
        errors = validate_params(base.model, params)
        if errors:
            raise ScenarioError(errors)
        scen = Scenario(f"{spec.name}[{spec.parameter}={v:g}]", base.model, params, base.output_dir, base.cadence)
        res = run_scenario(scen, root, subdir=f"{spec.name}/{spec.parameter}={v:g}")
        if spec.metric not in res.metrics:
            raise ModelRunError(f"study {spec.name!r}: model {base.model} has no metric {spec.metric!r} "
                                f"(available: {', '.join(sorted(k for k in res.metrics if '.' not in k))})")
        values.append(v)
        metrics.append(float(res.metrics[spec.metric]))
        sink.files.clear()
        sink.write("study.csv", header, zip(values, metrics))
    order = None
    if _is_error_metric(spec.metric) and all(m > 0 for m in metrics):
        order = observed_order(values, metrics)
    rows = [("parameter", spec.parameter), ("metric", spec.metric)]
    if order is not None:
        rows.append(("order", order))
    sink.write("summary.csv", ["key", "value"], rows)
    return StudyResult(spec, directory, values, metrics, order)
