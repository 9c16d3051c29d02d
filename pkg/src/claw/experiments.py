"""Config-driven experiments and CSV emission.

Each experiment kind produces a rectangular ResultTable of floats plus
metadata (config echo, version, seed).  Identical config and seed give
byte-identical CSV output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ExperimentConfig, build_initial
from .entropy import BumpFamily, _residuals_for_levels
from .measures import StepCdf, as_step_cdf, moment, tail_moment
from .scheme import (
    exact_rarefaction_cdf,
    exact_shock_cdf,
    sh_as_cdf,
    sh_trajectory,
)
from .viscous import viscous_trajectory
from .wasserstein import quantile_staircase, w1_via_cdf, wp_from_staircases

__all__ = ["ResultTable", "run_experiment", "emit_csv"]


@dataclass
class ResultTable:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(
                    f"row of width {len(row)} does not match {len(self.columns)} columns"
                )
            if not all(np.isfinite(v) for v in row):
                raise ValueError(f"non-finite entry in row {row}")

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows])


def _metadata(cfg: ExperimentConfig) -> dict:
    meta = {"claw_version": __version__, "kind": cfg.kind, "seed": str(cfg.seed)}
    for key, value in cfg.raw.items():
        meta[f"config {key}"] = value
    return meta


def _pair_trajectories(cfg: ExperimentConfig, times, viscous: bool):
    a0 = build_initial(cfg.initial_a, cfg.n_particles, "initial_a")
    b0 = build_initial(cfg.initial_b, cfg.n_particles, "initial_b")
    if viscous:
        sa = viscous_trajectory(a0, cfg.flux, cfg.h, cfg.nu, times)
        sb = viscous_trajectory(b0, cfg.flux, cfg.h, cfg.nu, times)
    else:
        sa = sh_trajectory(a0, cfg.flux, cfg.h, times)
        sb = sh_trajectory(b0, cfg.flux, cfg.h, times)
    return sa, sb


def _sweep_rows(cfg: ExperimentConfig, viscous: bool):
    times = np.linspace(0.0, cfg.t_final, cfg.n_times)
    sa, sb = _pair_trajectories(cfg, times, viscous)
    rows = []
    w0 = None
    for t, state_a, state_b in zip(times, sa, sb):
        stair_a = quantile_staircase(sh_as_cdf(state_a))
        stair_b = quantile_staircase(sh_as_cdf(state_b))
        ws = wp_from_staircases(stair_a, stair_b, cfg.p_list)
        if w0 is None:
            w0 = ws
        ratios = [w / w0_i if w0_i > 0 else (1.0 if w == 0 else np.inf) for w, w0_i in zip(ws, w0)]
        row = [t]
        for w, ratio in zip(ws, ratios):
            row.extend([w, ratio])
        rows.append(row)
    cols = ["t"]
    for p in cfg.p_list:
        cols.extend([f"w{p:g}", f"ratio{p:g}"])
    return cols, rows


def _contraction_sweep(cfg: ExperimentConfig) -> ResultTable:
    cols, rows = _sweep_rows(cfg, viscous=False)
    return ResultTable(cols, rows, _metadata(cfg))


def _viscous_contraction(cfg: ExperimentConfig) -> ResultTable:
    cols, rows = _sweep_rows(cfg, viscous=True)
    return ResultTable(cols, rows, _metadata(cfg))


def _classical_constancy(cfg: ExperimentConfig) -> ResultTable:
    times = np.linspace(0.0, cfg.t_final, cfg.n_times)
    sa, sb = _pair_trajectories(cfg, times, viscous=False)
    rows = []
    w0 = None
    for t, state_a, state_b in zip(times, sa, sb):
        stair_a = quantile_staircase(sh_as_cdf(state_a))
        stair_b = quantile_staircase(sh_as_cdf(state_b))
        ws = wp_from_staircases(stair_a, stair_b, cfg.p_list)
        if w0 is None:
            w0 = ws
        rows.append([t] + [abs(w - w0_i) for w, w0_i in zip(ws, w0)])
    cols = ["t"] + [f"drift{p:g}" for p in cfg.p_list]
    return ResultTable(cols, rows, _metadata(cfg))


def _oracle_cdf(cfg: ExperimentConfig, t: float):
    """Closed-form entropy solution for the supported flux/datum pairs."""
    preset = cfg.initial_a.get("preset", "")
    if preset.replace(" ", "") in ("uniform(0,1)",) and cfg.flux.name == "burgers":
        return exact_rarefaction_cdf(t)
    if preset.startswith("dirac"):
        shock = exact_shock_cdf(cfg.flux, t)  # raises for non-admissible fluxes
        x0 = build_initial(cfg.initial_a, 1, "initial_a").positions[0]
        return StepCdf(shock.breakpoints + x0, shock.values)
    raise ValueError(
        f"no exact oracle for flux {cfg.flux.name!r} with initial datum {preset!r}"
    )


def _convergence_study(cfg: ExperimentConfig) -> ResultTable:
    oracle = _oracle_cdf(cfg, cfg.t_final)
    oracle_stair = quantile_staircase(oracle)
    a0 = build_initial(cfg.initial_a, cfg.n_particles, "initial_a")
    rows = []
    for h in cfg.h_list:
        state = sh_trajectory(a0, cfg.flux, h, [cfg.t_final])[0]
        cdf = as_step_cdf(sh_as_cdf(state))
        l1 = w1_via_cdf(cdf, oracle)
        ws = wp_from_staircases(quantile_staircase(cdf), oracle_stair, cfg.p_list)
        rows.append([h, float(cfg.n_particles), l1] + ws)
    cols = ["h", "n_particles", "l1_error"] + [f"w{p:g}_error" for p in cfg.p_list]
    return ResultTable(cols, rows, _metadata(cfg))


def _moment_audit(cfg: ExperimentConfig) -> ResultTable:
    a0 = build_initial(cfg.initial_a, cfg.n_particles, "initial_a")
    m = cfg.flux.lipschitz_bound
    h = cfg.h
    n_steps = int(np.floor(cfg.t_final / h + 1e-12))
    times = h * np.arange(n_steps + 1)
    states = sh_trajectory(a0, cfg.flux, h, times)
    rows = []
    for p in cfg.p_list:
        prev_moment = prev_tail = None
        for t, state in zip(times, states):
            mom = moment(state.base, p)
            tail = tail_moment(state.base, p, cfg.r_tail)
            if prev_moment is None:
                mom_bound, tail_bound = mom, tail
            else:
                mom_bound = 2.0 ** (p - 1.0) * (prev_moment + (h * m) ** p)
                tail_bound = (1.0 + h * m / (cfg.r_tail - h * m)) ** p * prev_tail
            rows.append([t, p, mom, mom_bound, tail, tail_bound])
            prev_moment = mom
            prev_tail = tail_moment(state.base, p, cfg.r_tail - h * m)
    cols = ["t", "p", "moment", "moment_bound", "tail", "tail_bound"]
    return ResultTable(cols, rows, _metadata(cfg))


def _entropy_residual_table(cfg: ExperimentConfig) -> ResultTable:
    a0 = build_initial(cfg.initial_a, cfg.n_particles, "initial_a")
    times = np.linspace(0.0, cfg.t_final, cfg.n_times)
    states = sh_trajectory(a0, cfg.flux, cfg.h, times)
    pairs = [(t, sh_as_cdf(s)) for t, s in zip(times, states)]
    ks = np.linspace(0.0, 1.0, 11)
    residuals = _residuals_for_levels(pairs, cfg.flux, ks, BumpFamily())
    rows = [[float(k), float(r)] for k, r in zip(ks, residuals)]
    return ResultTable(["k", "residual"], rows, _metadata(cfg))


_RUNNERS = {
    "contraction_sweep": _contraction_sweep,
    "viscous_contraction": _viscous_contraction,
    "classical_constancy": _classical_constancy,
    "convergence_study": _convergence_study,
    "moment_audit": _moment_audit,
    "entropy_residual": _entropy_residual_table,
}


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Run the configured experiment; deterministic given config and seed."""
    return _RUNNERS[cfg.kind](cfg)


def emit_csv(table: ResultTable, sink) -> None:
    """Write the table to a text sink: '#' metadata lines, a header row,
    then rows with 17-significant-digit values and plain newlines."""
    for key, value in table.metadata.items():
        sink.write(f"# {key} = {value}\n")
    sink.write(",".join(table.columns) + "\n")
    for row in table.rows:
        sink.write(",".join(f"{v:.17g}" for v in row) + "\n")
