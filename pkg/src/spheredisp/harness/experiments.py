"""Experiment runners.

Every run is keyed by ``(seed, purpose, ...)`` random streams: the initial
configuration depends only on the seed, init mode and shape, so different
regularizers and optimizers start from the same points.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..codes import known_optimum_deg
from ..geometry import sample_great_circles, sample_power_spherical, sample_uniform
from ..metrics import min_geodesic_distance, per_point_min_angles, spherical_variance
from ..optim import OptimizerState, step, uses_euclidean_gradients
from ..regularizers import Regularizer, parse_regularizer
from ..regularizers.sliced import sliced_distances
from ..rng import stream
from .config import ExperimentConfig
from .io import ConvergenceRow, TraceRow, emit_convergence_csv, emit_csv, write_json


@dataclass
class RunResult:
    reg: str
    optimizer: str
    init: str
    seed: int
    rows: list[TraceRow]
    final: np.ndarray
    counters: dict = field(default_factory=dict)

    @property
    def final_dmin_deg(self) -> float:
        return self.rows[-1].dmin_deg


def initial_configuration(cfg: ExperimentConfig, seed: int, init: str) -> np.ndarray:
    rng = stream(seed, "init", init, cfg.n, cfg.dim)
    if init == "uniform":
        return sample_uniform(cfg.n, cfg.dim, rng)
    mu = np.zeros(cfg.dim)
    mu[0] = 1.0
    return sample_power_spherical(cfg.n, cfg.dim, mu, cfg.kappa, rng)


def _row(seed, t, loss, X, t0, deterministic) -> TraceRow:
    d = min_geodesic_distance(X)
    wall = 0.0 if deterministic else (time.perf_counter() - t0) * 1e3
    return TraceRow(seed, t, float(loss), d, float(np.degrees(d)), spherical_variance(X), wall)


def optimize(cfg: ExperimentConfig, reg: Regularizer | str, seed: int, init: str = "uniform",
             optimizer: str | None = None, X0: np.ndarray | None = None) -> RunResult:
    """Run one seed of one regularizer; rows at step 0, every ``eval_every`` steps and the last step.

    The loss column holds the stochastic loss estimate drawn for that step
    (for the final row, a fresh estimate at the final configuration).
    """
    if isinstance(reg, str):
        reg = parse_regularizer(reg, cfg.minibatch)
    method = optimizer or cfg.optimizer
    state = OptimizerState(method=method, lr=cfg.lr, betas=tuple(cfg.betas), eps=cfg.eps,
                           retraction=cfg.retraction, per_coordinate=cfg.adam_moments == "coordinate")
    euclid = uses_euclidean_gradients(state)
    X = initial_configuration(cfg, seed, init) if X0 is None else np.array(X0, dtype=float)
    rng = stream(seed, "steps", str(reg))
    rows: list[TraceRow] = []
    counters: dict[str, int] = {}
    t0 = time.perf_counter()
    for t in range(cfg.steps):
        loss, grads = reg.loss_and_grad(X, rng, euclidean=euclid)
        for k, v in grads.counters.items():
            counters[k] = counters.get(k, 0) + int(v)
        if t % cfg.eval_every == 0:
            rows.append(_row(seed, t, loss, X, t0, cfg.deterministic))
        X = step(X, grads, state)
    loss = reg.loss(X, stream(seed, "final", str(reg)))
    rows.append(_row(seed, cfg.steps, loss, X, t0, cfg.deterministic))
    return RunResult(str(reg), method, init, seed, rows, X, counters)


def _run_task(args):
    return optimize(*args)


def _map(cfg: ExperimentConfig, tasks):
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(_run_task, tasks))
    return [_run_task(t) for t in tasks]


def _slug(reg: str) -> str:
    return reg.replace(":", "_").replace(".", "p")


def _write_group(results: list[RunResult], path: Path) -> Path:
    return emit_csv([r for res in results for r in res.rows], path)


def _sidecar(cfg: ExperimentConfig, out: Path, extra: dict | None = None) -> Path:
    data = {"config": cfg.to_dict()}
    data["config"]["mean_direction"] = cfg.mean_direction
    if extra:
        data.update(extra)
    return write_json(data, out / "config.json")


def _seed_summary(res: RunResult, optimum: float | None) -> dict:
    angles = np.degrees(per_point_min_angles(res.final))
    out = {
        "seed": res.seed,
        "final_dmin_deg": res.final_dmin_deg,
        "final_svar": res.rows[-1].svar,
        "per_point_min_angle_deg": [float(a) for a in angles],
        "counters": res.counters,
    }
    if optimum is not None:
        out["gap_to_optimum_deg"] = optimum - res.final_dmin_deg
    return out


def _out_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.out) / cfg.experiment


def run_tammes(cfg: ExperimentConfig) -> dict:
    """Tammes packing: per-regularizer traces plus per-point final angles."""
    if cfg.experiment != "tammes":
        raise ValueError("run_tammes needs an experiment='tammes' config")
    out = _out_dir(cfg)
    optimum = known_optimum_deg(cfg.n, cfg.dim)
    tasks = [(cfg, r, s, "uniform") for r in cfg.regs for s in cfg.seeds]
    results = _map(cfg, tasks)
    summary = {"optimum_deg": optimum, "regularizers": {}}
    for reg in cfg.regs:
        group = [r for r in results if r.reg == str(parse_regularizer(reg))]
        _write_group(group, out / f"{_slug(group[0].reg)}.csv")
        finals = [g.final_dmin_deg for g in group]
        summary["regularizers"][group[0].reg] = {
            "median_final_dmin_deg": float(np.median(finals)),
            "seeds": [_seed_summary(g, optimum) for g in group],
        }
    write_json(summary, out / "summary.json")
    _sidecar(cfg, out)
    return summary


def _init_modes(cfg: ExperimentConfig) -> list[str]:
    return ["clumped", "uniform"] if cfg.init == "both" else [cfg.init]


def run_synthetic(cfg: ExperimentConfig) -> dict:
    """Synthetic high-dimensional dispersion from clumped and/or uniform starts."""
    if cfg.experiment != "synthetic":
        raise ValueError("run_synthetic needs an experiment='synthetic' config")
    out = _out_dir(cfg)
    modes = _init_modes(cfg)
    tasks = [(cfg, r, s, mode) for mode in modes for r in cfg.regs for s in cfg.seeds]
    results = _map(cfg, tasks)
    summary: dict = {"inits": {}}
    for mode in modes:
        summary["inits"][mode] = {}
        for reg in cfg.regs:
            name = str(parse_regularizer(reg))
            group = [r for r in results if r.reg == name and r.init == mode]
            _write_group(group, out / f"{_slug(name)}__{mode}.csv")
            summary["inits"][mode][name] = {
                "initial_svar": [g.rows[0].svar for g in group],
                "final_svar": [g.rows[-1].svar for g in group],
                "final_dmin_deg": [g.final_dmin_deg for g in group],
            }
    write_json(summary, out / "summary.json")
    _sidecar(cfg, out)
    return summary


ABLATION_ARMS = ("radam", "projected-adam")


def run_ablation_opt(cfg: ExperimentConfig) -> dict:
    """Riemannian Adam against projected Euclidean Adam from identical starts."""
    if cfg.experiment != "ablation-opt":
        raise ValueError("run_ablation_opt needs an experiment='ablation-opt' config")
    out = _out_dir(cfg)
    tasks = [(cfg, r, s, "uniform", arm) for r in cfg.regs for s in cfg.seeds for arm in ABLATION_ARMS]
    results = _map(cfg, tasks)
    summary: dict = {"regularizers": {}}
    for reg in cfg.regs:
        name = str(parse_regularizer(reg))
        entry = {}
        for arm in ABLATION_ARMS:
            group = [r for r in results if r.reg == name and r.optimizer == arm]
            _write_group(group, out / f"{_slug(name)}__{arm}.csv")
            entry[arm] = [_seed_summary(g, None) for g in group]
        entry["riemannian_wins"] = [
            a["final_dmin_deg"] >= b["final_dmin_deg"] for a, b in zip(entry["radam"], entry["projected-adam"])
        ]
        summary["regularizers"][name] = entry
    write_json(summary, out / "summary.json")
    _sidecar(cfg, out)
    return summary


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def sliced_convergence_trace(X, n_circles: int, rng, mode: str = "uniform", chunk: int = 100):
    """Per-circle sliced losses for ``n_circles`` fresh circles, drawn in chunks."""
    vals = []
    left = n_circles
    while left > 0:
        k = min(chunk, left)
        P, Q = sample_great_circles(k, X.shape[1], mode, rng)
        vals.append(sliced_distances(X, P, Q))
        left -= k
    return np.concatenate(vals)


def running_stats(values) -> tuple[np.ndarray, np.ndarray]:
    """Running mean and standard error (zero until two samples exist)."""
    v = np.asarray(values, dtype=float)
    k = np.arange(1, v.size + 1)
    mean = np.cumsum(v) / k
    sq = np.cumsum(v * v)
    var = np.where(k > 1, (sq - k * mean * mean) / np.maximum(k - 1, 1), 0.0)
    se = np.sqrt(np.clip(var, 0.0, None) / k)
    return mean, se


def run_sliced_convergence(cfg: ExperimentConfig) -> dict:
    """Monte Carlo estimate of the sliced loss against the number of circles."""
    if cfg.experiment != "sliced-convergence":
        raise ValueError("run_sliced_convergence needs an experiment='sliced-convergence' config")
    out = _out_dir(cfg)
    summary: dict = {"seeds": []}
    for reg_text in cfg.regs:
        reg = parse_regularizer(reg_text)
        rows = []
        for seed in cfg.seeds:
            X = initial_configuration(cfg, seed, "uniform")
            vals = sliced_convergence_trace(X, cfg.steps, stream(seed, "circles", str(reg)), reg.circle_mode)
            mean, se = running_stats(vals)
            ks = sorted({1, *range(cfg.eval_every, cfg.steps + 1, cfg.eval_every), cfg.steps})
            rows += [ConvergenceRow(seed, k, float(mean[k - 1]), float(se[k - 1])) for k in ks]
            fit = [k for k in ks if k >= 10]
            entry = {
                "seed": seed,
                "regularizer": str(reg),
                "estimate_final": float(mean[-1]),
                "stderr_final": float(se[-1]),
                "stderr_loglog_slope": loglog_slope(fit, se[np.array(fit) - 1]) if len(fit) >= 2 else None,
            }
            if cfg.steps >= 1000:
                entry["estimate_at_1000"] = float(mean[999])
                entry["relative_gap_1000"] = abs(mean[999] - mean[-1]) / abs(mean[-1])
            summary["seeds"].append(entry)
        emit_convergence_csv(rows, out / f"{_slug(str(reg))}.csv")
    write_json(summary, out / "summary.json")
    _sidecar(cfg, out)
    return summary


RUNNERS = {
    "tammes": run_tammes,
    "synthetic": run_synthetic,
    "ablation-opt": run_ablation_opt,
    "sliced-convergence": run_sliced_convergence,
}


def run(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    return RUNNERS[cfg.experiment](cfg)
