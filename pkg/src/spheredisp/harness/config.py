"""Experiment configuration: presets, JSON files and CLI overrides."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..optim import METHODS
from ..regularizers import parse_regularizer

EXPERIMENTS = ("tammes", "synthetic", "ablation-opt", "sliced-convergence")
INITS = ("uniform", "clumped", "both")

TAMMES_REGS = [
    "mm:geodesic",
    "koleo:geodesic",
    "mhe:rbf-chordal:1",
    "mhe:rbf-geodesic:1",
    "mhe:laplace-chordal:1",
    "mhe:laplace-geodesic:1",
    "mhe:riesz-chordal:1",
    "mhe:riesz-geodesic:1",
    "lloyd:300",
    "sliced:uniform:1",
    "ssw:uniform:50",
]
SYNTHETIC_REGS = [
    "mm:geodesic",
    "koleo:geodesic",
    "mhe:rbf-chordal:1",
    "mhe:laplace-geodesic:1",
    "mhe:riesz-geodesic:1",
    "lloyd:512",
    "sliced:axis:13",
    "ssw:uniform:1",
]
ABLATION_REGS = ["mm:geodesic", "koleo:geodesic", "mhe:rbf-chordal:1", "lloyd:300", "sliced:uniform:1"]

PRESETS: dict[str, dict] = {
    "tammes": dict(n=24, dim=3, init="uniform", steps=10_000, lr=0.005, optimizer="radam", regs=TAMMES_REGS,
                   eval_every=100),
    "synthetic": dict(n=2000, dim=64, init="both", kappa=100.0, steps=5000, lr=0.001, optimizer="radam",
                      regs=SYNTHETIC_REGS, minibatch=512, adam_moments="coordinate", eval_every=100),
    "ablation-opt": dict(n=24, dim=3, init="uniform", steps=10_000, lr=0.005, optimizer="radam",
                         regs=ABLATION_REGS, eval_every=100),
    "sliced-convergence": dict(n=10_000, dim=128, init="uniform", steps=10_000, regs=["sliced:uniform:1"],
                               eval_every=10),
}


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 24
    dim: int = 3
    init: str = "uniform"
    kappa: float = 0.0
    regs: list[str] = field(default_factory=lambda: ["mm:geodesic"])
    optimizer: str = "radam"
    lr: float = 0.005
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    retraction: str = "exp"
    adam_moments: str = "point"
    minibatch: int | None = None
    steps: int = 1000
    eval_every: int = 100
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    out: str = "runs"
    deterministic: bool = False
    jobs: int = 1
    mean_direction: str = "e1"

    @classmethod
    def preset(cls, experiment: str, **overrides) -> "ExperimentConfig":
        if experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
        values = dict(PRESETS[experiment])
        values.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in dataclasses.fields(cls)}
        for key in values:
            if key not in known:
                raise ConfigError(key, "unknown configuration field")
        cfg = cls(experiment=experiment, **values)
        cfg.validate()
        return cfg

    @classmethod
    def from_sources(cls, experiment: str, json_path: str | None = None, **cli) -> "ExperimentConfig":
        """Preset, then values from a JSON file, then CLI flags (highest priority)."""
        values: dict = {}
        if json_path:
            try:
                values = json.loads(Path(json_path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError("config", f"cannot read {json_path}: {exc}") from None
            if not isinstance(values, dict):
                raise ConfigError("config", "JSON config must be an object")
            file_exp = values.pop("experiment", experiment)
            if file_exp != experiment:
                raise ConfigError("experiment", f"config file is for {file_exp!r}, command is {experiment!r}")
        values.update({k: v for k, v in cli.items() if v is not None})
        return cls.preset(experiment, **values)

    def validate(self) -> None:
        def need(cond, name, msg):
            if not cond:
                raise ConfigError(name, msg)

        need(self.experiment in EXPERIMENTS, "experiment", f"expected one of {EXPERIMENTS}")
        for name in ("kappa", "lr", "eps"):
            v = getattr(self, name)
            need(isinstance(v, (int, float)) and not isinstance(v, bool) and v == v, name, f"need a real number, got {v!r}")
        for name in ("n", "dim", "steps", "eval_every", "jobs"):
            v = getattr(self, name)
            need(isinstance(v, int) and not isinstance(v, bool), name, f"need an integer, got {v!r}")
        need(self.minibatch is None or (isinstance(self.minibatch, int) and not isinstance(self.minibatch, bool)),
             "minibatch", f"need an integer or null, got {self.minibatch!r}")
        need(isinstance(self.regs, (list, tuple)) and all(isinstance(r, str) for r in self.regs), "regs",
             f"need a list of regularizer strings, got {self.regs!r}")
        need(isinstance(self.seeds, (list, tuple)), "seeds", f"need a list of integers, got {self.seeds!r}")
        need(isinstance(self.betas, (list, tuple)) and len(self.betas) == 2
             and all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in self.betas),
             "betas", f"need two numbers, got {self.betas!r}")
        need(isinstance(self.deterministic, bool), "deterministic", f"need true/false, got {self.deterministic!r}")
        need(isinstance(self.out, str) and self.out != "", "out", f"need a nonempty path, got {self.out!r}")
        need(isinstance(self.n, int) and self.n >= 2, "n", f"need an integer >= 2, got {self.n!r}")
        need(isinstance(self.dim, int) and self.dim >= 2, "dim", f"need an integer >= 2, got {self.dim!r}")
        need(self.init in INITS, "init", f"expected one of {INITS}, got {self.init!r}")
        need(self.kappa >= 0, "kappa", f"must be nonnegative, got {self.kappa}")
        if self.init in ("clumped", "both"):
            need(self.kappa > 0, "kappa", "clumped initialization requires kappa > 0")
        need(self.optimizer in METHODS, "optimizer", f"expected one of {METHODS}, got {self.optimizer!r}")
        need(self.lr > 0, "lr", f"must be positive, got {self.lr}")
        self.betas = tuple(float(b) for b in self.betas)
        need(len(self.betas) == 2 and all(0 < b < 1 for b in self.betas), "betas", f"need two values in (0, 1), got {self.betas}")
        need(self.retraction in ("exp", "proj"), "retraction", f"expected 'exp' or 'proj', got {self.retraction!r}")
        need(self.adam_moments in ("point", "coordinate"), "adam_moments", f"expected 'point' or 'coordinate', got {self.adam_moments!r}")
        need(self.minibatch is None or self.minibatch >= 2, "minibatch", f"need >= 2 or null, got {self.minibatch}")
        need(isinstance(self.steps, int) and self.steps >= 1, "steps", f"need an integer >= 1, got {self.steps!r}")
        need(isinstance(self.eval_every, int) and self.eval_every >= 1, "eval_every", f"need an integer >= 1, got {self.eval_every!r}")
        need(len(self.seeds) >= 1 and all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in self.seeds), "seeds", f"need a nonempty list of nonnegative integers, got {self.seeds!r}")
        need(len(set(self.seeds)) == len(self.seeds), "seeds", "seeds must be distinct")
        need(isinstance(self.jobs, int) and self.jobs >= 1, "jobs", f"need an integer >= 1, got {self.jobs!r}")
        need(self.mean_direction == "e1", "mean_direction", "only the fixed axis 'e1' is supported")
        need(len(self.regs) >= 1, "regs", "need at least one regularizer")
        need(len(set(self.regs)) == len(self.regs), "regs", "regularizers must be distinct")
        for text in self.regs:
            try:
                parse_regularizer(text, self.minibatch)
            except ValueError as exc:
                raise ConfigError("regs", str(exc)) from None
        if self.experiment == "sliced-convergence":
            need(all(parse_regularizer(s).kind == "sliced" for s in self.regs), "regs",
                 "sliced-convergence only evaluates sliced regularizers")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["betas"] = list(self.betas)
        return d
