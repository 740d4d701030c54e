"""``disperse <experiment>`` command line entry point."""

from __future__ import annotations

import argparse
import json
import sys

from .config import EXPERIMENTS, ConfigError, ExperimentConfig
from .experiments import run


def _seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None


def _betas(text: str) -> tuple[float, float]:
    try:
        parts = tuple(float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"betas must be two comma-separated floats, got {text!r}") from None
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"betas must be two comma-separated floats, got {text!r}")
    return parts


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disperse", description="Run spherical dispersion experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="JSON file with configuration values (flags override it)")
    p.add_argument("--n", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--init", choices=("uniform", "clumped", "both"))
    p.add_argument("--kappa", type=float)
    p.add_argument("--reg", action="append", dest="regs", metavar="SPEC",
                   help="regularizer, e.g. mm:geodesic, mhe:rbf-chordal:1, sliced:axis:13 (repeatable)")
    p.add_argument("--optimizer", choices=("rsgd", "radam", "projected-adam"))
    p.add_argument("--lr", type=float)
    p.add_argument("--betas", type=_betas)
    p.add_argument("--retraction", choices=("exp", "proj"))
    p.add_argument("--adam-moments", choices=("point", "coordinate"))
    p.add_argument("--batch", type=int, dest="minibatch", help="minibatch size for point subsampling")
    p.add_argument("--steps", type=int)
    p.add_argument("--eval-every", type=int)
    p.add_argument("--seeds", type=_seeds, help="comma-separated seeds (default 0,1,2)")
    p.add_argument("--out", help="output directory (default runs/)")
    p.add_argument("--deterministic", action="store_true", default=None,
                   help="write wall_ms=0 so reruns are byte-identical")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    return p


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    experiment = args.pop("experiment")
    json_path = args.pop("config")
    try:
        cfg = ExperimentConfig.from_sources(experiment, json_path, **args)
    except ConfigError as exc:
        print(f"disperse: invalid configuration: {exc}", file=sys.stderr)
        return 2
    summary = run(cfg)
    print(json.dumps(_brief(experiment, summary), indent=2))
    return 0


def _brief(experiment: str, summary: dict) -> dict:
    if experiment == "tammes":
        return {"optimum_deg": summary["optimum_deg"],
                "median_final_dmin_deg": {k: v["median_final_dmin_deg"] for k, v in summary["regularizers"].items()}}
    if experiment == "synthetic":
        return {mode: {k: v["final_svar"] for k, v in regs.items()} for mode, regs in summary["inits"].items()}
    if experiment == "ablation-opt":
        return {k: v["riemannian_wins"] for k, v in summary["regularizers"].items()}
    return summary


if __name__ == "__main__":
    sys.exit(main())
