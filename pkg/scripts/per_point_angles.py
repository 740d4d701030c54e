"""Print per-point final minimum angles from a Tammes or ablation summary as a
whitespace table (one column per regularizer and seed), ready for gnuplot.

Example: python scripts/per_point_angles.py runs/tammes/summary.json
"""

import json
import sys


def columns(summary):
    for reg, entry in summary["regularizers"].items():
        if "seeds" in entry:
            for s in entry["seeds"]:
                yield f"{reg}/seed{s['seed']}", sorted(s["per_point_min_angle_deg"])
        else:
            for arm in ("radam", "projected-adam"):
                for s in entry[arm]:
                    yield f"{reg}/{arm}/seed{s['seed']}", sorted(s["per_point_min_angle_deg"])


def main(path):
    with open(path, encoding="utf-8") as fh:
        cols = list(columns(json.load(fh)))
    print("# rank " + " ".join(name for name, _ in cols))
    for i in range(len(cols[0][1])):
        print(i, " ".join(f"{vals[i]:.4f}" for _, vals in cols))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "runs/tammes/summary.json")
