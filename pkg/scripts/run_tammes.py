"""Run the tammes experiment with its preset; extra flags are passed to ``disperse``.

Example: python scripts/run_tammes.py --seeds 0 --out runs
"""

import sys

from spheredisp.harness.cli import main

if __name__ == "__main__":
    sys.exit(main(["tammes", *sys.argv[1:]]))
