#!/usr/bin/env python3
"""Run a short Monte Carlo batch on the bundled two-cell + radar scenario
and print the per-trial summary."""

import sys
from pathlib import Path

from radarcoex.cli import cmd_simulate

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    scenario = ROOT / "scenarios" / "two_cell_one_radar.json"
    out = ROOT / "out" / "demo"
    manifest = cmd_simulate(str(scenario), trials=4, seed0=0, out_dir=str(out), workers=1)
    print(f"wrote {len(manifest.emitted_files)} files to {manifest.outputs}")
    print((out / "summary.csv").read_text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
