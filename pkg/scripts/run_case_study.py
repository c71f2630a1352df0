"""Two crossing aircraft: run the Target Window sweep and summarise conflicts.

Usage: python3 scripts/run_case_study.py [--scenario FILE] [--out DIR] [--threads N]
"""

import argparse
from pathlib import Path

import numpy as np

from reachavoid.cli import main as cli_main
from reachavoid.export import read_manifest

SCENARIO = Path(__file__).resolve().parents[1] / "src" / "reachavoid" / "scenarios" / "two_aircraft.scn"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scenario", type=Path, default=SCENARIO)
    p.add_argument("--out", type=Path, default=Path("case_study_out"))
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--record-every", type=int, default=10)
    args = p.parse_args()
    code = cli_main(["algorithm1", "--scenario", str(args.scenario), "--out", str(args.out),
                     "--threads", str(args.threads), "--record-every", str(args.record_every)])
    if code:
        raise SystemExit(code)
    m = read_manifest(args.out / "manifest.txt")
    for key in ("aircraft", "t0", "T", "dt", "steps", "conflict_events", "solve_seconds", "warnings"):
        print(f"{key:>16}: {m[key]}")
    rows = [line.split() for line in (args.out / "conflicts.txt").read_text().splitlines()
            if line and not line.startswith("#")]
    if rows:
        times = np.unique([float(r[0]) for r in rows])
        print(f"{'conflict times':>16}: {times[0]:.1f} .. {times[-1]:.1f} s ({len(times)} slices)")
    print(f"outputs in {args.out}")


if __name__ == "__main__":
    main()
