"""Density-of-states CSVs for every built-in model, plus the alternative-seed curve."""

import argparse
from pathlib import Path

from bandforge.cli import main as cli


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="density_curves")
    parser.add_argument("--points", default="1001")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(exist_ok=True)
    for kind in ("eq14", "eq17", "eq19", "eq21"):
        cli(["density", "--model", kind, "--points", args.points, "--out", str(out / f"{kind}.csv")])
    cli(["density", "--model", "eq14", "--points", args.points, "--second-kind=-0.5,3a0",
         "--out", str(out / "eq14_second_kind.csv")])
    print(f"wrote {len(list(out.glob('*.csv')))} files to {out}/")


if __name__ == "__main__":
    main()
