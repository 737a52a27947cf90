"""Write per-order zero snapshots (CSV) and print how many fall outside the bands."""

import argparse
from pathlib import Path

from bandforge import CoefficientModel, band_structure, classify_zeros, zeros


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="eq19")
    parser.add_argument("--orders", default="99,100,101,300,301,302")
    parser.add_argument("--out", default="zero_snapshots")
    args = parser.parse_args()

    model = CoefficientModel.builtin(args.model)
    bands = band_structure(model)
    out = Path(args.out)
    out.mkdir(exist_ok=True)
    for order in (int(x) for x in args.orders.split(",")):
        report = classify_zeros(zeros(model, order), bands)
        lines = ["order,zero,label"] + [f"{order},{x:.12g},{lab}" for x, lab in zip(report.zeros, report.labels)]
        (out / f"{args.model}_N{order}.csv").write_text("\n".join(lines) + "\n")
        off = [f"{x:.6f} {lab}" for x, lab in zip(report.zeros, report.labels) if not lab.startswith("band")]
        print(f"N={order} (class {order % bands.K}): {len(off)} outside bands: {', '.join(off)}")


if __name__ == "__main__":
    main()
