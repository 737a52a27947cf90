"""Continuum plus discrete spectral mass for the bounded built-in models."""

import argparse

from bandforge import CoefficientModel, normalization


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--depth", type=int, default=2000)
    parser.add_argument("--show-poles", type=int, default=5, help="list this many heaviest poles")
    args = parser.parse_args()
    for kind in ("eq14", "eq17", "eq19"):
        norm = normalization(CoefficientModel.builtin(kind), depth=args.depth)
        print(f"{kind}: continuum {norm.continuum_mass:.9f}  discrete {norm.discrete_mass:.9f}  "
              f"total {norm.total:.9f}  ({len(norm.poles)} poles)")
        for e, w in sorted(norm.poles, key=lambda p: -p[1])[: args.show_poles]:
            print(f"    E = {e:+.10f}  weight {w:.6g}")


if __name__ == "__main__":
    main()
