"""Band edges of the built-in models next to their published reference values."""

import numpy as np

from bandforge import CoefficientModel, asymptotics, band_boundaries

REFERENCE = {
    "eq14": [-1.0, 1.0],
    "eq17": [-0.2762087348, 0.2938447187, 0.7061552813, 1.2762087348],
    "eq19": [-1.0360472248, -0.7207393595, -0.2739286325, 0.4365102472, 0.6495369776, 1.0446679919],
    "eq21": [0.2, 0.8],
}


def main():
    for kind, ref in REFERENCE.items():
        bands = band_boundaries(asymptotics(CoefficientModel.builtin(kind)))
        edges = np.array([e for e in bands.boundaries if np.isfinite(e)])
        err = np.max(np.abs(edges - np.array(ref)))
        print(f"{kind:5s} K={bands.K}  " + " ".join(f"{e:+.10f}" for e in edges) + f"   max dev {err:.1e}")


if __name__ == "__main__":
    main()
