"""Command-line front end.

Subcommands: ``bands``, ``density``, ``zeros``, ``boundstates``.

Models are picked with ``--model``: a built-in family name (``one-band``,
``two-band``, ``three-band``, ``two-band-unbounded``, or the short aliases
``eq14``, ``eq17``, ``eq19``, ``eq21``) or the path of a JSON model file::

    {
      "kind": "custom",
      "head": [[a0, b0], [a1, b1], ...],
      "tail": {"K": 1, "A": [0.0], "B": [0.5]}
    }

A file may instead name a built-in family with ``"kind"`` and give its
parameters under ``"params"`` (``{"alpha": .., "beta": .., "gamma": ..}``).
Unknown keys are rejected.

Parameters ``--alpha/--beta/--gamma`` feed the family formulas:

* one-band: ``a_n = gamma`` for n = 0, 1 else 0;
  ``b_n = |(n+alpha)/(n+alpha-1)|^beta / 2``
* two-band: ``a = gamma, 1-gamma`` on even/odd n;
  ``b_2m = beta/2 ((m+1/alpha)/(m+alpha))^gamma``,
  ``b_2m+1 = alpha/2 ((m+beta)/(m+1/beta))^(1-gamma)``
* two-band-unbounded: as two-band for ``a``;
  ``b_2m = gamma sqrt(2m+alpha)``, ``b_2m+1 = gamma sqrt(2m+beta)``
* three-band: no parameters.

Exit codes: 0 success, 1 invalid model or input, 2 merged bands,
3 no gaps to hold bound states.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from bandforge.coefficients import (
    ALIASES,
    BUILTIN_DEFAULTS,
    CoefficientModel,
    asymptotics,
    canonical_kind,
    validate_model,
)
from bandforge.errors import BandforgeError, InvalidModelError, MergedBandsError
from bandforge.greens import SecondKindSeed, default_depth, density_curve
from bandforge.polynomials import bound_states, classify_zeros, zeros
from bandforge.terminator import band_boundaries

EXIT_INVALID = 1
EXIT_MERGED = 2
EXIT_NO_GAPS = 3

_MODEL_KEYS = {"kind", "params", "head", "tail"}
_TAIL_KEYS = {"K", "A", "B"}


def load_model_file(path) -> CoefficientModel:
    """Parse a JSON model file (strict: unknown keys raise)."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidModelError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InvalidModelError(f"{path}: top level must be an object")
    extra = set(doc) - _MODEL_KEYS
    if extra:
        raise InvalidModelError(f"{path}: unknown fields {sorted(extra)}")
    if "kind" not in doc:
        raise InvalidModelError(f"{path}: missing 'kind'")
    kind = canonical_kind(doc["kind"])
    params = doc.get("params", {}) or {}
    if not isinstance(params, dict):
        raise InvalidModelError(f"{path}: 'params' must be an object")
    if kind != "custom":
        if "head" in doc or "tail" in doc:
            raise InvalidModelError(f"{path}: 'head'/'tail' only apply to custom models")
        return CoefficientModel.builtin(kind, **params)
    if params:
        raise InvalidModelError(f"{path}: custom models take no params")
    tail = doc.get("tail")
    if not isinstance(tail, dict):
        raise InvalidModelError(f"{path}: custom model needs a 'tail' object")
    extra = set(tail) - _TAIL_KEYS
    missing = _TAIL_KEYS - set(tail)
    if extra or missing:
        raise InvalidModelError(f"{path}: tail must have exactly K, A, B (extra {sorted(extra)}, missing {sorted(missing)})")
    if len(tail["A"]) != tail["K"] or len(tail["B"]) != tail["K"]:
        raise InvalidModelError(f"{path}: tail K={tail['K']} does not match lengths of A and B")
    head = doc.get("head", [])
    if not all(isinstance(p, list) and len(p) == 2 for p in head):
        raise InvalidModelError(f"{path}: head must be a list of [a, b] pairs")
    return CoefficientModel.custom(head, tail["A"], tail["B"])


def resolve_model(args) -> CoefficientModel:
    name = args.model
    params = {k: getattr(args, k) for k in ("alpha", "beta", "gamma") if getattr(args, k) is not None}
    if name in BUILTIN_DEFAULTS or name in ALIASES:
        kind = canonical_kind(name)
        allowed = set(BUILTIN_DEFAULTS[kind])
        if set(params) - allowed:
            raise InvalidModelError(f"model {kind} takes no parameters {sorted(set(params) - allowed)}")
        model = CoefficientModel.builtin(kind, **params)
    elif Path(name).exists():
        if params:
            raise InvalidModelError("--alpha/--beta/--gamma cannot be combined with a model file")
        model = load_model_file(name)
    else:
        raise InvalidModelError(f"unknown model {name!r} (not a built-in name and no such file)")
    validate_model(model)
    return model


def parse_orders(text: str) -> list[int]:
    orders = [int(x) for x in text.split(",") if x.strip()]
    if not orders or min(orders) < 1:
        raise InvalidModelError("--orders needs positive integers, e.g. 10,20,30")
    return orders


def parse_seed(text: str, a0: float) -> SecondKindSeed:
    """``"s,t"`` where either number may carry an ``a0`` suffix (``3a0`` = 3 * a_0)."""

    def number(tok):
        tok = tok.strip()
        if tok.endswith("a0"):
            coef = tok[:-2]
            return (float(coef) if coef not in ("", "+", "-") else float(coef + "1")) * a0
        return float(tok)

    parts = text.split(",")
    if len(parts) != 2:
        raise InvalidModelError("--second-kind expects 's,t', for example -0.5,3a0")
    return SecondKindSeed(number(parts[0]), number(parts[1]))


def _fmt(x: float, digits: int = 12) -> str:
    return f"{x:.{digits}g}"


def _fixed(x: float) -> str:
    return f"{x:.10f}" if math.isfinite(x) else ("-inf" if x < 0 else "inf")


@dataclass
class Output:
    path: str | None

    def __enter__(self):
        self.fh = open(self.path, "w", newline="\n") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()


def cmd_bands(args, model) -> int:
    try:
        bands = band_boundaries(asymptotics(model))
    except MergedBandsError as exc:
        print(f"merged bands: {exc}; edges found at {[_fixed(r) for r in exc.roots]}", file=sys.stderr)
        return EXIT_MERGED
    with Output(args.out) as out:
        if args.format == "csv":
            out.write("kind,index,lower,upper\n")
            for j, (lo, hi) in enumerate(bands.bands, 1):
                out.write(f"band,{j},{_fixed(lo)},{_fixed(hi)}\n")
            for j, (lo, hi) in enumerate(bands.gaps, 1):
                out.write(f"gap,{j},{_fixed(lo)},{_fixed(hi)}\n")
        else:
            out.write(f"model: {model.model_id}\n")
            out.write(f"K = {bands.K}\n")
            out.write("boundaries: " + " ".join(_fixed(e) for e in bands.boundaries) + "\n")
            for j, (lo, hi) in enumerate(bands.bands, 1):
                out.write(f"band {j}: [{_fixed(lo)}, {_fixed(hi)}]\n")
            for j, (lo, hi) in enumerate(bands.gaps, 1):
                out.write(f"gap {j}:  ({_fixed(lo)}, {_fixed(hi)})\n")
    return 0


def _default_window(model):
    bands = band_boundaries(asymptotics(model))
    lo, hi = bands.boundaries[0], bands.boundaries[-1]
    if not math.isfinite(lo):
        lo = bands.boundaries[1] - 2.0
    if not math.isfinite(hi):
        hi = bands.boundaries[-2] + 2.0
    pad = 0.1 * (hi - lo)
    return lo - pad, hi + pad


def cmd_density(args, model) -> int:
    e_min, e_max = args.emin, args.emax
    if e_min is None or e_max is None:
        lo, hi = _default_window(model)
        e_min = lo if e_min is None else e_min
        e_max = hi if e_max is None else e_max
    seed = None
    if args.second_kind:
        a0 = float(model.at(np.array([0]))[0][0])
        seed = parse_seed(args.second_kind, a0)
    curve = density_curve(model, e_min, e_max, args.points, args.depth, second_kind=seed)
    with Output(args.out) as out:
        if args.format == "text":
            label = "rho_hat" if seed else "rho"
            out.write(f"# model: {model.model_id}, depth {curve.depth}\n")
            out.write(f"{'E':>20} {label:>20}\n")
            for e, r, flag in zip(curve.grid, curve.rho, curve.flagged):
                out.write(f"{_fmt(e):>20} {_fmt(r):>20}" + ("  (nudged off pole)" if flag else "") + "\n")
        else:
            out.write("E,rho\n")
            for e, r, flag in zip(curve.grid, curve.rho, curve.flagged):
                out.write(f"{_fmt(e)},{_fmt(r)}" + (",# nudged off pole" if flag else "") + "\n")
    return 0


def cmd_zeros(args, model) -> int:
    bands = band_boundaries(asymptotics(model))
    orders = parse_orders(args.orders)
    with Output(args.out) as out:
        if args.format == "csv":
            out.write("order,zero,label\n")
        for order in orders:
            rep = classify_zeros(zeros(model, order), bands, args.edge_tol)
            if args.format == "csv":
                for x, lab in zip(rep.zeros, rep.labels):
                    out.write(f"{order},{_fmt(x)},{lab}\n")
            else:
                outside = [f"{_fixed(x)} [{lab}]" for x, lab in zip(rep.zeros, rep.labels) if not lab.startswith("band")]
                out.write(f"order {order}: {rep.order} zeros, {rep.gap_zero_count} in gaps, "
                          f"{rep.outside_count - rep.gap_zero_count} exterior\n")
                for item in outside:
                    out.write(f"    {item}\n")
    return 0


def _class_name(r, K):
    if K == 2:
        return "even" if r == 0 else "odd"
    return f"{r} mod {K}"


def cmd_boundstates(args, model) -> int:
    bands = band_boundaries(asymptotics(model))
    if bands.K == 1:
        print("single band: there are no gaps to hold bound states", file=sys.stderr)
        return EXIT_NO_GAPS
    rep = bound_states(model, args.n0, args.steps, args.tol_stab, args.depth, args.edge_tol, bands=bands)
    K = bands.K
    system = rep.system_bound_states
    only = rep.class_only
    with Output(args.out) as out:
        if args.format == "csv":
            out.write("energy,gap,classes,stable,system,weight\n")
            for c in rep.candidates:
                classes = " ".join(str(r) for r in c.classes)
                weight = "" if c.weight is None else _fmt(c.weight)
                out.write(f"{_fmt(c.energy)},{c.gap},{classes},{int(c.stable)},"
                          f"{int(c in system)},{weight}\n")
            return 0
        orders = ", ".join(f"{_class_name(r, K)}: {o}" for r, o in rep.orders.items())
        out.write(f"model: {model.model_id}\norders {orders}\n")
        if system:
            out.write(f"{len(system)} system bound state{'s' if len(system) > 1 else ''}:\n")
            for c in system:
                out.write(f"    E = {_fixed(c.energy)}  weight = {_fmt(c.weight, 6)}  gap {c.gap}\n")
        else:
            out.write("no system bound state\n")
        names = [", ".join(_class_name(r, K) for r in c.classes) for c in only]
        out.write(f"{len(only)} class-only stable zero{'' if len(only) == 1 else 's'}"
                  + (f" ({'; '.join(names)})" if only else "") + "\n")
        for c, name in zip(only, names):
            out.write(f"    E = {_fixed(c.energy)}  gap {c.gap}  classes: {name}\n")
        counts = rep.stable_counts()
        out.write("stable gap zeros per class: " + "/".join(str(counts[r]) for r in sorted(counts)) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="built-in family name or JSON model file")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--depth", type=int, default=None,
                        help="continued-fraction depth (default: $BANDFORGE_DEPTH or 2000)")
    common.add_argument("--out", help="write to this file instead of stdout")
    common.add_argument("--format", choices=("csv", "text"), default=None)
    common.add_argument("--edge-tol", type=float, default=1e-8)

    parser = argparse.ArgumentParser(prog="bandforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bands", parents=[common], help="band edges, bands and gaps")
    p = sub.add_parser("density", parents=[common], help="density of states as CSV")
    p.add_argument("--emin", type=float)
    p.add_argument("--emax", type=float)
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--second-kind", metavar="S,T",
                   help="seed (s*E + t)/b0; t may be written as a multiple of a0, e.g. --second-kind=-0.5,3a0")
    p = sub.add_parser("zeros", parents=[common], help="classified polynomial zeros")
    p.add_argument("--orders", default="10,20,30")
    p = sub.add_parser("boundstates", parents=[common], help="order-stable gap zeros")
    p.add_argument("--n0", type=int, default=300)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--tol-stab", type=float, default=1e-6)
    return parser


_DEFAULT_FORMAT = {"bands": "text", "density": "csv", "zeros": "text", "boundstates": "text"}
_COMMANDS = {"bands": cmd_bands, "density": cmd_density, "zeros": cmd_zeros, "boundstates": cmd_boundstates}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = _DEFAULT_FORMAT[args.command]
    if args.depth is None:
        args.depth = default_depth()
    for name in ("depth", "points"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            print(f"--{name} must be positive", file=sys.stderr)
            return EXIT_INVALID
    for name in ("tol_stab", "edge_tol"):
        value = getattr(args, name, 0.5)
        if not 0 < value < 1:
            print(f"--{name.replace('_', '-')} must lie in (0, 1)", file=sys.stderr)
            return EXIT_INVALID
    try:
        model = resolve_model(args)
        return _COMMANDS[args.command](args, model)
    except (BandforgeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
