"""Orthogonal polynomials of the three-term recursion, their zeros, and bound states.

The recursion is ``E P_n = a_n P_n + b_{n-1} P_{n-1} + b_n P_{n+1}`` with
``b_{-1} = 0`` and ``P_0 = 1``.  The first kind starts from
``P_1 = (E - a_0)/b_0``; a second kind swaps in another degree-one seed.

Zeros of ``P_N`` are the eigenvalues of the leading ``N x N`` block of the
tridiagonal matrix and are found by Sturm-count bisection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bandforge.coefficients import CoefficientModel
from bandforge.greens import DEFAULT_DEPTH, SecondKindSeed, band_structure, bound_state_weight
from bandforge.terminator import BandStructure

ZERO_TOL = 1e-12
RESCALE = 2.0**256


def _seed(model, kind, E):
    a, b = model.at(np.array([0]))
    a0, b0 = float(a[0]), float(b[0])
    if kind is None:
        return (E - a0) / b0
    return (kind.s * E + kind.t) / b0


def evaluate(model: CoefficientModel, n: int, E, kind: SecondKindSeed | None = None, scaled: bool = False,
             derivative: bool = False):
    """``P_n(E)`` by forward recursion.

    ``kind=None`` gives the first kind.  The recursion is carried as a
    mantissa with a power-of-two exponent so it never overflows; with
    ``scaled=True`` the pair ``(mantissa, exponent)`` is returned, otherwise
    the product (which may be ``inf``).  ``derivative=True`` also returns
    ``dP_n/dE`` sharing the same exponent.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    scalar = np.ndim(E) == 0
    E = np.atleast_1d(np.asarray(E, dtype=float))
    exp = np.zeros(E.shape, dtype=np.int64)
    p_prev, p = np.zeros_like(E), np.ones_like(E)
    d_prev, d = np.zeros_like(E), np.zeros_like(E)
    if n >= 1:
        a, b = model.arrays(n)
        b0 = b[0]
        p_prev, p = p, _seed(model, kind, E)
        d_prev, d = d, np.full_like(E, (1.0 if kind is None else kind.s) / b0)
        for k in range(1, n):
            p_next = ((E - a[k]) * p - b[k - 1] * p_prev) / b[k]
            d_next = (p + (E - a[k]) * d - b[k - 1] * d_prev) / b[k]
            p_prev, p, d_prev, d = p, p_next, d, d_next
            big = np.maximum(np.abs(p), np.abs(d)) > RESCALE
            if np.any(big):
                shift = np.where(big, np.frexp(np.maximum(np.abs(p), np.abs(d)))[1], 0)
                p, p_prev = np.ldexp(p, -shift), np.ldexp(p_prev, -shift)
                d, d_prev = np.ldexp(d, -shift), np.ldexp(d_prev, -shift)
                exp += shift
    if scaled:
        out = (p, exp, d) if derivative else (p, exp)
        return tuple(x[0] for x in out) if scalar else out
    with np.errstate(over="ignore"):
        val = np.ldexp(p, exp)
        dval = np.ldexp(d, exp)
    if scalar:
        return (float(val[0]), float(dval[0])) if derivative else float(val[0])
    return (val, dval) if derivative else val


def sturm_count(a, b, x) -> np.ndarray:
    """Number of eigenvalues below each ``x`` of the tridiagonal ``(a, b)``."""
    x = np.asarray(x, dtype=float)
    b2 = np.asarray(b, dtype=float) ** 2
    pivmin = 1e-14 * (1.0 + np.abs(x))
    d = a[0] - x
    d = np.where(np.abs(d) < 1e-300, pivmin, d)
    count = (d < 0).astype(np.int64)
    for i in range(1, len(a)):
        d = a[i] - x - b2[i - 1] / d
        d = np.where(np.abs(d) < 1e-300, pivmin, d)
        count += d < 0
    return count


def tridiagonal_eigenvalues(a, b, tol: float = ZERO_TOL) -> np.ndarray:
    """All eigenvalues of the symmetric tridiagonal matrix, ascending."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    N = len(a)
    if N == 0:
        return np.empty(0)
    radius = np.abs(np.concatenate([[0.0], b])) + np.abs(np.concatenate([b, [0.0]]))
    lo = np.full(N, np.min(a - radius) - tol)
    hi = np.full(N, np.max(a + radius) + tol)
    k = np.arange(N)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        below = sturm_count(a, b, mid) > k
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)


def zeros(model: CoefficientModel, N: int, kind: SecondKindSeed | None = None) -> np.ndarray:
    """Sorted zeros of the order-``N`` polynomial.

    A second-kind seed ``(s, t)`` with ``s > 0`` is equivalent to replacing
    ``a_0 -> -t/s`` and ``b_0 -> b_0/sqrt(s)`` in the matrix.  Other seeds
    give a non-symmetric matrix whose eigenvalues may be complex; those are
    returned sorted by real part.
    """
    if N < 1:
        raise ValueError("order must be at least 1")
    a, b = model.arrays(N)
    a = a.copy()
    b = b[: N - 1].copy()
    if kind is not None:
        if kind.s > 0:
            a[0] = -kind.t / kind.s
            if N > 1:
                b[0] /= np.sqrt(kind.s)
        else:
            J = np.diag(a) + np.diag(b, 1) + np.diag(b, -1)
            J[0, 0] = -kind.t / kind.s if kind.s else np.inf
            if N > 1:
                J[0, 1] = b[0] / kind.s
            ev = np.linalg.eigvals(J)
            ev = ev[np.argsort(ev.real)]
            return ev.real if np.all(np.abs(ev.imag) < 1e-12) else ev
    return tridiagonal_eigenvalues(a, b)


@dataclass
class ZeroReport:
    order: int
    zeros: np.ndarray
    labels: list[str]

    @property
    def gap_zero_count(self) -> int:
        return sum(lab.startswith("gap") for lab in self.labels)

    @property
    def outside_count(self) -> int:
        return sum(not lab.startswith("band") for lab in self.labels)


def classify_zeros(zs, bands: BandStructure, edge_tol: float = 1e-8) -> ZeroReport:
    """Label each zero ``band(j)``, ``gap(j)`` or ``exterior``.

    Zeros within ``edge_tol`` of a band edge count as in the band.
    """
    zs = np.asarray(zs, dtype=float)
    labels = []
    for x in zs:
        where, j = bands.locate(float(x), edge_tol)
        labels.append(f"{where}({j})" if j is not None else where)
    return ZeroReport(len(zs), zs, labels)


@dataclass
class Candidate:
    """A gap zero followed across orders of one or more residue classes."""

    energy: float
    gap: int
    classes: list[int]
    history: dict[int, list[float]]
    stable: bool
    weight: float | None = None


@dataclass
class BoundStateReport:
    orders: dict[int, list[int]]
    candidates: list[Candidate] = field(default_factory=list)
    tol_stab: float = 1e-6

    @property
    def system_bound_states(self) -> list[Candidate]:
        K = len(self.orders)
        return [c for c in self.candidates if c.stable and len(c.classes) == K]

    @property
    def class_only(self) -> list[Candidate]:
        K = len(self.orders)
        return [c for c in self.candidates if c.stable and len(c.classes) < K]

    def stable_counts(self) -> dict[int, int]:
        """Stable gap zeros per residue class, shared ones included."""
        counts = {r: 0 for r in self.orders}
        for c in self.candidates:
            if c.stable:
                for r in c.classes:
                    counts[r] += 1
        return counts


def _gap_zeros(model, order, bands, edge_tol):
    report = classify_zeros(zeros(model, order), bands, edge_tol)
    return [(float(x), int(lab[4:-1])) for x, lab in zip(report.zeros, report.labels) if lab.startswith("gap")]


def bound_states(model: CoefficientModel, base_order: int = 300, steps: int = 4, tol_stab: float = 1e-6,
                 depth: int = DEFAULT_DEPTH, edge_tol: float = 1e-8, bands: BandStructure | None = None,
                 weights: bool = True) -> BoundStateReport:
    """Gap zeros that stay put as the polynomial order grows.

    Orders are split by residue ``order mod K``; within a class the zeros at
    ``steps`` successive orders are tracked and a track is stable when its
    spread stays below ``tol_stab``.  Stable tracks found in every class
    within ``tol_stab`` of each other are the bound states of the system.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if bands is None:
        bands = band_structure(model)
    K = bands.K
    orders = {}
    for r in range(K):
        first = base_order + (r - base_order) % K
        orders[r] = [first + j * K for j in range(steps)]
    report = BoundStateReport(orders, tol_stab=tol_stab)
    if K == 1:
        return report

    tracks = []  # (class, gap, history, stable)
    for r, ords in orders.items():
        per_order = [_gap_zeros(model, o, bands, edge_tol) for o in ords]
        for x0, gap in per_order[0]:
            hist = [x0]
            for zs in per_order[1:]:
                same_gap = [x for x, g in zs if g == gap]
                if not same_gap:
                    break
                hist.append(min(same_gap, key=lambda x: abs(x - hist[-1])))
            stable = len(hist) == len(ords) and max(hist) - min(hist) < tol_stab
            tracks.append((r, gap, hist, stable))

    used = [False] * len(tracks)
    for i, (r, gap, hist, stable) in enumerate(tracks):
        if used[i]:
            continue
        used[i] = True
        members = {r: hist}
        if stable:
            for j in range(i + 1, len(tracks)):
                r2, gap2, hist2, stable2 = tracks[j]
                if used[j] or not stable2 or gap2 != gap or r2 in members:
                    continue
                if abs(hist2[-1] - hist[-1]) < tol_stab:
                    members[r2] = hist2
                    used[j] = True
        energy = float(np.mean([h[-1] for h in members.values()]))
        report.candidates.append(Candidate(energy, gap, sorted(members), members, stable))

    if weights:
        for c in report.candidates:
            if c.stable and len(c.classes) == K:
                c.weight = bound_state_weight(model, c.energy, depth)
    report.candidates.sort(key=lambda c: c.energy)
    return report
