"""Green's function ``G00(z)``, density of states and spectral sum rule.

``G00`` is evaluated as a finite continued fraction over the first ``depth``
levels, closed by the periodic-tail terminator.  On the real axis the
terminator already carries the ``E + i0`` limit, so no broadening is used.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from bandforge.coefficients import (
    Asymptotics,
    CoefficientModel,
    asymptotics,
    local_asymptotics,
)
from bandforge.errors import (
    NegativeDensityError,
    PivotBreakdownError,
    SecondKindPoleError,
)
from bandforge.terminator import BandStructure, band_boundaries, inverse_terminator

DEFAULT_DEPTH = 2000
TINY = 1e-300
CLAMP = 1e-10
WEIGHT_FLOOR = -1e-8
RICHARDSON_EPS = (1e-4, 1e-5, 1e-6)


def default_depth() -> int:
    """``BANDFORGE_DEPTH`` if set, else :data:`DEFAULT_DEPTH`."""
    value = os.environ.get("BANDFORGE_DEPTH")
    return int(value) if value else DEFAULT_DEPTH


def effective_depth(model: CoefficientModel, depth: int) -> int:
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if model.kind == "custom":
        # the declared tail is exact past the head, so never truncate inside it
        return max(depth, model.n_head)
    return depth


def closure(model: CoefficientModel, depth: int) -> Asymptotics:
    """Periodic tail used to close the continued fraction at ``depth``."""
    asym = asymptotics(model)
    if asym.unbounded:
        return local_asymptotics(model, depth, asym.K)
    return asym


def band_structure(model: CoefficientModel, depth: int | None = None) -> BandStructure:
    asym = asymptotics(model)
    if asym.unbounded and depth is not None:
        return band_boundaries(closure(model, depth))
    return band_boundaries(asym)


def _bottom(model, z, depth, side):
    """``w_{N-1} = -1/(z - a_{N-1} + b_{N-1}^2 T)`` and its breakdown mask."""
    a, b = model.arrays(depth)
    u = inverse_terminator(closure(model, depth), z, side, phase=depth)
    den = u * (z - a[-1]) + b[-1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        w = -u / den
        broke = np.abs(den) < TINY * np.maximum(np.abs(u), 1.0)
    return w, broke


def _fraction(model, z, depth, side, with_derivative=False):
    depth = effective_depth(model, depth)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    a, b = model.arrays(depth)
    w, broke = _bottom(model, z, depth, side)
    if with_derivative:
        h = 1e-6 * np.maximum(1.0, np.abs(z))
        wp = (_bottom(model, z + h, depth, side)[0] - _bottom(model, z - h, depth, side)[0]) / (2 * h)
    b2 = b * b
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for n in range(depth - 2, -1, -1):
            den = z - a[n] + b2[n] * w
            broke |= np.abs(den) < TINY
            w = -1.0 / den
            if with_derivative:
                wp = w * w * (1.0 + b2[n] * wp)
    broke &= z.imag == 0
    if with_derivative:
        return w, broke, wp
    return w, broke


def g00(model: CoefficientModel, z, depth: int = DEFAULT_DEPTH, side: str = "above"):
    """Diagonal resolvent element ``<0|(H - z)^-1|0>``.

    ``z`` may be a scalar or an array.  Real ``z`` is read as ``E + i0``
    (``side="above"``) or ``E - i0``.  Hitting a pole exactly on the real
    axis raises :class:`PivotBreakdownError`.
    """
    scalar = np.ndim(z) == 0
    w, broke = _fraction(model, z, depth, side)
    if np.any(broke):
        where = np.atleast_1d(np.asarray(z))[broke]
        raise PivotBreakdownError(f"continued fraction hit a pole at z={where[:5]}; offset z off the real axis")
    return complex(w[0]) if scalar else w


def _rho_from_g(g, strict=True):
    rho = np.asarray(g).imag / math.pi
    if strict and np.any(rho < -CLAMP):
        raise NegativeDensityError(f"negative density {rho.min():.3g}: terminator branch is wrong")
    return np.where(rho < 0, 0.0, rho) + 0.0


def density(model: CoefficientModel, E, depth: int = DEFAULT_DEPTH):
    """Density of states ``Im G00(E + i0) / pi``."""
    scalar = np.ndim(E) == 0
    g = g00(model, np.asarray(E, dtype=float), depth, "above")
    rho = _rho_from_g(g)
    return float(rho[()] if np.ndim(rho) == 0 else rho[0]) if scalar else rho


@dataclass
class DensityCurve:
    grid: np.ndarray
    rho: np.ndarray
    depth: int
    model_id: str
    asymptotics: Asymptotics
    flagged: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.flagged is None:
            self.flagged = np.zeros(len(self.grid), dtype=bool)


def density_curve(model: CoefficientModel, e_min: float, e_max: float, points: int, depth: int = DEFAULT_DEPTH,
                  second_kind: SecondKindSeed | None = None) -> DensityCurve:
    """Density sampled on a uniform grid.

    Grid points within 1e-9 of a pole of ``G00`` are moved by half a grid
    step and flagged, since the density there is a delta function.
    """
    if not e_min < e_max:
        raise ValueError("e_min must be below e_max")
    if points < 2:
        raise ValueError("need at least two grid points")
    grid = np.linspace(e_min, e_max, points)
    step = grid[1] - grid[0]
    g, broke, gp = _fraction(model, grid, depth, "above", with_derivative=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        near_pole = broke | ((np.abs(g) > 1e3) & (np.abs(g / gp) < 1e-9))
    if np.any(near_pole):
        grid = np.where(near_pole, grid + 0.5 * step, grid)
    if second_kind is None:
        rho = density(model, grid, depth)
    else:
        rho = density_second_kind(model, second_kind, grid, depth)
    return DensityCurve(grid, np.asarray(rho), effective_depth(model, depth), model.model_id,
                        closure(model, depth), near_pole)


@dataclass(frozen=True)
class SecondKindSeed:
    """Alternative degree-one polynomial ``(s*E + t) / b0``."""

    s: float
    t: float

    @classmethod
    def first_kind(cls, model: CoefficientModel) -> SecondKindSeed:
        a0 = float(model.at(np.array([0]))[0][0])
        return cls(1.0, -a0)


def density_second_kind(model: CoefficientModel, seed: SecondKindSeed, E, depth: int = DEFAULT_DEPTH):
    """Density attached to polynomials seeded with ``seed`` instead of ``(E - a0)/b0``.

    ``rho / |1 + b0 (P1 - P1hat) G00(E + i0)|^2`` with
    ``b0 (P1 - P1hat) = (E - a0) - (s E + t)``.
    """
    scalar = np.ndim(E) == 0
    E = np.atleast_1d(np.asarray(E, dtype=float))
    a0 = float(model.at(np.array([0]))[0][0])
    g = g00(model, E, depth, "above")
    rho = _rho_from_g(g)
    shift = (E - a0) - (seed.s * E + seed.t)
    den = np.abs(1.0 + shift * g) ** 2
    if np.any(den < TINY):
        raise SecondKindPoleError(f"second-kind denominator vanishes at E={E[den < TINY][:5]}")
    out = rho / den
    return float(out[0]) if scalar else out


def bound_state_weight(model: CoefficientModel, E_b: float, depth: int = DEFAULT_DEPTH) -> float:
    """Spectral weight carried by a pole of ``G00`` at ``E_b``.

    ``eps * Im G00(E_b + i eps)`` at eps = 1e-4, 1e-5, 1e-6, extrapolated to
    eps -> 0 through the quadratic in eps that fits all three values.
    Returns ~0 when ``E_b`` is not a pole.
    """
    eps = np.array(RICHARDSON_EPS)
    g = g00(model, E_b + 1j * eps, depth)
    f = eps * g.imag
    coef = np.polyfit(eps, f, 2)
    w = float(coef[-1])
    if w < WEIGHT_FLOOR:
        raise NegativeDensityError(f"negative spectral weight {w:.3g} at E={E_b}")
    return min(max(w, 0.0), 1.0)


def _outside_bands(model, depth, bands: BandStructure):
    """Real intervals with no continuum: gaps plus the two exterior stretches."""
    a, b = model.arrays(depth)
    asym = closure(model, depth)
    lower = [a[i] - (b[i - 1] if i else 0.0) - b[i] for i in range(depth)]
    upper = [a[i] + (b[i - 1] if i else 0.0) + b[i] for i in range(depth)]
    K = asym.K
    for k in range(K):
        lower.append(asym.A[k] - asym.B[k - 1] - asym.B[k])
        upper.append(asym.A[k] + asym.B[k - 1] + asym.B[k])
    lo, hi = min(lower) - 0.1, max(upper) + 0.1
    edges = bands.boundaries
    spans = []
    if lo < edges[0]:
        spans.append((lo, edges[0]))
    spans.extend(bands.gaps)
    if edges[-1] < hi:
        spans.append((edges[-1], hi))
    return spans


def _scan_grid(lo, hi, per_side):
    half = 0.5 * (hi - lo)
    d = np.geomspace(1e-13 * max(1.0, abs(lo), abs(hi)), half, per_side)
    return np.unique(np.concatenate([lo + d, hi - d]))


def _real_g(model, E, depth):
    return _fraction(model, E, depth, "above")[0].real


def find_poles(model: CoefficientModel, depth: int = DEFAULT_DEPTH, per_side: int = 4_000,
               bands: BandStructure | None = None) -> list[tuple[float, float]]:
    """Poles of ``G00`` off the continuum, as ``(energy, weight)`` pairs.

    Between poles ``G00`` increases along the real axis, so a pole shows up
    as a ``+ -> -`` sign flip on a grid that is geometrically refined toward
    every band edge.  Each bracket is bisected and the residue is read off as
    ``G^2 / G'``, averaged over both sides of the pole.
    """
    depth = effective_depth(model, depth)
    if bands is None:
        bands = band_structure(model, depth)
    brackets = []
    for lo, hi in _outside_bands(model, depth, bands):
        x = _scan_grid(lo, hi, per_side)
        g = _real_g(model, x, depth)
        flips = np.nonzero((g[:-1] > 0) & (g[1:] < 0))[0]
        brackets.extend((x[i], x[i + 1]) for i in flips)
    if not brackets:
        return []
    lo = np.array([p[0] for p in brackets])
    hi = np.array([p[1] for p in brackets])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        g = _real_g(model, mid, depth)
        right = g > 0
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
    pole = 0.5 * (lo + hi)
    delta = 1e-9 * np.maximum(1.0, np.abs(pole))
    weights = np.zeros_like(pole)
    for sgn in (-1.0, 1.0):
        g, _, gp = _fraction(model, pole + sgn * delta, depth, "above", with_derivative=True)
        weights += 0.5 * (g.real ** 2 / gp.real)
    return [(float(e), float(w)) for e, w in zip(pole, weights)]


@dataclass(frozen=True)
class Normalization:
    continuum_mass: float
    discrete_mass: float
    poles: tuple[tuple[float, float], ...]
    quad_tol: float

    @property
    def total(self) -> float:
        return self.continuum_mass + self.discrete_mass

    @property
    def satisfied(self) -> bool:
        return abs(self.total - 1.0) <= self.quad_tol


def band_integral(model: CoefficientModel, lo: float, hi: float, depth: int = DEFAULT_DEPTH,
                  panels: int = 10_000) -> float:
    """Integral of the density over ``[lo, hi]``.

    Uses ``E = mid + half * sin(theta)`` so square-root edges are integrated
    by a plain trapezoid rule in ``theta``.
    """
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    theta = np.linspace(-0.5 * math.pi, 0.5 * math.pi, panels + 1)
    E = mid + half * np.sin(theta)
    g, broke = _fraction(model, E, depth, "above")
    rho = _rho_from_g(np.where(broke, 0.0, g))
    return float(np.trapezoid(rho * half * np.cos(theta), theta))


def normalization(model: CoefficientModel, depth: int = DEFAULT_DEPTH, quad_tol: float = 1e-3,
                  panels: int = 10_000) -> Normalization:
    """Continuum mass over all bands plus discrete mass of all off-band poles."""
    asym = asymptotics(model)
    if asym.unbounded:
        raise ValueError("the bands of an unbounded model are infinite; integrate a finite window instead")
    bands = band_boundaries(asym)
    continuum = sum(band_integral(model, lo, hi, depth, panels) for lo, hi in bands.bands)
    poles = find_poles(model, depth, bands=bands)
    discrete = sum(w for _, w in poles)
    return Normalization(continuum, discrete, tuple(poles), quad_tol)


def depth_change(model: CoefficientModel, grid, depth: int) -> float:
    """``max |rho_N - rho_2N|`` over ``grid``."""
    r1 = _rho_from_g(_fraction(model, grid, depth, "above")[0])
    r2 = _rho_from_g(_fraction(model, grid, 2 * depth, "above")[0])
    return float(np.max(np.abs(r1 - r2)))


def adaptive_depth(model: CoefficientModel, grid, start: int = 500, tol: float = 1e-6,
                   max_depth: int = 100_000) -> tuple[int, float]:
    """Double the depth until the density moves by less than ``tol``."""
    depth = start
    change = depth_change(model, grid, depth)
    while change >= tol and 2 * depth <= max_depth:
        depth *= 2
        change = depth_change(model, grid, depth)
    return depth, change
