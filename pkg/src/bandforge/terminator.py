"""Closed-form continued-fraction tails for periodic coefficients.

Once the coefficients repeat with period ``K`` the remainder of the
continued fraction satisfies a quadratic ``q2 T^2 + q1 T + q0 = 0``.  The
discriminant of that quadratic is negative exactly on the spectral bands, so
its real roots are the band edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from bandforge.coefficients import Asymptotics
from bandforge.errors import MergedBandsError, UnsupportedPeriodError

MERGE_WIDTH = 1e-10
ROOT_TOL = 1e-12
SCAN_POINTS = 10_000


def _check(asym: Asymptotics):
    if asym.K not in (1, 2, 3):
        raise UnsupportedPeriodError(f"period K={asym.K} is not supported")
    if asym.unbounded:
        raise ValueError("unbounded tails have no fixed terminator; freeze them with local_asymptotics first")


def quadratic(asym: Asymptotics, z):
    """Coefficients ``(q2, q1, q0)`` of the terminator quadratic at ``z``."""
    _check(asym)
    z = np.asarray(z)
    A, B = asym.A, asym.B
    F = [z - Ak for Ak in A]
    B2 = [Bk * Bk for Bk in B]
    if asym.K == 1:
        return np.full_like(F[0], B2[0]), F[0], np.ones_like(F[0])
    if asym.K == 2:
        return B2[1] * F[0], F[0] * F[1] + B2[1] - B2[0], F[1]
    q2 = B2[2] * (B2[0] - F[0] * F[1])
    q1 = B2[1] * F[0] - B2[2] * F[1] + B2[0] * F[2] - F[0] * F[1] * F[2]
    q0 = B2[1] - F[1] * F[2]
    return q2, q1, q0


def _quadratic_poly(asym: Asymptotics):
    """Monomial coefficient arrays (lowest degree first) of q2, q1, q0."""
    A, B = asym.A, asym.B
    F = [np.array([-Ak, 1.0]) for Ak in A]
    B2 = [Bk * Bk for Bk in B]
    mul, add, sub = npoly.polymul, npoly.polyadd, npoly.polysub
    if asym.K == 1:
        return np.array([B2[0]]), F[0], np.array([1.0])
    if asym.K == 2:
        return B2[1] * F[0], add(mul(F[0], F[1]), [B2[1] - B2[0]]), F[1]
    q2 = B2[2] * sub([B2[0]], mul(F[0], F[1]))
    q1 = sub(add(add(B2[1] * F[0], -B2[2] * F[1]), B2[0] * F[2]), mul(mul(F[0], F[1]), F[2]))
    q0 = sub([B2[1]], mul(F[1], F[2]))
    return q2, q1, q0


def discriminant_poly(asym: Asymptotics) -> np.ndarray:
    """Expanded ``q1^2 - 4 q2 q0`` as monomial coefficients, lowest first."""
    _check(asym)
    q2, q1, q0 = _quadratic_poly(asym)
    return npoly.polysub(npoly.polymul(q1, q1), 4.0 * npoly.polymul(q2, q0))


def discriminant(asym: Asymptotics, E):
    """Negative inside bands, positive in gaps and outside the spectrum."""
    out = npoly.polyval(np.asarray(E, dtype=float), discriminant_poly(asym))
    return float(out) if np.ndim(out) == 0 else out


def _growth(asym: Asymptotics, z, T, u, use_u):
    """Per-period growth factor of the recurrence solution tied to root T.

    ``u`` is ``1/T``; the reciprocal form is used where ``|T| > 1`` so roots
    at or near infinity stay finite.
    """
    A, B = asym.A, asym.B
    prod = float(np.prod(B))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if asym.K == 1:
            lam = np.where(use_u, -B[0] / u, -B[0] * T)
        elif asym.K == 2:
            F2 = z - A[1]
            lam = np.where(use_u, -prod / (F2 * u + B[1] ** 2), -prod * T / (F2 + B[1] ** 2 * T))
        else:
            F2, F3 = z - A[1], z - A[2]
            lam = np.where(
                use_u,
                -prod / (F2 * F3 * u + F2 * B[2] ** 2 - B[1] ** 2 * u),
                -prod * T / (F2 * F3 + F2 * B[2] ** 2 * T - B[1] ** 2),
            )
    mag = np.abs(lam)
    return np.where(np.isnan(mag), np.inf, mag)


def inverse_terminator(asym: Asymptotics, z, side: str = "above", phase: int = 0):
    """``1/T(z)``, finite even where the physical root ``T`` is infinite.

    Root choice: on the real axis inside a band the two roots are complex
    conjugates and the one with ``Im T > 0`` is the limit from above.
    Everywhere else the physical root is the one whose recurrence solution
    decays along the periodic tail (growth factor below one in modulus);
    this reproduces ``T ~ -1/z`` at large ``|z|`` and ``Im T > 0`` for
    ``Im z > 0``.
    """
    if side not in ("above", "below"):
        raise ValueError("side must be 'above' or 'below'")
    asym = asym.rotated(phase)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    q2, q1, q0 = (np.asarray(q, dtype=complex) for q in quadratic(asym, z))
    disc = q1 * q1 - 4.0 * q2 * q0
    sq = np.sqrt(disc)
    flip = (np.conj(q1) * sq).real < 0
    w = -(q1 + np.where(flip, -sq, sq))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        u1 = 2.0 * q2 / w           # root 1: T = w / (2 q2)
        T2 = 2.0 * q0 / w           # root 2, the small-|T| root of the stable formula
        T1 = 1.0 / u1
        u2 = 1.0 / T2
    g1 = _growth(asym, z, T1, u1, np.abs(u1) <= 1.0)
    g2 = _growth(asym, z, T2, u2, np.abs(T2) > 1.0)
    u = np.where(g2 <= g1, u2, u1)

    real_axis = z.imag == 0
    in_band = real_axis & (disc.real < 0)
    if np.any(in_band):
        # conjugate pair; pick Im T > 0, i.e. Im u < 0
        up = np.where(u1.imag < 0, u1, u2)
        u = np.where(in_band, up, u)
    outside = real_axis & ~in_band
    u = np.where(outside, u.real + 0j, u)
    if side == "below":
        u = np.where(real_axis, np.conj(u), u)
    return u[0] if scalar else u


def terminator(asym: Asymptotics, z, side: str = "above", phase: int = 0):
    """Tail continued fraction ``T(z)`` for a ``K``-periodic chain.

    ``phase`` selects where in the period the tail starts; ``phase=0`` begins
    with ``(A_1, B_1)``.  Returns complex ``inf`` where the tail itself has a
    pole.
    """
    u = np.asarray(inverse_terminator(asym, z, side, phase))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        T = np.where(u == 0, complex(math.inf, 0.0), 1.0 / np.where(u == 0, 1.0, u))
    return T[()] if T.ndim == 0 else T


@dataclass(frozen=True)
class BandStructure:
    """Sorted band edges ``E_1 < ... < E_2K``; bands are ``[E_1,E_2], [E_3,E_4], ...``."""

    boundaries: tuple[float, ...]
    unbounded: bool = False

    @property
    def K(self) -> int:
        return len(self.boundaries) // 2

    @property
    def bands(self) -> list[tuple[float, float]]:
        e = self.boundaries
        return [(e[2 * j], e[2 * j + 1]) for j in range(self.K)]

    @property
    def gaps(self) -> list[tuple[float, float]]:
        e = self.boundaries
        return [(e[2 * j + 1], e[2 * j + 2]) for j in range(self.K - 1)]

    def locate(self, E: float, edge_tol: float = 0.0) -> tuple[str, int | None]:
        """``("band", j)``, ``("gap", j)`` (1-based) or ``("exterior", None)``."""
        for j, (lo, hi) in enumerate(self.bands, start=1):
            if lo - edge_tol <= E <= hi + edge_tol:
                return "band", j
        for j, (lo, hi) in enumerate(self.gaps, start=1):
            if lo < E < hi:
                return "gap", j
        return "exterior", None


def _bisect(p, lo, hi, tol=ROOT_TOL):
    flo = npoly.polyval(lo, p)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = npoly.polyval(mid, p)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_gaps(edges, K):
    widths = [edges[2 * j + 2] - edges[2 * j + 1] for j in range(K - 1)]
    if any(w < MERGE_WIDTH for w in widths):
        raise MergedBandsError(f"gap widths {widths} below {MERGE_WIDTH:g}: adjacent bands merge", roots=edges)


def band_boundaries(asym: Asymptotics) -> BandStructure:
    """The ``2K`` band edges implied by the periodic limit."""
    if asym.K not in (1, 2, 3):
        raise UnsupportedPeriodError(f"period K={asym.K} is not supported")
    A, B = asym.A, asym.B
    if asym.unbounded:
        if asym.K != 2:
            raise UnsupportedPeriodError("unbounded tails are only supported for K=2")
        mid, half = 0.5 * (A[0] + A[1]), 0.5 * abs(A[0] - A[1])
        edges = (-math.inf, mid - half, mid + half, math.inf)
        _check_gaps(edges, 2)
        return BandStructure(edges, unbounded=True)
    if asym.K == 1:
        return BandStructure((A[0] - 2 * B[0], A[0] + 2 * B[0]))
    if asym.K == 2:
        mid = 0.5 * (A[0] + A[1])
        outer = 0.5 * math.sqrt((A[0] - A[1]) ** 2 + 4 * (B[0] + B[1]) ** 2)
        inner = 0.5 * math.sqrt((A[0] - A[1]) ** 2 + 4 * (B[0] - B[1]) ** 2)
        edges = (mid - outer, mid - inner, mid + inner, mid + outer)
        _check_gaps(edges, 2)
        return BandStructure(edges)

    p = discriminant_poly(asym)
    lo = min(A) - 2 * max(B) - 1.0
    hi = max(A) + 2 * max(B) + 1.0
    x = np.linspace(lo, hi, SCAN_POINTS)
    f = npoly.polyval(x, p)
    roots = []
    for i in range(len(x) - 1):
        if f[i] == 0.0:
            roots.append(float(x[i]))
        elif f[i] * f[i + 1] < 0:
            roots.append(float(_bisect(p, x[i], x[i + 1])))
    if len(roots) != 2 * asym.K:
        raise MergedBandsError(f"found {len(roots)} band edges, expected {2 * asym.K}", roots=roots)
    edges = tuple(roots)
    _check_gaps(edges, asym.K)
    return BandStructure(edges)
