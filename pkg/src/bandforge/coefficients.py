"""Recursion-coefficient models for semi-infinite tridiagonal Hamiltonians.

A model maps an index ``n >= 0`` to the pair ``(a_n, b_n)``: the diagonal and
off-diagonal entries of a symmetric tridiagonal matrix.  The tail of every
supported model settles onto a ``K``-periodic pattern ``{A_k, B_k}`` with the
convention ``a_{Kn+k-1} -> A_k`` and ``b_{Kn+k-1} -> B_k``.

Four parameterized families ship with the package, plus user-defined models
made of an explicit head followed by an exactly periodic tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from bandforge.errors import (
    InvalidModelError,
    NotConvergedError,
    UnsupportedPeriodError,
)

MAX_INDEX = 2**53

# Built-in families and the parameter sets used for the reference figures.
BUILTIN_DEFAULTS: dict[str, dict[str, float]] = {
    "one-band": {"alpha": 0.7, "beta": 0.5, "gamma": -0.7},
    "two-band": {"alpha": 0.7, "beta": 0.8, "gamma": 0.3},
    "three-band": {},
    "two-band-unbounded": {"alpha": 1.0, "beta": 0.2, "gamma": 0.8},
}

# Short names accepted on the command line and in model files.
ALIASES: dict[str, str] = {
    "eq14": "one-band",
    "eq17": "two-band",
    "eq19": "three-band",
    "eq21": "two-band-unbounded",
}


def canonical_kind(kind: str) -> str:
    kind = ALIASES.get(kind, kind)
    if kind not in BUILTIN_DEFAULTS and kind != "custom":
        known = sorted(BUILTIN_DEFAULTS) + sorted(ALIASES) + ["custom"]
        raise InvalidModelError(f"unknown model kind {kind!r}; expected one of {known}")
    return kind


@dataclass(frozen=True)
class Asymptotics:
    """Periodic limit ``{A_k, B_k}`` of the recursion coefficients.

    ``unbounded`` marks families whose off-diagonal entries grow without
    limit; ``B`` then holds ``inf`` and only ``A`` is meaningful.
    """

    A: tuple[float, ...]
    B: tuple[float, ...]
    unbounded: bool = False

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(float(x) for x in self.A))
        object.__setattr__(self, "B", tuple(float(x) for x in self.B))
        if len(self.A) != len(self.B):
            raise InvalidModelError("A and B must have the same length")
        if not 1 <= len(self.A) <= 3:
            raise UnsupportedPeriodError(f"period K={len(self.A)} is not supported (K must be 1, 2 or 3)")
        if not all(math.isfinite(x) for x in self.A):
            raise InvalidModelError("asymptotic diagonal values must be finite")
        if not self.unbounded and not all(math.isfinite(b) and b > 0 for b in self.B):
            raise InvalidModelError("asymptotic off-diagonal values must be finite and positive")

    @property
    def K(self) -> int:
        return len(self.A)

    def rotated(self, phase: int) -> Asymptotics:
        """Same tail, read starting from index ``phase`` instead of 0."""
        p = phase % self.K
        return Asymptotics(self.A[p:] + self.A[:p], self.B[p:] + self.B[:p], self.unbounded)


@dataclass(frozen=True)
class CoefficientModel:
    """Immutable description of a coefficient rule.

    Use :meth:`builtin` or :meth:`custom` rather than the raw constructor.
    """

    kind: str
    params: tuple[tuple[str, float], ...] = ()
    head: tuple[tuple[float, float], ...] = ()
    tail: Asymptotics | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    @classmethod
    def builtin(cls, kind: str, **params: float) -> CoefficientModel:
        kind = canonical_kind(kind)
        if kind == "custom":
            raise InvalidModelError("use CoefficientModel.custom for user-defined models")
        merged = dict(BUILTIN_DEFAULTS[kind])
        unknown = set(params) - set(merged)
        if unknown:
            raise InvalidModelError(f"model {kind!r} does not take parameters {sorted(unknown)}")
        merged.update({k: float(v) for k, v in params.items() if v is not None})
        for name, value in merged.items():
            if not math.isfinite(value):
                raise InvalidModelError(f"parameter {name} must be finite, got {value}")
        return cls(kind, tuple(sorted(merged.items())))

    @classmethod
    def custom(cls, head, A, B) -> CoefficientModel:
        head = tuple((float(a), float(b)) for a, b in head)
        return cls("custom", (), head, Asymptotics(tuple(A), tuple(B)))

    def param(self, name: str) -> float:
        return dict(self.params)[name]

    @property
    def n_head(self) -> int:
        return len(self.head)

    @property
    def model_id(self) -> str:
        if self.kind == "custom":
            t = self.tail
            return f"custom(head={self.n_head},K={t.K},A={list(t.A)},B={list(t.B)})"
        inner = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.kind}({inner})"

    def at(self, n) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized ``(a_n, b_n)`` for an integer array of indices."""
        n = np.asarray(n, dtype=np.int64)
        if np.any(n < 0):
            raise IndexError("coefficient index must be non-negative")
        if np.any(n >= MAX_INDEX):
            raise OverflowError(f"coefficient index exceeds {MAX_INDEX}")
        return _FORMULAS[self.kind](self, n)

    def arrays(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        """``a_0..a_{size-1}`` and ``b_0..b_{size-1}`` as read-only arrays."""
        cached = self._cache.get(size)
        if cached is None:
            a, b = self.at(np.arange(size))
            a.setflags(write=False)
            b.setflags(write=False)
            cached = self._cache[size] = (a, b)
        return cached


def _one_band(model, n):
    p = dict(model.params)
    al, be, ga = p["alpha"], p["beta"], p["gamma"]
    x = n.astype(float)
    a = np.where(n < 2, ga, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        # abs(): the base is negative at n = 0 whenever 0 < alpha < 1
        b = 0.5 * np.abs((x + al) / (x + al - 1.0)) ** be
    return a, b


def _two_band(model, n):
    p = dict(model.params)
    al, be, ga = p["alpha"], p["beta"], p["gamma"]
    m = (n // 2).astype(float)
    even = n % 2 == 0
    a = np.where(even, ga, 1.0 - ga)
    with np.errstate(divide="ignore", invalid="ignore"):
        b_even = 0.5 * be * ((m + 1.0 / al) / (m + al)) ** ga
        b_odd = 0.5 * al * ((m + be) / (m + 1.0 / be)) ** (1.0 - ga)
    return a, np.where(even, b_even, b_odd)


def _three_band(model, n):
    m = (n // 3).astype(float)
    r = n % 3
    a = np.choose(r, [-0.2, 0.25, 0.0])
    b = np.choose(r, [
        0.5 * np.sqrt((2 * m + 1) / (3 * m + 1)),
        np.full(m.shape, 0.5),
        0.5 * np.sqrt((3 * m + 1) / (2 * m + 1)),
    ])
    return np.asarray(a, dtype=float), np.asarray(b, dtype=float)


def _two_band_unbounded(model, n):
    p = dict(model.params)
    al, be, ga = p["alpha"], p["beta"], p["gamma"]
    m = (n // 2).astype(float)
    even = n % 2 == 0
    a = np.where(even, ga, 1.0 - ga)
    with np.errstate(invalid="ignore"):
        b = np.where(even, ga * np.sqrt(2 * m + al), ga * np.sqrt(2 * m + be))
    return a, b


def _custom(model, n):
    tail = model.tail
    nh = model.n_head
    A = np.asarray(tail.A)
    B = np.asarray(tail.B)
    a = A[n % tail.K]
    b = B[n % tail.K]
    if nh:
        h = np.asarray(model.head, dtype=float).reshape(nh, 2)
        inside = n < nh
        idx = np.where(inside, n, 0)
        a = np.where(inside, h[idx, 0], a)
        b = np.where(inside, h[idx, 1], b)
    return a.astype(float), b.astype(float)


_FORMULAS = {
    "one-band": _one_band,
    "two-band": _two_band,
    "three-band": _three_band,
    "two-band-unbounded": _two_band_unbounded,
    "custom": _custom,
}


def coefficients(model: CoefficientModel, n: int) -> tuple[float, float]:
    """Return ``(a_n, b_n)`` for a single index."""
    if n < 0:
        raise IndexError("coefficient index must be non-negative")
    if n >= MAX_INDEX:
        raise OverflowError(f"coefficient index exceeds {MAX_INDEX}")
    a, b = model.at(np.array([n]))
    return float(a[0]), float(b[0])


def asymptotics(model: CoefficientModel) -> Asymptotics:
    """Analytic periodic limit of the model's coefficients."""
    kind = model.kind
    if kind == "custom":
        return model.tail
    if kind == "one-band":
        return Asymptotics((0.0,), (0.5,))
    if kind == "three-band":
        return Asymptotics((-0.2, 0.25, 0.0), (0.5 * math.sqrt(2 / 3), 0.5, 0.5 * math.sqrt(1.5)))
    ga = model.param("gamma")
    if kind == "two-band":
        return Asymptotics((ga, 1.0 - ga), (0.5 * model.param("beta"), 0.5 * model.param("alpha")))
    return Asymptotics((ga, 1.0 - ga), (math.inf, math.inf), unbounded=True)


def local_asymptotics(model: CoefficientModel, start: int, K: int = 2) -> Asymptotics:
    """Period-``K`` tail frozen at the coefficients found at ``start..start+K-1``.

    Used to close the continued fraction of models whose coefficients grow.
    The result is indexed so that ``rotated(start)`` begins with ``a_start``.
    """
    a, b = model.at(np.arange(start, start + K))
    A = [0.0] * K
    B = [0.0] * K
    for j in range(K):
        A[(start + j) % K] = a[j]
        B[(start + j) % K] = b[j]
    return Asymptotics(tuple(A), tuple(B))


def estimate_asymptotics(model: CoefficientModel, K: int, n_probe: int, tol: float = 1e-8) -> Asymptotics:
    """Read the periodic limit off the coefficients at period ``n_probe``.

    Raises :class:`NotConvergedError` when period ``n_probe`` still differs
    from period ``n_probe - 1`` by ``tol`` or more in any component.
    """
    if K not in (1, 2, 3):
        raise UnsupportedPeriodError(f"period K={K} is not supported")
    if n_probe < 1:
        raise ValueError("n_probe must be at least 1")
    idx = K * n_probe + np.arange(K)
    a, b = model.at(idx)
    a_prev, b_prev = model.at(idx - K)
    moved = max(np.max(np.abs(a - a_prev)), np.max(np.abs(b - b_prev)))
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and moved < tol):
        raise NotConvergedError(
            f"coefficients still move by {moved:.3g} between periods {n_probe - 1} and {n_probe}",
            estimate=(tuple(a), tuple(b)),
        )
    return Asymptotics(tuple(a), tuple(b))


@dataclass(frozen=True)
class ValidationReport:
    model_id: str
    checked: int
    notes: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return True


def validate_model(model: CoefficientModel, prefix: int = 10_000) -> ValidationReport:
    """Check ``b_n > 0`` and finiteness for ``n < prefix``.

    Returns a report on success; raises :class:`InvalidModelError` naming the
    first offending index otherwise.
    """
    notes = []
    if model.kind == "custom" and model.tail is None:
        raise InvalidModelError("custom model needs a declared tail")
    a, b = model.at(np.arange(prefix))
    bad = ~np.isfinite(a) | ~np.isfinite(b)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise InvalidModelError(f"non-finite coefficient at n={i}: a={a[i]}, b={b[i]}", index=i)
    nonpos = b <= 0
    if np.any(nonpos):
        i = int(np.argmax(nonpos))
        raise InvalidModelError(f"b_{i} = {b[i]} is not positive (chain decouples)", index=i)
    if model.kind == "one-band":
        al = model.param("alpha")
        if al < 1.0:
            negative = [i for i in range(prefix) if i + al - 1.0 < 0 < i + al]
            notes.append(
                f"alpha={al:g} < 1: base (n+alpha)/(n+alpha-1) is negative at n={negative}; "
                "its absolute value is used"
            )
    return ValidationReport(model.model_id, prefix, tuple(notes))
