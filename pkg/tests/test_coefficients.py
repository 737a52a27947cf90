import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandforge.coefficients import (
    Asymptotics,
    CoefficientModel,
    asymptotics,
    coefficients,
    estimate_asymptotics,
    validate_model,
)
from bandforge.errors import InvalidModelError, NotConvergedError, UnsupportedPeriodError

from conftest import BUILTINS


def reference(kind, n, alpha=None, beta=None, gamma=None):
    """Scalar transcription of the family formulas, one index at a time."""
    if kind == "eq14":
        a = gamma if n in (0, 1) else 0.0
        b = 0.5 * abs((n + alpha) / (n + alpha - 1)) ** beta
    elif kind == "eq17":
        m, odd = divmod(n, 2)
        a = 1 - gamma if odd else gamma
        b = alpha / 2 * ((m + beta) / (m + 1 / beta)) ** (1 - gamma) if odd \
            else beta / 2 * ((m + 1 / alpha) / (m + alpha)) ** gamma
    elif kind == "eq19":
        m, r = divmod(n, 3)
        a = (-1 / 5, 1 / 4, 0.0)[r]
        b = (0.5 * math.sqrt((2 * m + 1) / (3 * m + 1)), 0.5, 0.5 * math.sqrt((3 * m + 1) / (2 * m + 1)))[r]
    else:
        m, odd = divmod(n, 2)
        a = 1 - gamma if odd else gamma
        b = gamma * math.sqrt(2 * m + (beta if odd else alpha))
    return a, b


def test_three_band_first_entries():
    assert coefficients(CoefficientModel.builtin("eq19"), 1) == (0.25, 0.5)
    a, b = coefficients(CoefficientModel.builtin("eq19"), 0)
    assert a == -0.2
    assert b == pytest.approx(0.5, abs=1e-15)


def test_two_band_first_entry():
    a, b = coefficients(CoefficientModel.builtin("eq17", alpha=0.7, beta=0.8, gamma=0.3), 0)
    assert a == 0.3
    assert b == pytest.approx((0.8 / 2) * ((1 / 0.7) / 0.7) ** 0.3, rel=1e-15)


params = st.floats(0.2, 3.0).filter(lambda x: abs(x - 1) > 1e-3)


@settings(max_examples=30, deadline=None)
@given(kind=st.sampled_from(BUILTINS), alpha=params, beta=params, gamma=st.floats(0.05, 0.95))
def test_vectorized_formulas_match_scalar_transcription(kind, alpha, beta, gamma):
    kw = {} if kind == "eq19" else dict(alpha=alpha, beta=beta, gamma=gamma)
    model = CoefficientModel.builtin(kind, **kw)
    a, b = model.arrays(60)
    for n in range(60):
        ra, rb = reference(kind, n, **kw)
        assert a[n] == pytest.approx(ra, rel=1e-13, abs=1e-15)
        assert b[n] == pytest.approx(rb, rel=1e-13)


def test_custom_head_then_exact_tail():
    model = CoefficientModel.custom([(1.0, 2.0), (3.0, 4.0)], [0.1, 0.2], [0.3, 0.4])
    assert [coefficients(model, n) for n in range(5)] == [
        (1.0, 2.0), (3.0, 4.0), (0.1, 0.3), (0.2, 0.4), (0.1, 0.3)]


def test_index_errors():
    model = CoefficientModel.builtin("eq19")
    with pytest.raises(IndexError):
        coefficients(model, -1)
    with pytest.raises(OverflowError):
        coefficients(model, 2**60)


@pytest.mark.parametrize("kind, A, B", [
    ("eq14", (0.0,), (0.5,)),
    ("eq19", (-0.2, 0.25, 0.0), (0.5 * math.sqrt(2 / 3), 0.5, 0.5 * math.sqrt(1.5))),
    ("eq17", (0.3, 0.7), (0.4, 0.35)),
])
def test_asymptotics(kind, A, B):
    asym = asymptotics(CoefficientModel.builtin(kind))
    assert asym.K == len(A)
    assert asym.A == pytest.approx(A, abs=1e-15)
    assert asym.B == pytest.approx(B, abs=1e-15)


def test_unbounded_family_is_flagged():
    asym = asymptotics(CoefficientModel.builtin("eq21"))
    assert asym.unbounded
    assert asym.A == (0.8, pytest.approx(0.2))
    assert all(math.isinf(b) for b in asym.B)


def test_estimate_single_band():
    est = estimate_asymptotics(CoefficientModel.builtin("eq14"), K=1, n_probe=10**6, tol=1e-8)
    assert est.A[0] == 0.0
    assert est.B[0] == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("n_probe", [10, 10**3, 10**6])
def test_estimate_unbounded_does_not_converge(n_probe):
    with pytest.raises(NotConvergedError):
        estimate_asymptotics(CoefficientModel.builtin("eq21"), K=2, n_probe=n_probe, tol=1e-8)


@pytest.mark.parametrize("n_probe", [1, 7, 1000])
def test_estimate_constant_tail_exact(n_probe, free):
    est = estimate_asymptotics(free, K=1, n_probe=n_probe)
    assert est == Asymptotics((0.0,), (0.5,))


@pytest.mark.parametrize("kind", ["eq14", "eq17", "eq19"])
def test_estimate_agrees_with_analytic(kind):
    model = CoefficientModel.builtin(kind)
    asym = asymptotics(model)
    est = estimate_asymptotics(model, asym.K, n_probe=10**7, tol=1e-6)
    np.testing.assert_allclose(est.A, asym.A, atol=1e-6)
    np.testing.assert_allclose(est.B, asym.B, atol=1e-6)


def test_estimate_rejects_large_period():
    with pytest.raises(UnsupportedPeriodError):
        estimate_asymptotics(CoefficientModel.builtin("eq19"), K=4, n_probe=10)


@pytest.mark.parametrize("kind", ["eq14", "eq17", "eq19"])
def test_tail_deviation_shrinks(kind):
    model = CoefficientModel.builtin(kind)
    asym = asymptotics(model)
    K = asym.K
    devs = []
    for n in (10**2, 10**3, 10**4):
        a, b = model.at(K * n + np.arange(K))
        devs.append(np.abs(np.concatenate([a - asym.A, b - asym.B])))
    assert np.all(devs[1] <= devs[0]) and np.all(devs[2] <= devs[1])
    assert np.max(devs[2]) < 1e-3


def test_coefficients_are_pure(builtin):
    first = [coefficients(builtin, n) for n in range(50)]
    again = [coefficients(builtin, n) for n in range(50)]
    assert first == again


def test_validate_three_band():
    report = validate_model(CoefficientModel.builtin("eq19"))
    assert report.valid and report.notes == ()


def test_validate_rejects_decoupled_head():
    with pytest.raises(InvalidModelError) as exc:
        validate_model(CoefficientModel.custom([(0.0, 0.0)], [0.0], [0.5]))
    assert exc.value.index == 0


def test_validate_notes_absolute_value_for_small_alpha():
    report = validate_model(CoefficientModel.builtin("eq14", alpha=0.7, beta=0.5, gamma=-0.7))
    assert report.valid
    assert len(report.notes) == 1 and "n=[0]" in report.notes[0]


def test_validate_rejects_pole_in_formula():
    with pytest.raises(InvalidModelError) as exc:
        validate_model(CoefficientModel.builtin("eq14", alpha=1.0))
    assert exc.value.index == 0


def test_rejects_unknown_kind_and_params():
    with pytest.raises(InvalidModelError):
        CoefficientModel.builtin("eq99")
    with pytest.raises(InvalidModelError):
        CoefficientModel.builtin("eq19", alpha=1.0)
    with pytest.raises(InvalidModelError):
        CoefficientModel.builtin("eq17", alpha=math.nan)


def test_asymptotics_invariants():
    with pytest.raises(InvalidModelError):
        Asymptotics((0.0, 1.0), (0.5,))
    with pytest.raises(InvalidModelError):
        Asymptotics((0.0,), (-0.5,))
    with pytest.raises(UnsupportedPeriodError):
        Asymptotics((0.0,) * 4, (0.5,) * 4)


def test_rotation():
    asym = Asymptotics((1.0, 2.0, 3.0), (0.1, 0.2, 0.3))
    assert asym.rotated(1) == Asymptotics((2.0, 3.0, 1.0), (0.2, 0.3, 0.1))
    assert asym.rotated(3) == asym
