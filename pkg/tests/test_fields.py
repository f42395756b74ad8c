import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigidlab import ConfigError, FiberWeight, ScalarField

TAU = 2 * math.pi


def sample(n=64, seed=1):
    return np.random.default_rng(seed).uniform(-1, 1, size=(n, 2))


def test_canonical_form_merges_conjugate_frequencies():
    f = ScalarField.cos(1, 2, 0.3) + ScalarField.cos(-1, -2, 0.2) + ScalarField.sin(-1, -2, 0.5)
    assert len(f.terms) == 1
    (k, a, b), = f.terms
    assert k == (1, 2) and a == pytest.approx(0.5) and b == pytest.approx(-0.5)
    assert (f - f).terms == ()


def test_evaluation_and_derivatives():
    f = 1.0 + ScalarField.cos(1, 0, 0.1) + ScalarField.sin(2, -1, 0.3)
    x = sample()
    direct = 1 + 0.1 * np.cos(TAU * x[:, 0]) + 0.3 * np.sin(TAU * (2 * x[:, 0] - x[:, 1]))
    assert np.allclose(f(x), direct, atol=1e-15)
    h = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (f(x + e) - f(x - e)) / (2 * h)
        assert np.allclose(f.gradient(x)[:, j], fd, atol=1e-7)
    H = f.hessian(x[:1])[0]
    assert H.shape == (2, 2) and H[0, 1] == pytest.approx(H[1, 0])


def test_increment_matches_difference():
    f = ScalarField.cos(1, 1, 0.7) + ScalarField.sin(3, 0, 0.2)
    p = sample(16)
    dz = sample(16, 2) * 1e-3
    assert np.allclose(f.increment(p, dz), f(p + dz) - f(p), atol=1e-15)


def test_deviation_from_origin():
    f = 1 + ScalarField.cos(1, 0, 0.1)
    x = sample(8)
    assert np.allclose(f.deviation(x), f(x) - f(np.zeros(2)), atol=1e-16)


def test_compose_and_coboundary():
    A = ((2, 1), (1, 1))
    u = ScalarField.sin(1, 0, 0.3) + ScalarField.cos(1, 1, 0.2)
    x = sample()
    Ax = x @ np.array(A, dtype=float).T
    assert np.allclose(u.compose(A)(x), u(Ax), atol=1e-14)
    assert np.allclose(u.coboundary(A)(x), u(Ax) - u(x), atol=1e-14)


def test_product_to_sum():
    f = ScalarField.cos(1, 0, 0.5) + ScalarField.sin(0, 1, 0.2) + 0.3
    g = ScalarField.sin(1, 1, 0.4) - ScalarField.cos(2, 0, 0.1)
    x = sample()
    assert np.allclose((f * g)(x), f(x) * g(x), atol=1e-14)


def test_bounds():
    f = 1 + ScalarField.cos(1, 0, 0.1) + ScalarField.cos(0, 1, 0.05)
    assert f.constant_term == pytest.approx(1.0)
    assert f.amplitude_sum() == pytest.approx(0.15)
    assert f.lower_bound() <= 0.85 + 1e-12
    assert f.lower_bound() > 0.84
    assert f.max_frequency == pytest.approx(1.0)


def test_text_round_trip():
    f = ScalarField.cos(0, 0, 1.0) + ScalarField.cos(1, 0, 0.1) + ScalarField.sin(2, -3, -0.25)
    assert ScalarField.from_text(f.to_text()) == f
    g = ScalarField.from_text("# roof\ncos 0 0 1\n\ncos 1 0 0.1  # bump\n")
    assert g == 1 + ScalarField.cos(1, 0, 0.1)


@pytest.mark.parametrize("text", ["tan 1 0 1", "cos 1 0", "cos a 0 1", "cos 1 0 nan"])
def test_text_errors_carry_line(text):
    with pytest.raises(ConfigError) as ei:
        ScalarField.from_text("cos 0 0 1\n" + text, first_line=10)
    assert ei.value.line == 11


def test_fiber_weight_integral_closed_form():
    phi = FiberWeight.from_components({0: ScalarField.sin(1, 1, 0.3), 1: ScalarField.cos(2, 1, 0.15), 2: ScalarField.constant(0.4)})
    x = sample(8)
    r = 1 + 0.1 * np.cos(TAU * x[:, 0])
    for xi, ri, got in zip(x, r, phi.fiber_integral(x, r)):
        ref = mpmath.quad(lambda t: float(phi(xi[None], float(t))[0]), [0, float(ri)])
        assert got == pytest.approx(float(ref), rel=1e-12, abs=1e-14)
    assert phi.degree == 2 and not phi.is_fiber_constant


def test_fiber_weight_text_round_trip():
    phi = FiberWeight.from_components({0: 1 + ScalarField.cos(1, 0, 0.2), 2: ScalarField.constant(0.4)})
    assert FiberWeight.from_text(phi.to_text()) == phi
    assert FiberWeight.from_text("cos 0 0 2\n").is_fiber_constant


coef = st.floats(-2, 2, allow_nan=False)
freq = st.integers(-3, 3)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(freq, freq, coef, coef), min_size=1, max_size=4))
def test_sum_is_pointwise(terms):
    fs = [ScalarField.from_terms([((kx, ky), a, b)]) for kx, ky, a, b in terms]
    total = fs[0]
    for f in fs[1:]:
        total = total + f
    x = sample(8)
    assert np.allclose(total(x), sum(f(x) for f in fs), atol=1e-12)
