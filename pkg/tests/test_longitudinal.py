import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from rigidlab import (
    FiberWeight,
    NonPositiveWeight,
    ScalarField,
    StepTooSmall,
    TiltTooLarge,
    enumerate_periodic_orbits,
    make_suspension,
)
from rigidlab.longitudinal import (
    ANALYTIC,
    FINITE_DIFFERENCE,
    exact_linear_form,
    longitudinal_cocycle,
    reparametrized_flow,
    transversal_independence_check,
    verify_cocycle_identities,
)
from rigidlab.toral import fixed_point_orbit

mpmath.mp.dps = 40


def mp_eigenvectors():
    """Unit eigenvectors of [[2,1],[1,1]] with positive first coordinate, in mpmath."""
    s5 = mpmath.sqrt(5)
    lam = (3 + s5) / 2
    eu = mpmath.matrix([1, lam - 2])
    es = mpmath.matrix([1, 1 / lam - 2])
    return eu / mpmath.norm(eu), es / mpmath.norm(es)


def mp_cocycle(cos_terms, orbit):
    """Sum over the orbit of the mixed second derivative of ``1 + sum a cos(2 pi k.x)``."""
    eu, es = mp_eigenvectors()
    total = mpmath.mpf(0)
    for x, y in orbit.points:
        p = (mpmath.mpf(x.numerator) / x.denominator, mpmath.mpf(y.numerator) / y.denominator)
        for (kx, ky), a in cos_terms:
            ku = kx * eu[0] + ky * eu[1]
            ks = kx * es[0] + ky * es[1]
            total += -4 * mpmath.pi**2 * a * ku * ks * mpmath.cos(2 * mpmath.pi * (kx * p[0] + ky * p[1]))
    return float(total)


TERMS = [((1, 0), 0.1), ((1, 1), -0.04), ((2, -1), 0.02)]


@pytest.fixture
def flow(cat):
    roof = ScalarField.constant(1.0)
    for k, a in TERMS:
        roof = roof + ScalarField.cos(*k, a)
    return make_suspension(cat, roof)


def test_fixed_point_closed_form(cat):
    eps = 0.1
    flow = make_suspension(cat, 1 + ScalarField.cos(1, 0, eps))
    K = longitudinal_cocycle(flow, fixed_point_orbit(cat)).value
    assert K == pytest.approx(-4 * math.pi**2 * eps / math.sqrt(5), rel=1e-13)


def test_analytic_and_fd_against_high_precision_oracle(cat, flow):
    for orb in enumerate_periodic_orbits(cat, 6).orbits():
        ref = mp_cocycle(TERMS, orb)
        ka = longitudinal_cocycle(flow, orb, method=ANALYTIC).value
        kf = longitudinal_cocycle(flow, orb, method=FINITE_DIFFERENCE).value
        assert ka == pytest.approx(ref, abs=1e-12)
        assert kf == pytest.approx(ref, abs=1e-7)


def test_fd_agrees_for_fiber_dependent_weight(cat, flow):
    phi = FiberWeight.from_components({0: ScalarField.sin(1, 1, 0.3), 1: ScalarField.cos(2, 1, 0.15), 2: ScalarField.constant(0.4)})
    for orb in enumerate_periodic_orbits(cat, 4).orbits():
        ka = longitudinal_cocycle(flow, orb, phi).value
        kf = longitudinal_cocycle(flow, orb, phi, FINITE_DIFFERENCE).value
        assert kf == pytest.approx(ka, abs=1e-7)


def test_fd_step_gate(cat, flow):
    orb = next(iter(enumerate_periodic_orbits(cat, 10)[10]))
    with pytest.raises(StepTooSmall):
        longitudinal_cocycle(flow, orb, method=FINITE_DIFFERENCE)
    assert math.isfinite(longitudinal_cocycle(flow, orb).value)


def test_coboundary_roof_has_zero_cocycle(cat):
    u = ScalarField.sin(1, 0, 0.3) + ScalarField.cos(1, 2, 0.05)
    flow = make_suspension(cat, 1 + u.coboundary(cat.matrix))
    for orb in enumerate_periodic_orbits(cat, 6).orbits():
        assert abs(longitudinal_cocycle(flow, orb).value) < 1e-12


def test_gauge_scaling(cat, flow):
    orb = fixed_point_orbit(cat)
    base = longitudinal_cocycle(flow, orb).value
    scaled = longitudinal_cocycle(flow, orb, gauge=(2.0, 0.5)).value
    assert scaled == pytest.approx(base, rel=1e-14)
    assert longitudinal_cocycle(flow, orb, gauge=(3.0, 1.0)).value == pytest.approx(3 * base, rel=1e-14)


def test_exact_linearity(cat, flow):
    phi = FiberWeight.from_field(1 + ScalarField.cos(0, 1, 0.2))
    psi = FiberWeight.fiber_power(1, 0.3)
    orb = fixed_point_orbit(cat)
    b, c = Fraction(7, 10), Fraction(-13, 10)
    lhs = exact_linear_form(flow, orb, [(b, phi), (c, psi)])
    rhs = b * exact_linear_form(flow, orb, [(1, phi)]) + c * exact_linear_form(flow, orb, [(1, psi)])
    assert lhs == rhs


def test_identities_and_covariance(cat, flow):
    phi = FiberWeight.from_field(1 + ScalarField.cos(0, 1, 0.2))
    psi = FiberWeight.from_components({1: ScalarField.cos(1, 0, 0.1)})
    rows = verify_cocycle_identities(flow, list(enumerate_periodic_orbits(cat, 3).orbits()), phi, psi, 0.5, 2.0)
    for r in rows:
        assert r.linearity_analytic == 0
        assert r.linearity_fd < 1e-12
        assert r.covariance_fd < 1e-6
        assert r.covariance_analytic < 1e-12


def test_reparametrization_needs_positive_weight(flow):
    with pytest.raises(NonPositiveWeight):
        reparametrized_flow(flow, FiberWeight.from_field(ScalarField.cos(1, 0, 1.0)))
    with pytest.raises(NonPositiveWeight):
        reparametrized_flow(flow, FiberWeight.fiber_power(1))


def test_tilted_section(cat, flow):
    orb = fixed_point_orbit(cat)
    chk = transversal_independence_check(flow, orb, ScalarField.sin(1, 1, 0.02))
    assert chk.discrepancy < 1e-6
    with pytest.raises(TiltTooLarge):
        transversal_independence_check(flow, orb, ScalarField.sin(1, 1, 0.2))
