import math

import mpmath
import numpy as np
import pytest

from rigidlab import (
    Inconclusive,
    NotConverged,
    ScalarField,
    ToleranceAmbiguity,
    ValidationError,
    homoclinic_point,
    make_suspension,
)
from rigidlab import asymptotics as asy
from rigidlab.toral import enumerate_periodic_orbits

mpmath.mp.dps = 50


def mp_t_prime(cos_terms, m=(1, 0)):
    """High-precision two-sided homoclinic sum for ``1 + sum a cos(2 pi k.x)``.

    The homoclinic point is ``alpha e_u = m + beta e_s``; its forward orbit is
    ``beta lam^-i e_s`` and its backward orbit ``alpha lam^-j e_u`` modulo Z^2.
    """
    s5 = mpmath.sqrt(5)
    lam = (3 + s5) / 2
    eu = mpmath.matrix([1, lam - 2])
    es = mpmath.matrix([1, 1 / lam - 2])
    eu, es = eu / mpmath.norm(eu), es / mpmath.norm(es)
    M = mpmath.matrix([[eu[0], -es[0]], [eu[1], -es[1]]])
    alpha, beta = mpmath.lu_solve(M, mpmath.matrix(list(m)))

    def dev(p):
        return sum(a * (mpmath.cos(2 * mpmath.pi * (kx * p[0] + ky * p[1])) - 1) for (kx, ky), a in cos_terms)

    total = mpmath.mpf(0)
    for i in range(120):
        total += dev(beta * lam**-i * es)
    for j in range(1, 120):
        total += dev(alpha * lam**-j * eu)
    return float(total)


def roof_of(terms):
    f = ScalarField.constant(1.0)
    for k, a in terms:
        f = f + ScalarField.cos(*k, a)
    return f


@pytest.mark.parametrize("terms", [[((1, 0), 0.1)], [((0, 1), 0.05)], [((1, 1), 0.03), ((2, -1), 0.02)]])
def test_t_prime_matches_high_precision_sum(cat, terms):
    flow = make_suspension(cat, roof_of(terms))
    h = homoclinic_point(cat, (1, 0))
    exp = asy.homoclinic_periods(flow, h, range(10, 27))
    tp, unc = asy.estimate_T_prime(exp)
    ref = mp_t_prime(terms)
    assert tp == pytest.approx(ref, abs=1e-9)
    assert asy.homoclinic_sum_oracle(flow, h) == pytest.approx(ref, abs=1e-13)
    assert unc < 1e-9


def test_periods_match_orbit_sum(cat):
    flow = make_suspension(cat, roof_of([((1, 0), 0.1)]))
    h = homoclinic_point(cat, (1, 0))
    exp = asy.homoclinic_periods(flow, h, [12])
    from rigidlab.toral import shadowing_periodic_point
    q = shadowing_periodic_point(cat, h, 12)
    pts = np.array([[float(x % 1), float(y % 1)] for x, y in q.orbit_lifts()[:12]])
    assert exp.periods[12] == pytest.approx(math.fsum(flow.roof(pts)), rel=1e-14)


def test_increment_rate_tracks_contraction(cat):
    flow = make_suspension(cat, roof_of([((1, 0), 0.1)]))
    exp = asy.homoclinic_periods(flow, homoclinic_point(cat, (1, 0)), range(10, 25))
    assert asy.increment_rate(exp) * cat.lam == pytest.approx(1.0, abs=0.05)


def test_exponent_recovery_with_linear_factor(cat):
    flow = make_suspension(cat, roof_of([((1, 0), 0.1)]))
    exp = asy.homoclinic_periods(flow, homoclinic_point(cat, (1, 0)), range(10, 27))
    fit = asy.recover_exponent(exp)
    assert not fit.k_is_zero
    assert fit.log_mu_hat == pytest.approx(-math.log(cat.lam), rel=0.01)
    assert fit.misfit_linear_factor < fit.misfit_plain


def test_exponent_recovery_without_linear_factor(cat):
    # K vanishes at the fixed point but the roof is not a coboundary
    flow = make_suspension(cat, roof_of([((1, 0), 0.05), ((0, 1), 0.05)]))
    exp = asy.homoclinic_periods(flow, homoclinic_point(cat, (1, 0)), range(10, 27))
    fit = asy.recover_exponent(exp)
    assert fit.k_is_zero
    assert fit.log_mu_hat == pytest.approx(-math.log(cat.lam), rel=0.01)


def test_constant_roof_is_degenerate(cat):
    flow = make_suspension(cat, ScalarField.constant(2.0))
    exp = asy.homoclinic_periods(flow, homoclinic_point(cat, (1, 0)), range(10, 27))
    tp, _ = asy.estimate_T_prime(exp)
    assert tp == 0.0
    fit = asy.recover_exponent(exp)
    assert fit.k_is_zero and fit.log_mu_hat is None


def test_not_converged_and_inconclusive(cat):
    flow = make_suspension(cat, roof_of([((1, 0), 0.1)]))
    h = homoclinic_point(cat, (1, 0))
    exp = asy.homoclinic_periods(flow, h, range(10, 27))
    exp.deviations[26] += 1e-3
    with pytest.raises(NotConverged):
        asy.estimate_T_prime(exp)
    short = asy.homoclinic_periods(flow, h, range(2, 8))
    asy.estimate_T_prime(short)
    with pytest.raises(Inconclusive):
        asy.recover_exponent(short, T_prime=short.T_prime + 1e-3)
    with pytest.raises(ValidationError):
        asy.estimate_T_prime(asy.homoclinic_periods(flow, h, range(10, 14)))


def test_classification(cat):
    r = roof_of([((1, 0), 0.1)])
    u = ScalarField.sin(1, 0, 0.05)
    f1 = make_suspension(cat, r)
    f2 = make_suspension(cat, r + u.coboundary(cat.matrix))
    flat = make_suspension(cat, ScalarField.constant(1.0))
    cases = set()
    for orb in enumerate_periodic_orbits(cat, 5).orbits():
        res = asy.classify_case(f1, None, f2, None, orb)
        assert not res.contradiction
        cases.add(res.case)
        assert asy.classify_case(flat, None, flat, None, orb).case == 1
    assert cases <= {1, 4} and 4 in cases
    orb = next(enumerate_periodic_orbits(cat, 1).orbits())
    res = asy.classify_case(flat, None, f1, None, orb)
    assert res.case == 2 and res.contradiction == (not res.chi1 < res.chi2)


def test_tolerance_ambiguity(cat):
    flow = make_suspension(cat, roof_of([((1, 0), 5e-7 * math.sqrt(5) / (4 * math.pi**2))]))
    orb = next(enumerate_periodic_orbits(cat, 1).orbits())
    with pytest.raises(ToleranceAmbiguity):
        asy.classify_case(flow, None, flow, None, orb, tol=1e-7)
