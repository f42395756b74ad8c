import math

import numpy as np
import pytest

from rigidlab import (
    CostGate,
    FiberWeight,
    HypothesisViolated,
    InvalidAssignment,
    Potential,
    ScalarField,
    ValidationError,
    alternate_livshits_demo,
    bowen_integral,
    build_ensemble,
    enumerate_periodic_orbits,
    make_suspension,
    measure_approx,
    pigeonhole_certificate,
    positive_proportion,
)
from rigidlab.equilibrium import all_index_functions, counting_inequality, ensemble_integrals
from rigidlab.suspension import orbit_flow_data, weight_integral


@pytest.fixture
def bumpy(cat):
    return make_suspension(cat, 1 + ScalarField.cos(1, 0, 0.1))


def brute_window(flow, T, delta, k_max):
    out = []
    for orb in enumerate_periodic_orbits(flow.base, k_max).orbits():
        per = orbit_flow_data(flow, orb).period
        if T < per <= T + delta:
            out.append((orb, per))
    return out


@pytest.mark.parametrize("T", [0.5, 2.0, 4.5, 6.0])
def test_ensemble_matches_catalog_filter(bumpy, T):
    ens = build_ensemble(bumpy, T, 1.0)
    ref = brute_window(bumpy, T, 1.0, ens.k_cap)
    assert {o.numerators for o in ens.orbits()} == {o.numerators for o, _ in ref}
    assert sorted(ens.periods()) == pytest.approx(sorted(p for _, p in ref), rel=1e-15)


def test_small_window_counts(cat):
    flat = make_suspension(cat, ScalarField.constant(1.0))
    counts = [build_ensemble(flat, T, 1.0).orbit_count for T in (0.5, 1.0, 3.0)]
    assert counts == [1, 2, 10]


def test_bowen_integral_by_hand(bumpy):
    g = FiberWeight.from_field(ScalarField.cos(1, 0, 1.0))
    pot = Potential.from_weight(FiberWeight.from_field(ScalarField.sin(0, 1, 0.5)))
    ens = build_ensemble(bumpy, 5.0, 1.0, pot)
    orbs = list(ens.orbits())
    B = np.array([weight_integral(bumpy, pot.weight, o) for o in orbs])
    per = np.array([orbit_flow_data(bumpy, o).period for o in orbs])
    gi = np.array([weight_integral(bumpy, g, o) for o in orbs])
    w = np.exp(B)
    ref = math.fsum(w * gi) / math.fsum(w * per)
    m = measure_approx(ens)
    assert bowen_integral(m, g) == pytest.approx(ref, rel=1e-12)
    assert m.normalization == pytest.approx(math.fsum(w * per), rel=1e-12)
    assert bowen_integral(m, FiberWeight.constant(1.0)) == pytest.approx(1.0, rel=1e-14)


def test_potential_shift_invariance(bumpy):
    g = FiberWeight.from_field(ScalarField.cos(1, 1, 1.0))
    a = bowen_integral(measure_approx(build_ensemble(bumpy, 6.0, 1.0, Potential.zero())), g)
    b = bowen_integral(measure_approx(build_ensemble(bumpy, 6.0, 1.0, Potential.constant(800.0))), g)
    assert a == pytest.approx(b, rel=1e-13)


def test_thread_independence(bumpy):
    g = FiberWeight.from_field(ScalarField.cos(1, 0, 1.0))
    a = build_ensemble(bumpy, 8.0, 1.0, threads=1, chunk=4096)
    b = build_ensemble(bumpy, 8.0, 1.0, threads=4, chunk=4096)
    assert a.orbit_count == b.orbit_count
    assert np.array_equal(a.periods(), b.periods())
    assert bowen_integral(measure_approx(a), g) == bowen_integral(measure_approx(b), g)


def test_cost_gate_and_validation(cat, bumpy):
    flat = make_suspension(cat, ScalarField.constant(1.0))
    with pytest.raises(CostGate):
        build_ensemble(flat, 25.0, 1.0)
    with pytest.raises(ValidationError):
        build_ensemble(flat, 3.0, -1.0)
    empty = build_ensemble(bumpy, 0.0, 0.5)
    assert empty.orbit_count == 0
    with pytest.raises(ValidationError):
        bowen_integral(measure_approx(empty), FiberWeight.constant(1.0))


def test_positive_proportion_bounds(bumpy):
    g = FiberWeight.from_field(ScalarField.sin(1, 0, 1.0))
    for T in (3.0, 6.0, 8.0):
        ens = build_ensemble(bumpy, T, 1.0, Potential.unstable_jacobian())
        a = ensemble_integrals(ens, g)
        rep = positive_proportion(measure_approx(ens), a, 1e-9)
        assert rep.bounds_hold
        assert rep.lower <= rep.plain <= rep.upper


def test_counting_inequality():
    for N in range(2, 6):
        dom, rng = counting_inequality(N)
        assert dom == (N + 1) ** N and rng == N * (N + 1) ** (N - 1) and dom > rng


def test_pigeonhole_all_index_functions():
    n = 0
    for I in all_index_functions(2):
        assert pigeonhole_certificate(2, I).check()
        n += 1
    assert n == 2**9


def test_pigeonhole_invalid_assignments():
    with pytest.raises(InvalidAssignment):
        pigeonhole_certificate(2, lambda a: 3)
    with pytest.raises(InvalidAssignment):
        pigeonhole_certificate(2, {(1, 1): 1})
    with pytest.raises(InvalidAssignment):
        pigeonhole_certificate(2, lambda a: (1, (2, 2)))
    with pytest.raises(ValidationError):
        pigeonhole_certificate(6, lambda a: 1)


def test_alternate_decomposition(bumpy):
    ens = build_ensemble(bumpy, 4.0, 1.0)
    n = ens.orbit_count
    rng = np.random.default_rng(0)
    mask = rng.random(n) < 0.5
    a1 = np.where(mask, 0.0, 1.0)
    a2 = np.where(mask, 1.0, 0.0)
    g = FiberWeight.from_field(ScalarField.cos(1, 0, 1.0))
    rep = alternate_livshits_demo(ens, [a1, a2], [0.3, -0.2], g)
    assert sum(rep.shares) == pytest.approx(1.0)
    assert rep.counts == [int(mask.sum()), n - int(mask.sum())]
    assert rep.recombined == pytest.approx(rep.full_integral, rel=1e-12)
    with pytest.raises(HypothesisViolated):
        alternate_livshits_demo(ens, [np.ones(n), np.ones(n)], [1.0, 1.0])
