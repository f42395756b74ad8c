import numpy as np
import pytest

from rigidlab import BaseMismatch, FiberWeight, ScalarField, make_automorphism, make_suspension
from rigidlab.cocycles import (
    abelian_coboundary_test,
    coboundary_weight,
    default_tol,
    matching_report,
    periodic_obstructions,
)


@pytest.fixture
def flat(cat):
    return make_suspension(cat, ScalarField.constant(1.0))


def test_coboundary_has_vanishing_obstructions(cat, flat):
    u = ScalarField.sin(1, 0, 0.3) + ScalarField.cos(2, 1, 0.1)
    rep = periodic_obstructions(flat, coboundary_weight(u, cat.matrix), 8)
    assert rep.is_coboundary_candidate
    assert rep.max_abs < 1e-12


def test_generic_weight_is_obstructed(flat):
    rep = periodic_obstructions(flat, FiberWeight.from_field(ScalarField.cos(1, 0, 1.0)), 4)
    assert not rep.is_coboundary_candidate
    assert rep.tol == default_tol(4)


def test_abelian_constant_recovered(cat, flat):
    u = ScalarField.cos(1, 1, 0.2)
    phi = FiberWeight.from_field(-0.4 + u.coboundary(cat.matrix))
    res = abelian_coboundary_test(flat, phi, 8)
    assert res.success and res.constant == pytest.approx(-0.4, abs=1e-12)
    bad = abelian_coboundary_test(flat, FiberWeight.from_field(1 + ScalarField.cos(1, 0, 0.3)), 6)
    assert not bad.success and bad.worst is not None


def test_matching_detects_cohomologous_roofs(cat):
    r = 1 + ScalarField.cos(1, 0, 0.1)
    w = ScalarField.sin(0, 1, 0.05)
    f1, f2 = make_suspension(cat, r), make_suspension(cat, r + w.coboundary(cat.matrix))
    one = FiberWeight.constant(1.0)
    rep = matching_report(f1, one, f2, one, 7)
    assert rep.verdict == "matched" and rep.first_mismatch() is None
    other = make_suspension(cat, 1 + ScalarField.cos(0, 1, 0.1))
    rep2 = matching_report(f1, one, other, one, 7)
    assert rep2.verdict != "matched" and rep2.first_mismatch() is not None
    lines = rep.to_csv().splitlines()
    assert len(lines) == 1 + len(rep.rows)


def test_matching_requires_same_base(cat):
    other = make_automorphism([[3, 2], [1, 1]])
    one = FiberWeight.constant(1.0)
    with pytest.raises(BaseMismatch):
        matching_report(make_suspension(cat, ScalarField.constant(1.0)), one,
                        make_suspension(other, ScalarField.constant(1.0)), one, 3)
