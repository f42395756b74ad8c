"""Periodic obstructions, coboundary tests and matching reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import BaseMismatch, EmptyCatalog
from .fields import FiberWeight
from .suspension import SuspensionFlow, block_periods, block_weight_integrals
from .toral import OrbitBlock, enumerate_periodic_orbits

MATCH_HEADER = ["k", "rep_x", "rep_y", "T1", "T2", "I1", "I2", "gap", "chi_gap"]


def default_tol(k_max: int) -> float:
    return 1e-9 * (1 + k_max)


def _catalog(flow: SuspensionFlow, k_max: int):
    if k_max < 1:
        raise EmptyCatalog("no orbits with k <= k_max")
    return enumerate_periodic_orbits(flow.base, k_max)


def _labels(block: OrbitBlock) -> list[str]:
    D = block.denominator
    return [f"{block.k}:{Fraction(int(a), D)}:{Fraction(int(b), D)}" for a, b in block.reps]


@dataclass
class ObstructionReport:
    entries: list[tuple[str, int, float, float]]
    max_abs: float
    tol: float

    @property
    def is_coboundary_candidate(self) -> bool:
        return self.max_abs <= self.tol


def periodic_obstructions(flow: SuspensionFlow, phi: FiberWeight, k_max: int, tol: float | None = None) -> ObstructionReport:
    """``int_gamma phi dt`` on every prime orbit with k <= k_max, ordered by k then representative."""
    tol = default_tol(k_max) if tol is None else tol
    entries = []
    for k, block in sorted(_catalog(flow, k_max).items()):
        pts = block.float_points()
        T = block_periods(flow, block, pts)
        I = block_weight_integrals(flow, phi, block, pts)
        entries.extend(zip(_labels(block), [k] * len(block), T.tolist(), I.tolist()))
    max_abs = max((abs(e[3]) for e in entries), default=0.0)
    return ObstructionReport(entries, max_abs, tol)


@dataclass
class AbelianResult:
    success: bool
    constant: float
    max_residual: float
    worst: tuple[str, int, float, float] | None = None  # (label, k, integral, residual)


def abelian_coboundary_test(flow: SuspensionFlow, phi: FiberWeight, k_max: int, tol: float | None = None) -> AbelianResult:
    """Test whether ``int_gamma phi`` equals ``c * k(gamma)`` for one constant c.

    Cohomology of a cat-map suspension is generated by the class counting
    section crossings, so an abelian coboundary has periodic integrals
    proportional to the base period k.
    """
    rep = periodic_obstructions(flow, phi, k_max, tol)
    if not rep.entries:
        raise EmptyCatalog("no orbits with k <= k_max")
    first = rep.entries[0]
    c = first[3] / first[1]
    worst = None
    max_res = 0.0
    for label, k, _T, val in rep.entries:
        res = abs(val - c * k)
        if res > max_res or worst is None:
            max_res = max(max_res, res)
            worst = (label, k, val, res)
    return AbelianResult(max_res <= rep.tol, c, max_res, None if max_res <= rep.tol else worst)


@dataclass
class MatchRow:
    k: int
    rep: tuple[Fraction, Fraction]
    T1: float
    T2: float
    I1: float
    I2: float

    @property
    def gap(self) -> float:
        return self.I1 - self.I2

    @property
    def chi_gap(self) -> float:
        # chi_i = k log(lambda) / T_i on a shared base
        return self._logl * self.k * (1.0 / self.T1 - 1.0 / self.T2)

    _logl: float = field(default=0.0, repr=False)


@dataclass
class MatchReport:
    rows: list[MatchRow]
    tol: float

    @property
    def max_gap(self) -> float:
        return max((abs(r.gap) for r in self.rows), default=0.0)

    @property
    def verdict(self) -> str:
        return "matched" if self.max_gap <= self.tol else "mismatched"

    def first_mismatch(self) -> MatchRow | None:
        return next((r for r in self.rows if abs(r.gap) > self.tol), None)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(MATCH_HEADER)
        for r in self.rows:
            w.writerow([r.k, repr(float(r.rep[0])), repr(float(r.rep[1])),
                        repr(r.T1), repr(r.T2), repr(r.I1), repr(r.I2), repr(r.gap), repr(r.chi_gap)])
        return buf.getvalue()


def matching_report(flow1: SuspensionFlow, phi1: FiberWeight, flow2: SuspensionFlow, phi2: FiberWeight,
                    k_max: int, tol: float | None = None) -> MatchReport:
    """Compare weighted periodic data of two flows over the same base.

    The orbit correspondence is the identity on base orbits.
    """
    if not flow1.base.same_matrix(flow2.base):
        raise BaseMismatch("flows have different base matrices")
    tol = default_tol(k_max) if tol is None else tol
    logl = math.log(flow1.base.lam)
    rows = []
    for k, block in sorted(_catalog(flow1, k_max).items()):
        pts = block.float_points()
        cols = [block_periods(flow1, block, pts), block_periods(flow2, block, pts),
                block_weight_integrals(flow1, phi1, block, pts), block_weight_integrals(flow2, phi2, block, pts)]
        D = block.denominator
        for j, (a, b) in enumerate(block.reps):
            rows.append(MatchRow(k, (Fraction(int(a), D), Fraction(int(b), D)),
                                 *(float(c[j]) for c in cols), _logl=logl))
    return MatchReport(rows, tol)


def coboundary_weight(u, matrix) -> FiberWeight:
    """Fiber-constant weight ``u o A - u``."""
    return FiberWeight.from_field(u.coboundary(matrix))


def obstruction_values(flow: SuspensionFlow, phi: FiberWeight, block: OrbitBlock, pts: np.ndarray | None = None) -> np.ndarray:
    """Per-orbit ``int_gamma phi dt`` for a whole block."""
    return block_weight_integrals(flow, phi, block, pts)


__all__ = [
    "AbelianResult", "MatchReport", "MatchRow", "ObstructionReport", "abelian_coboundary_test",
    "coboundary_weight", "default_tol", "matching_report", "obstruction_values", "periodic_obstructions",
]
