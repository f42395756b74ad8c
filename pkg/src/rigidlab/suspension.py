"""Suspension flows over toral automorphisms.

Points of the flow are pairs ``(x, s)`` with ``0 <= s < roof(x)``, glued by
``(x, roof(x)) ~ (A x, 0)``.  Periodic flow orbits are base periodic orbits;
their periods are Birkhoff sums of the roof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonPositiveRoof, ValidationError
from .fields import FiberWeight, ScalarField
from .toral import MapOrbit, OrbitBlock, ToralAutomorphism


@dataclass(frozen=True, eq=False)
class SuspensionFlow:
    base: ToralAutomorphism
    roof: ScalarField
    roof_min: float

    def period(self, points) -> float:
        """Birkhoff sum of the roof over ``points`` (shape (k, 2)), exactly rounded."""
        return math.fsum(self.roof(np.asarray(points, dtype=float)))

    def with_roof(self, roof: ScalarField) -> "SuspensionFlow":
        return make_suspension(self.base, roof)


def make_suspension(A: ToralAutomorphism, roof: ScalarField) -> SuspensionFlow:
    lo = roof.lower_bound()
    if not lo > 0.0:
        raise NonPositiveRoof(f"certified roof lower bound {lo:.6g} is not positive")
    return SuspensionFlow(A, roof, lo)


@dataclass(frozen=True)
class FlowOrbitData:
    map_orbit: MapOrbit
    period: float
    exponent: float
    multiplier: float


def _check_orbit(flow: SuspensionFlow, orbit: MapOrbit) -> None:
    # cheap membership check: A maps the last point back onto the first
    (a, b), (c, d) = flow.base.matrix
    D = orbit.denominator
    x, y = orbit.numerators[-1]
    if ((a * x + b * y) % D, (c * x + d * y) % D) != tuple(orbit.numerators[0]):
        raise ValidationError("orbit does not belong to the base map")


def orbit_flow_data(flow: SuspensionFlow, orbit: MapOrbit) -> FlowOrbitData:
    _check_orbit(flow, orbit)
    k = orbit.prime_period
    T = flow.period(orbit.float_points())
    chi = k * math.log(flow.base.lam) / T
    return FlowOrbitData(orbit, T, chi, flow.base.lam_inv**k)


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def quadrature_nodes(phi: FiberWeight) -> int:
    return max(1, math.ceil((phi.degree + 1) / 2))


def fiber_integrals(flow: SuspensionFlow, phi: FiberWeight, points, nodes: int | None = None) -> np.ndarray:
    """``int_0^{roof(x)} phi(x, s) ds`` at each point, by Gauss-Legendre quadrature."""
    pts = np.asarray(points, dtype=float)
    r = flow.roof(pts)
    if phi.is_fiber_constant:
        return phi.base(pts) * r
    s, w = gauss_legendre(nodes or quadrature_nodes(phi))
    out = np.zeros_like(r)
    for d, g in phi.components:
        # int_0^r s^d ds = r^{d+1} sum_j w_j s_j^d
        out = out + g(pts) * r ** (d + 1) * float(np.dot(w, s**d))
    return out


def weight_integral(flow: SuspensionFlow, phi: FiberWeight, orbit: MapOrbit, nodes: int | None = None) -> float:
    _check_orbit(flow, orbit)
    return math.fsum(fiber_integrals(flow, phi, orbit.float_points(), nodes))


def row_sums(values: np.ndarray) -> np.ndarray:
    """Compensated (Neumaier) sums along the last axis, vectorized over rows."""
    values = np.asarray(values, dtype=float)
    s = np.zeros(values.shape[:-1])
    comp = np.zeros_like(s)
    for j in range(values.shape[-1]):
        v = values[..., j]
        t = s + v
        big = np.abs(s) >= np.abs(v)
        comp += np.where(big, (s - t) + v, (v - t) + s)
        s = t
    return s + comp


def block_periods(flow: SuspensionFlow, block: OrbitBlock, pts: np.ndarray | None = None) -> np.ndarray:
    """Flow periods of every orbit in a block."""
    if pts is None:
        pts = block.float_points()
    if flow.roof.is_constant:
        return np.full(pts.shape[0], block.k * flow.roof.constant_term)
    return row_sums(flow.roof(pts))


def block_weight_integrals(flow: SuspensionFlow, phi: FiberWeight, block: OrbitBlock, pts: np.ndarray | None = None) -> np.ndarray:
    if pts is None:
        pts = block.float_points()
    return row_sums(fiber_integrals(flow, phi, pts))
