"""The longitudinal cocycle K and its weighted version K_phi.

On the section ``{s = 0}`` with eigen-axes at a periodic point p of period k,
the weighted return time is

    xi_phi(p + x e_u + y e_s) = sum_i Phi(p_i + lam^i x e_u + lam^-i y e_s),
    Phi(x) = int_0^{r(x)} phi(x, s) ds = sum_d g_d(x) r(x)^(d+1) / (d+1),

and ``K_phi(p) = d^2 xi_phi / dx dy`` at the origin.  Since the base is linear
the analytic value is ``sum_i Hess Phi(p_i)[e_u, e_s]``.

``K_phi`` is linear in the amplitudes of phi.  Both methods are evaluated term
by term (one value per trigonometric basis function of each fiber degree) and
then contracted with the amplitudes, which makes linearity structural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NonPositiveWeight, StepTooSmall, TiltTooLarge
from .fields import FiberWeight, ScalarField
from .suspension import SuspensionFlow, make_suspension
from .toral import MapOrbit

H0 = 1e-3
MIN_STEP = 1e-7

ANALYTIC = "analytic"
FINITE_DIFFERENCE = "finite_difference"


@dataclass(frozen=True)
class CocycleValue:
    orbit: str
    value: float
    method: str
    gauge: tuple[float, float] = (1.0, 1.0)  # scale factors on (e_u, e_s)


# a basis element: fiber degree d, frequency, 0 for cos / 1 for sin
BasisKey = tuple[int, tuple[int, int], int]


def _expand(phi: FiberWeight) -> dict[BasisKey, float]:
    out: dict[BasisKey, float] = {}
    for d, g in phi.components:
        for k, a, b in g.terms:
            if a != 0.0:
                out[(d, k, 0)] = a
            if b != 0.0:
                out[(d, k, 1)] = b
    return out


def _basis_field(key: BasisKey) -> ScalarField:
    _, (kx, ky), kind = key
    return ScalarField.sin(kx, ky) if kind else ScalarField.cos(kx, ky)


def _axes(flow: SuspensionFlow, gauge) -> tuple[np.ndarray, np.ndarray]:
    A = flow.base
    return gauge[0] * np.asarray(A.e_u), gauge[1] * np.asarray(A.e_s)


# -- analytic ---------------------------------------------------------------

def _analytic_basis(flow: SuspensionFlow, pts: np.ndarray, keys, gauge) -> dict[BasisKey, float]:
    u, v = _axes(flow, gauge)
    r = flow.roof(pts)
    gr = flow.roof.gradient(pts)
    ur, vr = gr @ u, gr @ v
    Hr = np.einsum("...i,...ij,j->...", np.broadcast_to(u, gr.shape), flow.roof.hessian(pts), v)
    out = {}
    for key in keys:
        d = key[0]
        b = _basis_field(key)
        bv = b(pts)
        gb = b.gradient(pts)
        ub, vb = gb @ u, gb @ v
        Hb = np.einsum("...i,...ij,j->...", np.broadcast_to(u, gb.shape), b.hessian(pts), v)
        R = r ** (d + 1) / (d + 1)
        rd = r**d
        HR = rd * Hr + (d * r ** (d - 1) * ur * vr if d > 0 else 0.0)
        # Hess(b R)[u, v] by the product rule
        terms = Hb * R + ub * rd * vr + rd * ur * vb + bv * HR
        out[key] = math.fsum(np.atleast_1d(terms))
    return out


# -- finite differences -----------------------------------------------------

def _steps(flow: SuspensionFlow, k: int, h: float) -> tuple[float, float]:
    """Unstable and stable steps; the unstable one shrinks so that the
    displacement ``lam^i hx`` stays below h along the whole orbit."""
    return h * flow.base.lam_inv ** (k - 1), h


def _stencil_points(flow: SuspensionFlow, pts: np.ndarray, h: float, gauge) -> np.ndarray:
    """Displaced orbit points, shape (4, k, 2) for corners ++, +-, -+, --."""
    A = flow.base
    u, v = _axes(flow, gauge)
    hx, hy = _steps(flow, pts.shape[0], h)
    i = np.arange(pts.shape[0], dtype=float)
    su = (hx * A.eig_u**i)[:, None] * u
    ss = (hy * A.eig_s**i)[:, None] * v
    return np.stack([a * su + b * ss for a, b in _CORNERS])


_CORNERS = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def _increments(flow: SuspensionFlow, pts: np.ndarray, disp: np.ndarray, keys) -> dict[BasisKey, np.ndarray]:
    """Per-basis increments ``Phi_key(p_i + disp) - Phi_key(p_i)``."""
    q = pts + disp
    rp = flow.roof(pts)
    rq = flow.roof(q)
    dr = flow.roof.increment(pts, disp)
    out = {}
    for key in keys:
        d = key[0]
        b = _basis_field(key)
        bp = b(pts)
        db = b.increment(pts, disp)
        # r(q)^{d+1} - r(p)^{d+1} = dr * sum_j r(q)^j r(p)^{d-j}
        geo = sum(rq**j * rp ** (d - j) for j in range(d + 1))
        out[key] = db * rq ** (d + 1) / (d + 1) + bp * dr * geo / (d + 1)
    return out


def _cross(inc: np.ndarray, hx: float, hy: float) -> float:
    # inc has shape (4, k): corners ++, +-, -+, --
    s = [math.fsum(row) for row in inc]
    return ((s[0] - s[1]) - (s[2] - s[3])) / (4.0 * hx * hy)


def _richardson(vals: Sequence[float]) -> float:
    d0, d1, d2 = vals
    r0 = (4.0 * d1 - d0) / 3.0
    r1 = (4.0 * d2 - d1) / 3.0
    return (16.0 * r1 - r0) / 15.0


def _fd_basis(flow: SuspensionFlow, pts: np.ndarray, keys, h0: float, gauge, tilt: ScalarField | None = None) -> dict[BasisKey, float]:
    A = flow.base
    k = pts.shape[0]
    h_min = min(_steps(flow, k, h0 / 4.0))
    if not h_min > MIN_STEP:
        raise StepTooSmall(f"finite-difference step {h_min:.3g} is below {MIN_STEP:g} (period {k})")
    per_h: dict[BasisKey, list[float]] = {key: [] for key in keys}
    for h in (h0, h0 / 2.0, h0 / 4.0):
        disp = _stencil_points(flow, pts, h, gauge)
        inc = _increments(flow, pts, disp, keys)
        for key in keys:
            vals = inc[key]
            if tilt is not None and key == (0, (0, 0), 0):
                # section {s = tilt(x)}: xi' = xi - tilt + tilt o F_p, F_p(p + z) = p + A^k z
                z0 = disp[:, 0]
                u, v = _axes(flow, gauge)
                hx, hy = _steps(flow, k, h)
                zk = np.stack([a * hx * A.eig_u**k * u + b * hy * A.eig_s**k * v for a, b in _CORNERS])
                p = np.broadcast_to(pts[0], z0.shape)
                extra = tilt.increment(p, zk) - tilt.increment(p, z0)
                vals = np.concatenate([vals, extra[:, None]], axis=1)
            per_h[key].append(_cross(vals, *_steps(flow, k, h)))
    return {key: _richardson(v) for key, v in per_h.items()}


# -- public operations ------------------------------------------------------

def _weight(phi) -> FiberWeight:
    if phi is None:
        return FiberWeight.constant(1.0)
    if isinstance(phi, ScalarField):
        return FiberWeight.from_field(phi)
    return phi


def basis_values(flow: SuspensionFlow, orbit: MapOrbit, keys, method: str = ANALYTIC, h0: float = H0,
                 gauge=(1.0, 1.0)) -> dict[BasisKey, float]:
    pts = orbit.float_points()
    if method == ANALYTIC:
        return _analytic_basis(flow, pts, keys, gauge)
    if method == FINITE_DIFFERENCE:
        return _fd_basis(flow, pts, keys, h0, gauge)
    raise ValueError(f"unknown method {method!r}")


def longitudinal_cocycle(flow: SuspensionFlow, orbit: MapOrbit, phi=None, method: str = ANALYTIC,
                         h0: float = H0, gauge=(1.0, 1.0)) -> CocycleValue:
    """``K_phi`` at a periodic orbit (``K`` itself when phi is omitted)."""
    coeffs = _expand(_weight(phi))
    vals = basis_values(flow, orbit, list(coeffs), method, h0, gauge)
    value = math.fsum(c * vals[key] for key, c in coeffs.items())
    return CocycleValue(orbit.label, value, method, tuple(gauge))


def exact_linear_form(flow: SuspensionFlow, orbit: MapOrbit, combination, method: str = ANALYTIC,
                      h0: float = H0) -> Fraction:
    """Exact value of ``sum_j c_j K_{phi_j}`` given ``[(c_j, phi_j), ...]``.

    The basis values are floats; the contraction with amplitudes is done in
    rational arithmetic, so the result is an exactly linear function of the
    coefficients.
    """
    coeffs: dict[BasisKey, Fraction] = {}
    for c, phi in combination:
        for key, a in _expand(_weight(phi)).items():
            coeffs[key] = coeffs.get(key, Fraction(0)) + Fraction(c) * Fraction(a)
    vals = basis_values(flow, orbit, list(coeffs), method, h0)
    return sum((a * Fraction(vals[key]) for key, a in coeffs.items()), Fraction(0))


@dataclass(frozen=True)
class TransversalCheck:
    k_straight: float
    k_tilted: float

    @property
    def discrepancy(self) -> float:
        return abs(self.k_tilted - self.k_straight)


def transversal_independence_check(flow: SuspensionFlow, orbit: MapOrbit, tilt: ScalarField,
                                   h0: float = H0) -> TransversalCheck:
    """Recompute K on the tilted section ``{s = tilt(x)}`` by finite differences."""
    size = abs(tilt.constant_term) + tilt.amplitude_sum()
    if size > 0.05 * flow.roof_min:
        raise TiltTooLarge(f"tilt size {size:.3g} exceeds 0.05 * roof_min = {0.05 * flow.roof_min:.3g}")
    pts = orbit.float_points()
    key = (0, (0, 0), 0)
    straight = _fd_basis(flow, pts, [key], h0, (1.0, 1.0))[key]
    if not tilt.terms:
        return TransversalCheck(straight, straight)
    tilted = _fd_basis(flow, pts, [key], h0, (1.0, 1.0), tilt=tilt)[key]
    return TransversalCheck(straight, tilted)


@dataclass(frozen=True)
class IdentityRow:
    orbit: str
    linearity_analytic: Fraction
    linearity_fd: float
    covariance_fd: float | None
    covariance_analytic: float | None


def reparametrized_flow(flow: SuspensionFlow, phi: FiberWeight) -> SuspensionFlow:
    """Time change by a positive fiber-constant weight: new roof ``g * r``."""
    phi = _weight(phi)
    if not phi.is_fiber_constant:
        raise NonPositiveWeight("reparametrization needs a fiber-constant weight")
    g = phi.base
    if not g.lower_bound() > 0.0:
        raise NonPositiveWeight("weight is not strictly positive")
    return make_suspension(flow.base, g * flow.roof)


def verify_cocycle_identities(flow: SuspensionFlow, orbits: Sequence[MapOrbit], phi, psi, b: float, c: float,
                              covariance: bool = True, h0: float = H0) -> list[IdentityRow]:
    """Linearity of ``phi -> K_phi`` and covariance under time change, per orbit."""
    phi, psi = _weight(phi), _weight(psi)
    combo = phi * b + psi * c
    flow_y = reparametrized_flow(flow, phi) if covariance else None
    rows = []
    for orb in orbits:
        lin_a = (exact_linear_form(flow, orb, [(b, phi), (c, psi)])
                 - Fraction(b) * exact_linear_form(flow, orb, [(1, phi)])
                 - Fraction(c) * exact_linear_form(flow, orb, [(1, psi)]))
        fd = [longitudinal_cocycle(flow, orb, w, FINITE_DIFFERENCE, h0).value for w in (combo, phi, psi)]
        lin_fd = abs(fd[0] - b * fd[1] - c * fd[2])
        cov_fd = cov_a = None
        if flow_y is not None:
            cov_fd = abs(longitudinal_cocycle(flow_y, orb, None, FINITE_DIFFERENCE, h0).value - fd[1])
            cov_a = abs(longitudinal_cocycle(flow_y, orb).value - longitudinal_cocycle(flow, orb, phi).value)
        rows.append(IdentityRow(orb.label, abs(lin_a), lin_fd, cov_fd, cov_a))
    return rows
