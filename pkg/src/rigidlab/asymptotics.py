"""Period asymptotics of periodic orbits shadowing a homoclinic loop.

For the fixed point 0 with flow period T0 and a homoclinic point h, the
shadowing orbits q_n have periods ``T_n = n T0 + T' + R_n`` with ``R_n`` of
order ``n mu^n`` (or ``mu^n`` when the longitudinal cocycle vanishes at 0).
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import (
    BaseMismatch,
    Inconclusive,
    NotConverged,
    ToleranceAmbiguity,
    ValidationError,
)
from .fields import FiberWeight
from .longitudinal import longitudinal_cocycle
from .suspension import SuspensionFlow, orbit_flow_data, weight_integral
from .toral import HomoclinicPoint, MapOrbit, shadowing_periodic_point

EPS = sys.float_info.epsilon
SIGNAL_MARGIN = 100.0
FIT_TOLERANCE = 0.01


def _centered(x: Fraction) -> float:
    """Representative of x mod 1 in [-1/2, 1/2), rounded once."""
    return float(x - math.floor(x + Fraction(1, 2)))


@dataclass
class HomoclinicExperiment:
    flow: SuspensionFlow
    h: HomoclinicPoint
    n_values: list[int]
    T0: float
    deviations: dict[int, float]  # n -> T_n - n T0
    noise: dict[int, float]  # n -> rounding bound on the deviation
    T_prime: float | None = None
    uncertainty: float | None = None
    residuals: dict[int, float] = field(default_factory=dict)

    @property
    def periods(self) -> dict[int, float]:
        return {n: n * self.T0 + d for n, d in self.deviations.items()}

    def predicted_residual(self, n: int) -> float:
        return n * self.flow.base.lam_inv**n

    def reported(self) -> list[int]:
        """n values whose predicted residual clears the noise floor by the signal margin."""
        return [n for n in self.n_values if self.predicted_residual(n) > SIGNAL_MARGIN * self.noise[n]]


def homoclinic_deviation(flow: SuspensionFlow, h: HomoclinicPoint, n: int) -> float:
    """``T_n - n T0`` as an exactly rounded sum of roof deviations ``r(x_i) - r(0)``."""
    q = shadowing_periodic_point(flow.base, h, n)
    lifts = q.orbit_lifts()[:n]
    pts = np.array([[_centered(x), _centered(y)] for x, y in lifts])
    return math.fsum(flow.roof.deviation(pts))


def homoclinic_periods(flow: SuspensionFlow, h: HomoclinicPoint, n_range: Iterable[int]) -> HomoclinicExperiment:
    if h.automorphism is not flow.base and not h.automorphism.same_matrix(flow.base):
        raise BaseMismatch("homoclinic point belongs to a different base map")
    ns = sorted(set(int(n) for n in n_range))
    if not ns:
        raise ValidationError("empty n range")
    T0 = float(flow.roof(np.zeros(2)))
    amp = flow.roof.amplitude_sum()
    devs = {n: homoclinic_deviation(flow, h, n) for n in ns}
    noise = {n: n * EPS * 4.0 * amp for n in ns}
    return HomoclinicExperiment(flow, h, ns, T0, devs, noise)


def homoclinic_sum_oracle(flow: SuspensionFlow, h: HomoclinicPoint, cutoff: float = 1e-16) -> float:
    """Two-sided regularized sum ``sum_i (r(h_i) - r(0))`` over the homoclinic orbit."""
    terms = []
    for seq in (h.forward, lambda j: h.backward(j + 1)):
        i = 0
        while True:
            t = float(flow.roof.deviation(seq(i)))
            terms.append(t)
            i += 1
            if abs(t) < cutoff and i > 4 or i > 200:
                break
    return math.fsum(terms)


def estimate_T_prime(exp: HomoclinicExperiment) -> tuple[float, float]:
    """Geometric-tail extrapolation of ``T_n - n T0`` from the last three n."""
    ns = exp.n_values
    if len(ns) < 6:
        raise ValidationError("need at least 6 values of n")
    a = [exp.deviations[n] for n in ns]
    inc = [abs(a[j + 1] - a[j]) for j in range(len(a) - 1)]
    # increments at the rounding floor count as zero
    inc = [0.0 if d <= 2.0 * (exp.noise[ns[j]] + exp.noise[ns[j + 1]]) else d for j, d in enumerate(inc)]
    tail = inc[-4:]
    if any(tail[j + 1] > tail[j] for j in range(len(tail) - 1)):
        raise NotConverged(f"increments {tail} do not decrease over the last 5 points")
    a1, a2, a3 = a[-3:]
    d1, d2 = a2 - a1, a3 - a2
    den = d2 - d1
    tp = a3 if den == 0.0 or inc[-1] == 0.0 else a3 - d2 * d2 / den
    exp.T_prime = tp
    exp.uncertainty = inc[-1]
    exp.residuals = {n: exp.deviations[n] - tp for n in ns}
    return tp, inc[-1]


def increment_rate(exp: HomoclinicExperiment, ns: Iterable[int] | None = None) -> float:
    """Limiting contraction factor of the Cauchy increments.

    With ``d_n = (T_{n+1} - (n+1) T0) - (T_n - n T0)`` the ratios
    ``rho_n = |d_n / d_{n-1}|`` behave like ``mu (1 + c/n)`` (or ``mu`` when the
    n-factor is absent); the last two ratios are extrapolated in 1/n.
    """
    ns = [n for n in sorted(ns or exp.n_values) if n + 1 in exp.deviations]
    if len(ns) < 3:
        raise ValidationError("need at least three increments")
    d = {n: exp.deviations[n + 1] - exp.deviations[n] for n in ns[-3:]}
    n1, n2, n3 = ns[-3:]
    if (n2 - n1, n3 - n2) != (1, 1):
        raise ValidationError("increment rate needs consecutive n")
    if d[n1] == 0.0 or d[n2] == 0.0:
        raise ValidationError("increments vanish")
    r2, r3 = abs(d[n2] / d[n1]), abs(d[n3] / d[n2])
    return n3 * r3 - n2 * r2


@dataclass
class ExponentFit:
    log_mu_hat: float | None
    k_is_zero: bool
    n_used: list[int]
    misfit_linear_factor: float | None = None  # relative RMS of log|R_n| - log n fit
    misfit_plain: float | None = None  # relative RMS of log|R_n| fit


def _affine_misfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    coef = np.polyfit(x, y, 1)
    res = y - np.polyval(coef, x)
    span = float(np.ptp(y)) or 1.0
    return float(coef[0]), float(np.sqrt(np.mean(res**2))) / span


def recover_exponent(exp: HomoclinicExperiment, T_prime: float | None = None, ns: Iterable[int] | None = None) -> ExponentFit:
    """Recover log mu from the residuals and decide whether the n-factor is present.

    Two affine models are fitted: ``log|R_n| - log n`` (leading term ``K n mu^n``)
    and ``log|R_n|`` (leading term ``C mu^n``).  The better fit wins provided its
    relative RMS misfit is below 1% of the data range.
    """
    tp = exp.T_prime if T_prime is None else T_prime
    if tp is None:
        tp, _ = estimate_T_prime(exp)
    pool = sorted(ns) if ns is not None else exp.reported()
    R = {n: exp.deviations[n] - tp for n in pool}
    floor = {n: exp.noise[n] + EPS * abs(tp) for n in pool}
    live = [n for n in pool if abs(R[n]) > SIGNAL_MARGIN * floor[n]]
    if not live and all(abs(R[n]) <= SIGNAL_MARGIN * floor[n] for n in pool):
        # every residual is rounding noise: the n mu^n term is absent
        return ExponentFit(None, True, [])
    if len(live) < 8:
        raise Inconclusive(f"only {len(live)} residuals above the noise floor (need 8)")
    x = np.array(live, dtype=float)
    logR = np.log(np.abs([R[n] for n in live]))
    slope_a, mis_a = _affine_misfit(x, logR - np.log(x))
    slope_b, mis_b = _affine_misfit(x, logR)
    if min(mis_a, mis_b) > FIT_TOLERANCE:
        raise Inconclusive(f"neither model fits: misfits {mis_a:.3g}, {mis_b:.3g}")
    if mis_a < mis_b:
        return ExponentFit(slope_a, False, live, mis_a, mis_b)
    return ExponentFit(slope_b, True, live, mis_a, mis_b)


def c_sequence(exp: HomoclinicExperiment, K: float, ns: Iterable[int]) -> dict[int, float]:
    """``c_n = R_n / (K n mu^n)`` with ``mu = 1/lambda``."""
    lam_inv = exp.flow.base.lam_inv
    return {n: exp.residuals[n] / (K * n * lam_inv**n) for n in ns}


# -- case classification ----------------------------------------------------

ZERO_TOL = 1e-7
CHI_TOL = 1e-10


@dataclass(frozen=True)
class CaseResult:
    case: int
    contradiction: bool
    integral: float
    K1: float
    K2: float
    chi1: float
    chi2: float


def _is_zero(value: float, tol: float) -> bool:
    a = abs(value)
    if tol < a < 10.0 * tol:
        raise ToleranceAmbiguity(f"|{value:.3g}| falls inside the ambiguity band ({tol:g}, {10 * tol:g})")
    return a <= tol


def classify_case(flow1: SuspensionFlow, phi1, flow2: SuspensionFlow, phi2, orbit: MapOrbit,
                  tol: float = ZERO_TOL, weighted: bool = False) -> CaseResult:
    """Tetrachotomy (``weighted=False``) or pentachotomy label at one orbit.

    Cases: 0 the weighted integral vanishes (weighted only); 1 both K vanish;
    2 only K1 vanishes (needs chi1 < chi2); 3 only K2 vanishes (needs
    chi1 > chi2); 4 neither vanishes (needs chi1 == chi2).
    """
    if not flow1.base.same_matrix(flow2.base):
        raise BaseMismatch("flows have different base matrices")
    phi1 = FiberWeight.constant(1.0) if phi1 is None else phi1
    phi2 = FiberWeight.constant(1.0) if phi2 is None else phi2
    integral = weight_integral(flow1, phi1, orbit)
    K1 = longitudinal_cocycle(flow1, orbit, phi1).value
    K2 = longitudinal_cocycle(flow2, orbit, phi2).value
    chi1 = orbit_flow_data(flow1, orbit).exponent
    chi2 = orbit_flow_data(flow2, orbit).exponent
    equal = abs(chi1 - chi2) <= CHI_TOL * max(abs(chi1), abs(chi2))
    if weighted and _is_zero(integral, tol):
        return CaseResult(0, False, integral, K1, K2, chi1, chi2)
    z1, z2 = _is_zero(K1, tol), _is_zero(K2, tol)
    if z1 and z2:
        case, ok = 1, True
    elif z1:
        case, ok = 2, chi1 < chi2
    elif z2:
        case, ok = 3, chi1 > chi2
    else:
        case, ok = 4, equal
    return CaseResult(case, not ok, integral, K1, K2, chi1, chi2)
