"""Weighted periodic ensembles and Bowen approximations of equilibrium states.

For a window ``(T, T + delta]`` and a potential B the approximating measure is

    mu_{T,B} = sum_gamma e^{B(gamma)} delta_gamma / sum_gamma |gamma| e^{B(gamma)}

where ``delta_gamma`` is the orbit measure of total mass |gamma|.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .errors import CostGate, HypothesisViolated, InvalidAssignment, ValidationError
from .fields import FiberWeight
from .suspension import SuspensionFlow, fiber_integrals, row_sums
from .toral import (
    DEFAULT_CHUNK,
    MapOrbit,
    _prime_reps_in,
    fixed_point_lattice,
    orbit_points,
)

K_CAP_LIMIT = 20
ORBIT_CHUNK = 1 << 16


@dataclass(frozen=True)
class Potential:
    """Potential B: ``zero``, ``unstable_jacobian`` (B = -log J^u), ``constant`` or ``weight``."""

    kind: str = "zero"
    value: float = 0.0
    weight: FiberWeight | None = None

    @classmethod
    def zero(cls) -> "Potential":
        return cls("zero")

    @classmethod
    def unstable_jacobian(cls) -> "Potential":
        return cls("unstable_jacobian")

    @classmethod
    def constant(cls, c: float) -> "Potential":
        return cls("constant", float(c))

    @classmethod
    def from_weight(cls, phi: FiberWeight) -> "Potential":
        return cls("weight", 0.0, phi)

    def values(self, flow: SuspensionFlow, k: int, pts: np.ndarray) -> np.ndarray:
        n = pts.shape[0]
        if self.kind == "zero":
            return np.zeros(n)
        if self.kind == "unstable_jacobian":
            return np.full(n, -k * math.log(flow.base.lam))
        if self.kind == "constant":
            return np.full(n, self.value)
        if self.kind == "weight":
            return orbit_integrals(flow, self.weight, pts)
        raise ValidationError(f"unknown potential kind {self.kind!r}")


def orbit_integrals(flow: SuspensionFlow, g: FiberWeight, pts: np.ndarray, periods: np.ndarray | None = None) -> np.ndarray:
    """``int_gamma g dt`` for orbit points of shape (M, k, 2)."""
    if g.is_fiber_constant and g.base.is_constant and periods is not None:
        return g.base.constant_term * periods
    return row_sums(fiber_integrals(flow, g, pts))


def _periods(flow: SuspensionFlow, k: int, pts: np.ndarray) -> np.ndarray:
    if flow.roof.is_constant:
        return np.full(pts.shape[0], k * flow.roof.constant_term)
    return row_sums(flow.roof(pts))


@dataclass
class EnsembleBlock:
    k: int
    denominator: int
    reps: np.ndarray  # (M, 2) int64 numerators, lexicographic
    periods: np.ndarray
    B: np.ndarray

    def points(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        return orbit_points(self._A, self.reps[start:stop], self.k, self.denominator) / self.denominator

    _A: object = field(default=None, repr=False)


@dataclass
class PeriodicEnsemble:
    flow: SuspensionFlow
    T: float
    delta: float
    potential: Potential
    k_cap: int
    blocks: list[EnsembleBlock]

    @property
    def orbit_count(self) -> int:
        return sum(len(b.reps) for b in self.blocks)

    def periods(self) -> np.ndarray:
        return np.concatenate([b.periods for b in self.blocks]) if self.blocks else np.zeros(0)

    def potentials(self) -> np.ndarray:
        return np.concatenate([b.B for b in self.blocks]) if self.blocks else np.zeros(0)

    def orbits(self) -> Iterator[MapOrbit]:
        lam = self.flow.base.lam
        for b in self.blocks:
            nums = orbit_points(self.flow.base, b.reps, b.k, b.denominator)
            for row in nums:
                yield MapOrbit(b.k, b.denominator, tuple((int(x), int(y)) for x, y in row), lam**b.k)

    def iter_points(self) -> Iterator[tuple[EnsembleBlock, slice, np.ndarray]]:
        """Stream orbit points block by block in bounded chunks."""
        for b in self.blocks:
            for s in range(0, len(b.reps), ORBIT_CHUNK):
                sl = slice(s, s + ORBIT_CHUNK)
                yield b, sl, b.points(sl.start, sl.stop)

    def shifted_weights(self) -> tuple[np.ndarray, float]:
        """``e^{B - max B}`` and the shift ``max B``."""
        B = self.potentials()
        if B.size == 0:
            return B, 0.0
        shift = float(B.max())
        return np.exp(B - shift), shift

    def summary(self) -> dict:
        m = measure_approx(self)
        return {"T": self.T, "delta": self.delta, "orbit_count": self.orbit_count,
                "normalization": m.normalization}


def k_cap_for(flow: SuspensionFlow, T: float, delta: float) -> int:
    return math.ceil((T + delta) / flow.roof_min)


def _stripe_members(flow, k, lat, start, stop, T, delta, potential):
    D = lat.denominator
    reps = _prime_reps_in(flow.base, k, D, lat.numerators(start, stop))
    if reps.size == 0:
        return reps, np.zeros(0), np.zeros(0)
    pts = orbit_points(flow.base, reps, k, D) / D
    per = _periods(flow, k, pts)
    keep = (per > T) & (per <= T + delta)
    return reps[keep], per[keep], potential.values(flow, k, pts[keep])


def build_ensemble(flow: SuspensionFlow, T: float, delta: float = 1.0, potential: Potential | None = None,
                   threads: int = 1, chunk: int = DEFAULT_CHUNK) -> PeriodicEnsemble:
    """All prime flow orbits with period in ``(T, T + delta]``, enumerated exhaustively."""
    potential = potential or Potential.zero()
    if not delta > 0:
        raise ValidationError("delta must be positive")
    if not T >= 0:
        raise ValidationError("T must be non-negative")
    k_cap = k_cap_for(flow, T, delta)
    if k_cap > K_CAP_LIMIT:
        raise CostGate(f"k_cap = {k_cap} exceeds {K_CAP_LIMIT}")
    roof_max = flow.roof.constant_term + flow.roof.amplitude_sum()
    blocks = []
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for k in range(1, k_cap + 1):
            if k * roof_max <= T:
                continue  # every period of this length is below the window
            if flow.roof.is_constant and not (T < k * flow.roof.constant_term <= T + delta):
                continue
            lat = fixed_point_lattice(flow.base, k)
            starts = range(0, lat.denominator, chunk)

            def work(s, k=k, lat=lat):
                return _stripe_members(flow, k, lat, s, s + chunk, T, delta, potential)

            parts = list(pool.map(work, starts)) if pool else [work(s) for s in starts]
            reps = np.concatenate([p[0] for p in parts])
            if reps.size == 0:
                continue
            per = np.concatenate([p[1] for p in parts])
            B = np.concatenate([p[2] for p in parts])
            order = np.lexsort((reps[:, 1], reps[:, 0]))
            blocks.append(EnsembleBlock(k, lat.denominator, reps[order], per[order], B[order], _A=flow.base))
    finally:
        if pool:
            pool.shutdown()
    return PeriodicEnsemble(flow, float(T), float(delta), potential, k_cap, blocks)


@dataclass
class MeasureApprox:
    ensemble: PeriodicEnsemble
    normalization: float  # sum |gamma| e^{B(gamma)}
    log_normalization: float

    def evaluate(self, g: FiberWeight) -> float:
        return bowen_integral(self, g)


def measure_approx(ensemble: PeriodicEnsemble) -> MeasureApprox:
    w, shift = ensemble.shifted_weights()
    s = math.fsum(w * ensemble.periods())
    if s == 0.0:
        return MeasureApprox(ensemble, 0.0, -math.inf)
    log_norm = math.log(s) + shift
    norm = math.exp(log_norm) if log_norm < 700 else math.inf
    return MeasureApprox(ensemble, norm, log_norm)


def ensemble_integrals(ensemble: PeriodicEnsemble, g: FiberWeight) -> np.ndarray:
    """``int_gamma g dt`` for every ensemble orbit, in ensemble order."""
    out = []
    for b, sl, pts in ensemble.iter_points():
        out.append(orbit_integrals(ensemble.flow, g, pts, b.periods[sl]))
    return np.concatenate(out) if out else np.zeros(0)


def bowen_integral(m: MeasureApprox, g: FiberWeight) -> float:
    ens = m.ensemble
    if ens.orbit_count == 0:
        raise ValidationError("empty ensemble")
    w, _ = ens.shifted_weights()
    num = math.fsum(w * ensemble_integrals(ens, g))
    den = math.fsum(w * ens.periods())
    return num / den


@dataclass(frozen=True)
class ProportionReport:
    plain: float  # mu_{T,B}(P_{T,a})
    hat: float  # hat-normalized mass
    lower: float  # T/(T+delta) * hat
    upper: float  # (T+delta)/T * hat

    @property
    def bounds_hold(self) -> bool:
        return self.lower <= self.plain * (1 + 1e-12) and self.plain <= self.upper * (1 + 1e-12)

    @property
    def ratio(self) -> float | None:
        return self.plain / self.hat if self.hat > 0 else None


def positive_proportion(m: MeasureApprox, a: Sequence[float] | np.ndarray, tol: float = 1e-9) -> ProportionReport:
    """Mass of the orbits on which the cocycle values ``a`` vanish within tol."""
    ens = m.ensemble
    a = np.asarray(a, dtype=float)
    if a.shape != (ens.orbit_count,):
        raise ValidationError("cocycle values must be given for every ensemble orbit")
    w, _ = ens.shifted_weights()
    per = ens.periods()
    mask = np.abs(a) <= tol
    plain = math.fsum(w[mask] * per[mask]) / math.fsum(w * per)
    hat = math.fsum(w[mask] / per[mask]) / math.fsum(w / per)
    T, d = ens.T, ens.delta
    lower = T / (T + d) * hat
    upper = (T + d) / T * hat if T > 0 else math.inf
    return ProportionReport(plain, hat, lower, upper)


# -- combinatorics ------------------------------------------------------------

@dataclass(frozen=True)
class PigeonholeCertificate:
    N: int
    alpha_bar: tuple[int, ...]
    beta_bar: tuple[int, ...]
    index: int  # 1-based
    image: tuple[int, tuple[int, ...]]
    domain_size: int
    range_size: int

    def check(self) -> bool:
        i = self.index - 1
        return (self.alpha_bar != self.beta_bar
                and self.alpha_bar[i] != self.beta_bar[i]
                and all(a == b for j, (a, b) in enumerate(zip(self.alpha_bar, self.beta_bar)) if j != i)
                and self.image[0] == self.index and self.image[1][i] == 1)


def counting_inequality(N: int) -> tuple[int, int]:
    """``((N+1)^N, N (N+1)^(N-1))``: domain and range sizes."""
    return (N + 1) ** N, N * (N + 1) ** (N - 1)


def _structural_image(alpha: tuple[int, ...], i: int) -> tuple[int, tuple[int, ...]]:
    return i, alpha[: i - 1] + (1,) + alpha[i:]


def pigeonhole_certificate(N: int, assignment: Mapping | Callable) -> PigeonholeCertificate:
    """Find two tuples with the same image under a structural assignment.

    ``assignment`` maps each tuple in ``{1..N+1}^N`` either to an index i
    (1-based) or to the full image ``(i, alpha with alpha_i = 1)``.
    """
    if not 2 <= N <= 5:
        raise ValidationError("N must lie in [2, 5]")
    get = assignment if callable(assignment) else assignment.__getitem__
    seen: dict = {}
    found = None
    for alpha in itertools.product(range(1, N + 2), repeat=N):
        try:
            val = get(alpha)
        except (KeyError, IndexError) as exc:
            raise InvalidAssignment(f"no image for {alpha}") from exc
        if isinstance(val, (int, np.integer)):
            i = int(val)
            if not 1 <= i <= N:
                raise InvalidAssignment(f"index {i} for {alpha} outside [1, {N}]")
            image = _structural_image(alpha, i)
        else:
            i, beta = int(val[0]), tuple(int(t) for t in val[1])
            if not 1 <= i <= N or beta != _structural_image(alpha, i)[1]:
                raise InvalidAssignment(f"image {val} of {alpha} is not of the form (i, alpha with alpha_i = 1)")
            image = (i, beta)
        if found is None and image in seen:
            found = (seen[image], alpha, image)
        seen.setdefault(image, alpha)
    dom, rng = counting_inequality(N)
    if found is None:  # impossible when dom > rng
        raise InvalidAssignment("no collision found")
    a, b, image = found
    return PigeonholeCertificate(N, a, b, image[0], image, dom, rng)


def all_index_functions(N: int) -> Iterator[dict]:
    """Every structural assignment for a given N (N^((N+1)^N) of them; use for N = 2)."""
    domain = list(itertools.product(range(1, N + 2), repeat=N))
    for choice in itertools.product(range(1, N + 1), repeat=len(domain)):
        yield dict(zip(domain, choice))


# -- alternate Livshits decomposition ---------------------------------------

@dataclass
class DecompositionReport:
    shares: list[float]  # s_T^i
    component_integrals: list[float | None]  # mu^{A_i}_T(g), None for empty A_i
    full_integral: float | None
    counts: list[int]

    @property
    def dominant(self) -> int:
        return int(np.argmax(self.shares)) + 1

    @property
    def recombined(self) -> float | None:
        parts = [s * c for s, c in zip(self.shares, self.component_integrals) if c is not None]
        return math.fsum(parts) if self.full_integral is not None else None


def alternate_livshits_demo(ensemble: PeriodicEnsemble, cocycles: Sequence[Sequence[float]], weights: Sequence[float],
                            g: FiberWeight | None = None, tol: float = 1e-9) -> DecompositionReport:
    """Split the ensemble by which cocycle vanishes and report the convex decomposition.

    Each orbit goes to the smallest index i with ``|a_i| <= tol``; the
    measure uses the potential ``sum_i weights_i a_i``.
    """
    a = np.array([np.asarray(c, dtype=float) for c in cocycles])
    n_orb = ensemble.orbit_count
    if a.ndim != 2 or a.shape[1] != n_orb or len(weights) != a.shape[0]:
        raise ValidationError("need one value per orbit for each cocycle and one weight per cocycle")
    vanish = np.abs(a) <= tol
    if n_orb and not vanish.any(axis=0).all():
        bad = int(np.argmin(vanish.any(axis=0)))
        raise HypothesisViolated(f"no cocycle vanishes on ensemble orbit {bad}")
    owner = np.argmax(vanish, axis=0)
    B = np.asarray(weights, dtype=float) @ a
    B = B - (B.max() if B.size else 0.0)
    w = np.exp(B)
    per = ensemble.periods()
    total = math.fsum(w * per)
    vals = ensemble_integrals(ensemble, g) if g is not None else None
    shares, comps, counts = [], [], []
    for i in range(a.shape[0]):
        m = owner == i
        mass = math.fsum(w[m] * per[m])
        shares.append(mass / total)
        counts.append(int(m.sum()))
        comps.append(math.fsum(w[m] * vals[m]) / mass if vals is not None and mass > 0 else None)
    full = math.fsum(w * vals) / total if vals is not None else None
    return DecompositionReport(shares, comps, full, counts)
