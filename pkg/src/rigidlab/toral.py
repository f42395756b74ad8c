"""Linear hyperbolic automorphisms of the 2-torus.

Periodic points are handled exactly: every fixed point of ``A**k`` lies in
``(A**k - I)^{-1} Z^2``, so it is stored as an integer numerator pair over the
common denominator ``D = |det(A**k - I)|``.  Floating point appears only in the
eigendata and in quantities derived from it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import NotHyperbolic, NotUnimodular, Overflow, PrecisionLoss, ValidationError

Matrix = tuple[tuple[int, int], tuple[int, int]]

DEFAULT_CHUNK = 1 << 20
# Numerators and denominators must satisfy D**2 < 2**62 so that every int64
# product (matrix entry mod D) * (numerator) is exact.
_MAX_DENOMINATOR = 1 << 31
# q_n is exact, but beyond this growth n*lambda**-n is far below the float64
# noise of any roof evaluation and the point carries no usable signal.
SAFE_GROWTH = 2.0**67


def _as_int(value) -> int:
    if isinstance(value, (bool, np.bool_)):
        raise ValidationError("matrix entries must be integers")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)) and float(value).is_integer():
        return int(value)
    raise ValidationError(f"matrix entry {value!r} is not an integer")


def matmul(a: Matrix, b: Matrix) -> Matrix:
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


def matpow(a: Matrix, k: int) -> Matrix:
    """Exact integer power; negative k only for unimodular matrices."""
    if k < 0:
        det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
        a = ((a[1][1] * det, -a[0][1] * det), (-a[1][0] * det, a[0][0] * det))
        k = -k
    result: Matrix = ((1, 0), (0, 1))
    base = a
    while k:
        if k & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        k >>= 1
    return result


def _det(a: Matrix) -> int:
    return a[0][0] * a[1][1] - a[0][1] * a[1][0]


@dataclass(frozen=True, eq=False)
class ToralAutomorphism:
    """Integer unimodular hyperbolic matrix with its eigendata.

    ``eig_u``/``eig_s`` are the signed eigenvalues (``|eig_u| > 1``); ``e_u`` and
    ``e_s`` are unit eigenvectors with positive first coordinate.
    """

    matrix: Matrix
    eig_u: float
    eig_s: float
    e_u: tuple[float, float]
    e_s: tuple[float, float]

    @property
    def lam(self) -> float:
        return abs(self.eig_u)

    @property
    def lam_inv(self) -> float:
        return abs(self.eig_s)

    @property
    def det(self) -> int:
        return _det(self.matrix)

    @property
    def trace(self) -> int:
        return self.matrix[0][0] + self.matrix[1][1]

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    @property
    def eigenbasis(self) -> np.ndarray:
        """Columns ``e_u``, ``e_s``."""
        return np.array([self.e_u, self.e_s], dtype=float).T

    def power(self, k: int) -> Matrix:
        return matpow(self.matrix, k)

    def to_eigen(self, x) -> np.ndarray:
        """Coordinates ``(u, s)`` with ``x = u e_u + s e_s`` (last axis)."""
        x = np.asarray(x, dtype=float)
        return np.linalg.solve(self.eigenbasis, x[..., None])[..., 0]

    def from_eigen(self, us) -> np.ndarray:
        us = np.asarray(us, dtype=float)
        return us @ self.eigenbasis.T

    def same_matrix(self, other: "ToralAutomorphism") -> bool:
        return self.matrix == other.matrix

    def __repr__(self) -> str:
        return f"ToralAutomorphism({self.matrix}, lam={self.lam:.12g})"


def _eigenvector(m: Matrix, sigma: float) -> np.ndarray:
    (a, b), (c, d) = m
    v1 = np.array([b, sigma - a], dtype=float)
    v2 = np.array([sigma - d, c], dtype=float)
    v = v1 if np.hypot(*v1) >= np.hypot(*v2) else v2
    v = v / np.hypot(*v)
    if v[0] < 0:
        v = -v
    return v


def make_automorphism(matrix: Sequence[Sequence[int]]) -> ToralAutomorphism:
    rows = [list(r) for r in matrix]
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValidationError("matrix must be 2x2")
    m: Matrix = (
        (_as_int(rows[0][0]), _as_int(rows[0][1])),
        (_as_int(rows[1][0]), _as_int(rows[1][1])),
    )
    det = _det(m)
    tr = m[0][0] + m[1][1]
    if abs(det) != 1:
        raise NotUnimodular(f"|det| = {abs(det)} != 1")
    if abs(tr) <= 2:
        raise NotHyperbolic(f"|trace| = {abs(tr)} <= 2")
    disc = tr * tr - 4 * det
    root = math.sqrt(disc)
    eig_u = (tr + math.copysign(root, tr)) / 2.0
    eig_s = det / eig_u
    e_u = _eigenvector(m, eig_u)
    e_s = _eigenvector(m, eig_s)
    return ToralAutomorphism(m, eig_u, eig_s, (float(e_u[0]), float(e_u[1])), (float(e_s[0]), float(e_s[1])))


# ---------------------------------------------------------------------------
# periodic points


def fixed_point_count(A: ToralAutomorphism, k: int) -> int:
    """|det(A**k - I)|, the Lefschetz number of A**k."""
    p = A.power(k)
    return abs((p[0][0] - 1) * (p[1][1] - 1) - p[0][1] * p[1][0])


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def prime_orbit_count(A: ToralAutomorphism, k: int) -> int:
    """Number of prime-period-k orbits by Mobius inversion of the trace data."""
    total = sum(_mobius(k // d) * fixed_point_count(A, d) for d in range(1, k + 1) if k % d == 0)
    assert total % k == 0
    return total // k


@dataclass(frozen=True)
class FixedPointLattice:
    """The group ``(A**k - I)^{-1} Z^2 / Z^2`` with an explicit coset basis.

    Flat index ``t`` in ``[0, D)`` maps to the coset ``(t // h22, t % h22)`` of
    ``Z^2 / B Z^2`` (Hermite form of ``B = A**k - I``) and then to the point
    ``B^{-1} n``, stored as numerators over ``D``.
    """

    k: int
    denominator: int
    h11: int
    h22: int
    inverse_num: tuple[tuple[int, int], tuple[int, int]]  # D * B^{-1}, reduced mod D

    def numerators(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        D = self.denominator
        stop = D if stop is None else min(stop, D)
        t = np.arange(start, stop, dtype=np.int64)
        a = t // self.h22
        b = t % self.h22
        (p, q), (r, s) = self.inverse_num
        out = np.empty((t.size, 2), dtype=np.int64)
        out[:, 0] = (p * a + q * b) % D
        out[:, 1] = (r * a + s * b) % D
        return out


def fixed_point_lattice(A: ToralAutomorphism, k: int) -> FixedPointLattice:
    if k < 1:
        raise ValidationError("period must be >= 1")
    P = A.power(k)
    B = ((P[0][0] - 1, P[0][1]), (P[1][0], P[1][1] - 1))
    det = _det(B)
    D = abs(det)
    if D == 0:
        raise NotHyperbolic("A**k - I is singular")
    if D >= _MAX_DENOMINATOR:
        raise Overflow(f"|det(A^{k} - I)| = {D} exceeds the exact int64 range")
    # Hermite form B U = [[g, 0], [*, det/g]] with g = gcd of the first row; the
    # cosets of Z^2 / B Z^2 are then (a, b) with 0 <= a < |g|, 0 <= b < D/|g|.
    h11 = math.gcd(B[0][0], B[0][1])
    h22 = D // h11
    sign = 1 if det > 0 else -1
    adj = ((B[1][1], -B[0][1]), (-B[1][0], B[0][0]))
    inv_num = tuple(tuple((sign * adj[i][j]) % D for j in range(2)) for i in range(2))
    return FixedPointLattice(k, D, h11, h22, inv_num)  # type: ignore[arg-type]


def _apply_mod(M: Matrix, v: np.ndarray, D: int) -> np.ndarray:
    """``M v mod D`` for numerators v; M entries reduced mod D first."""
    (a, b), (c, d) = ((M[0][0] % D, M[0][1] % D), (M[1][0] % D, M[1][1] % D))
    out = np.empty_like(v)
    out[..., 0] = (a * v[..., 0] + b * v[..., 1]) % D
    out[..., 1] = (c * v[..., 0] + d * v[..., 1]) % D
    return out


def _fixed_mask(M: Matrix, v: np.ndarray, D: int) -> np.ndarray:
    w = _apply_mod(M, v, D)
    return (w[:, 0] == v[:, 0]) & (w[:, 1] == v[:, 1])


def iter_fixed_points(A: ToralAutomorphism, k: int, chunk: int = DEFAULT_CHUNK) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(D, numerators)`` chunks covering Fix(A**k) exactly once."""
    lat = fixed_point_lattice(A, k)
    for start in range(0, lat.denominator, chunk):
        yield lat.denominator, lat.numerators(start, start + chunk)


def _prime_reps_in(A: ToralAutomorphism, k: int, D: int, v: np.ndarray) -> np.ndarray:
    keep = np.ones(v.shape[0], dtype=bool)
    for p in _prime_factors(k):
        keep &= ~_fixed_mask(A.power(k // p), v, D)
    v = v[keep]
    key = v[:, 0] * D + v[:, 1]
    best = key.copy()
    w = v
    for _ in range(k - 1):
        w = _apply_mod(A.matrix, w, D)
        np.minimum(best, w[:, 0] * D + w[:, 1], out=best)
    return v[best == key]


def iter_prime_representatives(
    A: ToralAutomorphism, k: int, chunk: int = DEFAULT_CHUNK, threads: int = 1
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(D, reps)`` chunks: one lexicographically minimal point per prime orbit.

    Chunks are lattice stripes in flat-index order; with ``threads > 1`` stripes
    are processed concurrently but still yielded in stripe order.
    """
    lat = fixed_point_lattice(A, k)
    D = lat.denominator
    starts = list(range(0, D, chunk))

    def work(start: int) -> np.ndarray:
        return _prime_reps_in(A, k, D, lat.numerators(start, start + chunk))

    if threads <= 1 or len(starts) == 1:
        for s in starts:
            yield D, work(s)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for reps in pool.map(work, starts):
            yield D, reps


def orbit_points(A: ToralAutomorphism, reps: np.ndarray, k: int, D: int) -> np.ndarray:
    """Numerators of the full orbits, shape ``(M, k, 2)``, starting at each rep."""
    out = np.empty((reps.shape[0], k, 2), dtype=np.int64)
    w = reps
    for i in range(k):
        out[:, i] = w
        if i + 1 < k:
            w = _apply_mod(A.matrix, w, D)
    return out


@dataclass(frozen=True)
class MapOrbit:
    """A prime periodic orbit of the base map, held exactly.

    ``numerators[i] / denominator`` is ``A**i`` applied to the representative.
    """

    prime_period: int
    denominator: int
    numerators: tuple[tuple[int, int], ...]
    multiplier: float

    @property
    def points(self) -> tuple[tuple[Fraction, Fraction], ...]:
        D = self.denominator
        return tuple((Fraction(a, D), Fraction(b, D)) for a, b in self.numerators)

    @property
    def representative(self) -> tuple[Fraction, Fraction]:
        return self.points[0]

    def float_points(self) -> np.ndarray:
        return np.array(self.numerators, dtype=np.int64) / self.denominator

    @property
    def label(self) -> str:
        x, y = self.representative
        return f"{self.prime_period}:{x}:{y}"


class OrbitBlock:
    """All prime orbits of one period, in lexicographic order of representatives."""

    def __init__(self, A: ToralAutomorphism, k: int, denominator: int, reps: np.ndarray):
        self.automorphism = A
        self.k = k
        self.denominator = denominator
        order = np.lexsort((reps[:, 1], reps[:, 0])) if reps.size else np.arange(0)
        self.reps = reps[order]

    def __len__(self) -> int:
        return self.reps.shape[0]

    def points(self) -> np.ndarray:
        return orbit_points(self.automorphism, self.reps, self.k, self.denominator)

    def float_points(self) -> np.ndarray:
        return self.points() / self.denominator

    def __getitem__(self, i: int) -> MapOrbit:
        pts = orbit_points(self.automorphism, self.reps[[i]], self.k, self.denominator)[0]
        return MapOrbit(
            self.k,
            self.denominator,
            tuple((int(a), int(b)) for a, b in pts),
            self.automorphism.lam**self.k,
        )

    def __iter__(self) -> Iterator[MapOrbit]:
        pts = self.points()
        mult = self.automorphism.lam**self.k
        for row in pts:
            yield MapOrbit(self.k, self.denominator, tuple((int(a), int(b)) for a, b in row), mult)


def prime_orbit_block(A: ToralAutomorphism, k: int, chunk: int = DEFAULT_CHUNK, threads: int = 1) -> OrbitBlock:
    D = fixed_point_count(A, k)
    parts = [reps for _, reps in iter_prime_representatives(A, k, chunk=chunk, threads=threads)]
    reps = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return OrbitBlock(A, k, D, reps)


class OrbitCatalog(dict):
    """Mapping ``k -> OrbitBlock`` for ``k = 1..k_max``."""

    def orbits(self) -> Iterator[MapOrbit]:
        for k in sorted(self):
            yield from self[k]

    def orbit_count(self) -> int:
        return sum(len(b) for b in self.values())


def enumerate_periodic_orbits(A: ToralAutomorphism, k_max: int, threads: int = 1) -> OrbitCatalog:
    if not 1 <= k_max <= 24:
        raise ValidationError("k_max must lie in [1, 24]")
    cat = OrbitCatalog()
    for k in range(1, k_max + 1):
        cat[k] = prime_orbit_block(A, k, threads=threads)
    return cat


def orbit_of_point(A: ToralAutomorphism, point: Sequence) -> MapOrbit:
    """Exact orbit of a rational point (must be periodic)."""
    x = (Fraction(point[0]) % 1, Fraction(point[1]) % 1)
    (a, b), (c, d) = A.matrix
    pts = [x]
    cur = x
    while True:
        cur = ((a * cur[0] + b * cur[1]) % 1, (c * cur[0] + d * cur[1]) % 1)
        if cur == x:
            break
        pts.append(cur)
        if len(pts) > 10**6:
            raise ValidationError("point is not periodic")
    # same normal form as the catalog: start at the minimal point, denominator |det(A^k - I)|
    i0 = pts.index(min(pts))
    pts = pts[i0:] + pts[:i0]
    k = len(pts)
    D = fixed_point_count(A, k)
    nums = tuple((int(p[0] * D), int(p[1] * D)) for p in pts)
    return MapOrbit(k, D, nums, A.lam**k)


def fixed_point_orbit(A: ToralAutomorphism) -> MapOrbit:
    return orbit_of_point(A, (0, 0))


# ---------------------------------------------------------------------------
# homoclinic points and their shadowing periodic orbits


@dataclass(frozen=True)
class HomoclinicPoint:
    """Transverse homoclinic point of the origin.

    ``alpha e_u - beta e_s = m``: the point ``alpha e_u`` on the unstable line
    equals ``m + beta e_s`` on the stable line, so ``position`` lies on both.
    """

    lattice_shift: tuple[int, int]
    alpha: float
    beta: float
    position: tuple[float, float]
    automorphism: ToralAutomorphism

    def forward(self, i: int) -> np.ndarray:
        """Real-plane representative of ``A**i h`` near 0 along ``e_s`` (i >= 0)."""
        A = self.automorphism
        return self.beta * A.eig_s**i * np.asarray(A.e_s)

    def backward(self, j: int) -> np.ndarray:
        """Real-plane representative of ``A**-j h`` near 0 along ``e_u`` (j >= 0)."""
        A = self.automorphism
        return self.alpha * A.eig_u ** (-j) * np.asarray(A.e_u)


def homoclinic_point(A: ToralAutomorphism, m: Sequence[int]) -> HomoclinicPoint:
    m = (_as_int(m[0]), _as_int(m[1]))
    if m == (0, 0):
        raise ValidationError("lattice shift must be nonzero")
    M = np.array([A.e_u, [-A.e_s[0], -A.e_s[1]]], dtype=float).T
    alpha, beta = np.linalg.solve(M, np.array(m, dtype=float))
    pos = np.mod(alpha * np.asarray(A.e_u), 1.0)
    return HomoclinicPoint(m, float(alpha), float(beta), (float(pos[0]), float(pos[1])), A)


@dataclass(frozen=True)
class ShadowingPoint:
    """Periodic point ``q_n`` of period n shadowing the homoclinic loop.

    ``lift`` is the exact real-plane vector ``(A**n - I)^{-1} m``; it has
    eigencoordinates ``(unstable, stable)`` and ``A**n lift = lift + m``.
    """

    n: int
    lift: tuple[Fraction, Fraction]
    unstable: float
    stable: float
    homoclinic: HomoclinicPoint

    @property
    def position(self) -> tuple[Fraction, Fraction]:
        return (self.lift[0] % 1, self.lift[1] % 1)

    def orbit_lifts(self) -> list[tuple[Fraction, Fraction]]:
        """Exact ``A**i lift`` for i = 0..n (n + 1 section crossings)."""
        (a, b), (c, d) = self.homoclinic.automorphism.matrix
        out = [self.lift]
        x = self.lift
        for _ in range(self.n):
            x = (a * x[0] + b * x[1], c * x[0] + d * x[1])
            out.append(x)
        return out

    def eigen_orbit(self) -> np.ndarray:
        """Closed-form eigencoordinates of ``A**i lift``, i = 0..n, shape (n+1, 2)."""
        A = self.homoclinic.automorphism
        i = np.arange(self.n + 1, dtype=float)
        return np.stack([self.unstable * A.eig_u**i, self.stable * A.eig_s**i], axis=1)

    def periodicity_residual(self) -> float:
        """Distance from ``A**n q_n`` to ``q_n`` mod Z^2 (exact arithmetic)."""
        end = self.orbit_lifts()[-1]
        dx = [end[j] - self.lift[j] for j in range(2)]
        return float(max(abs(t - round(t)) for t in dx))


def shadowing_periodic_point(A: ToralAutomorphism, h: HomoclinicPoint, n: int) -> ShadowingPoint:
    if n < 2:
        raise ValidationError("n must be >= 2")
    if A.lam**n > SAFE_GROWTH:
        raise PrecisionLoss(f"lambda^n = {A.lam ** n:.3g} exceeds the safe growth range (n = {n})")
    P = A.power(n)
    B = ((P[0][0] - 1, P[0][1]), (P[1][0], P[1][1] - 1))
    det = _det(B)
    m0, m1 = h.lattice_shift
    lift = (
        Fraction(B[1][1] * m0 - B[0][1] * m1, det),
        Fraction(-B[1][0] * m0 + B[0][0] * m1, det),
    )
    unstable = h.alpha / (A.eig_u**n - 1.0)
    stable = -h.beta / (A.eig_s**n - 1.0)
    return ShadowingPoint(n, lift, unstable, stable, h)
