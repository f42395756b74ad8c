"""Truncated planar jets and the weak Moser normal form at a saddle.

A jet of degree d is stored as an array ``c`` of shape ``(2, d+1, d+1)``:
component ``m`` is ``sum c[m, i, j] x**i y**j`` over ``i + j <= d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResonanceAtTruncation, ValidationError

SMALL_DIVISOR = 1e-10


def _mask(d: int) -> np.ndarray:
    i, j = np.indices((d + 1, d + 1))
    return (i + j) <= d


def series_mul(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    """Product of two bivariate series truncated at total degree d."""
    out = np.zeros((d + 1, d + 1))
    for i, j in zip(*np.nonzero(a)):
        if i + j > d:
            continue
        out[i:, j:] += a[i, j] * b[: d + 1 - i, : d + 1 - j]
    return out * _mask(d)


def compose(f: np.ndarray, g: np.ndarray, d: int) -> np.ndarray:
    """``f o g`` for planar series; ``g`` must have no constant term."""
    xp = [np.zeros((d + 1, d + 1))]
    xp[0][0, 0] = 1.0
    yp = [xp[0].copy()]
    for _ in range(d):
        xp.append(series_mul(xp[-1], g[0], d))
        yp.append(series_mul(yp[-1], g[1], d))
    out = np.zeros((2, d + 1, d + 1))
    for m in range(2):
        for i, j in zip(*np.nonzero(f[m])):
            if i + j <= d:
                out[m] += f[m, i, j] * series_mul(xp[i], yp[j], d)
    return out


def identity(d: int) -> np.ndarray:
    c = np.zeros((2, d + 1, d + 1))
    c[0, 1, 0] = 1.0
    c[1, 0, 1] = 1.0
    return c


def linear(M, d: int) -> np.ndarray:
    c = np.zeros((2, d + 1, d + 1))
    c[0, 1, 0], c[0, 0, 1] = M[0][0], M[0][1]
    c[1, 1, 0], c[1, 0, 1] = M[1][0], M[1][1]
    return c


def inverse(g: np.ndarray, d: int) -> np.ndarray:
    """Compositional inverse of a jet with invertible linear part."""
    L = np.array([[g[0, 1, 0], g[0, 0, 1]], [g[1, 1, 0], g[1, 0, 1]]])
    Linv = linear(np.linalg.inv(L), d)
    nonlin = g - linear(L, d)
    # h = L^{-1} o (id - nonlin o h); each pass fixes one more degree
    h = Linv.copy()
    for _ in range(d):
        h = compose(Linv, identity(d) - compose(nonlin, h, d), d)
    return h


@dataclass(frozen=True)
class PlanarJet:
    coeffs: np.ndarray

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def linear_part(self) -> np.ndarray:
        c = self.coeffs
        return np.array([[c[0, 1, 0], c[0, 0, 1]], [c[1, 1, 0], c[1, 0, 1]]])

    @property
    def mu(self) -> float:
        ev = np.linalg.eigvals(self.linear_part)
        return float(np.min(np.abs(ev)))

    def coefficient(self, m: int, i: int, j: int) -> float:
        return float(self.coeffs[m, i, j]) if i + j <= self.degree else 0.0

    def triples(self, m: int) -> list[tuple[int, int, float]]:
        d = self.degree
        return [(i, j, float(self.coeffs[m, i, j])) for i in range(d + 1) for j in range(d + 1 - i)
                if self.coeffs[m, i, j] != 0.0]

    def to_text(self) -> str:
        return "\n".join(" ".join(f"({i},{j},{c!r})" for i, j, c in self.triples(m)) for m in range(2)) + "\n"

    def __call__(self, x, y):
        d = self.degree
        out = []
        for m in range(2):
            out.append(sum(self.coeffs[m, i, j] * x**i * y**j for i in range(d + 1) for j in range(d + 1 - i)))
        return tuple(out)


def make_jet(components, degree: int = 3, check: bool = True) -> PlanarJet:
    """Build a jet from ``[{(i, j): c, ...}, {...}]`` or a coefficient array."""
    if isinstance(components, np.ndarray):
        c = np.array(components, dtype=float)
        degree = c.shape[1] - 1
    else:
        c = np.zeros((2, degree + 1, degree + 1))
        for m, comp in enumerate(components):
            for (i, j), v in comp.items():
                if i + j > degree:
                    continue
                c[m, i, j] = v
    c = c * _mask(degree)
    jet = PlanarJet(c)
    if check:
        validate_jet(jet)
    return jet


def validate_jet(jet: PlanarJet) -> None:
    c = jet.coeffs
    if jet.degree < 3:
        raise ValidationError("jet degree must be >= 3")
    if c[0, 0, 0] != 0.0 or c[1, 0, 0] != 0.0:
        raise ValidationError("jet must fix the origin")
    L = jet.linear_part
    if abs(np.linalg.det(L) - 1.0) > 1e-12:
        raise ValidationError(f"linear part has determinant {np.linalg.det(L)!r}, expected 1")
    tr = np.trace(L)
    if not tr > 2.0:
        raise ValidationError("linear part must be a saddle with positive eigenvalues")


@dataclass(frozen=True)
class NormalFormResult:
    jet: PlanarJet  # normalized map N
    change: PlanarJet  # coordinate change Psi with F o Psi = Psi o N
    steps: tuple[PlanarJet, ...]  # changes used by each of the four steps


def _homological(G: np.ndarray, mu: float, monomials, d: int) -> np.ndarray:
    """Near-identity change ``id + p`` removing the listed coefficients at linear order."""
    p = np.zeros_like(G)
    lam = (mu, 1.0 / mu)
    for m, i, j in monomials:
        q = G[m, i, j]
        if q == 0.0:
            continue
        div = lam[m] - mu ** (i - j)
        if abs(div) < SMALL_DIVISOR:
            raise ResonanceAtTruncation(f"small divisor {div:.3g} at component {m + 1}, monomial x^{i} y^{j}")
        p[m, i, j] = -q / div
    return identity(d) + p


def _conjugate(F: np.ndarray, psi: np.ndarray, d: int) -> np.ndarray:
    return compose(inverse(psi, d), compose(F, psi, d), d)


def _diagonalizer(L: np.ndarray, mu: float) -> np.ndarray:
    if L[0, 1] == 0.0 and L[1, 0] == 0.0 and L[0, 0] < 1.0:
        return np.eye(2)
    w, V = np.linalg.eig(L)
    order = np.argsort(np.abs(w))
    V = np.real(V[:, order])
    v1 = V[:, 0] * np.sign(V[0, 0] or 1.0)
    v2 = V[:, 1] * np.sign(V[1, 1] or 1.0)
    det = v1[0] * v2[1] - v1[1] * v2[0]
    return np.column_stack([v1, v2 / det])


def moser_normal_form(jet: PlanarJet) -> NormalFormResult:
    """Weak Moser normal form of a saddle jet, computed in four steps.

    1. linear diagonalization (area preserving);
    2. removal of every quadratic monomial;
    3. straightening of the invariant manifolds (axes invariant to order d);
    4. linearization of the map restricted to each axis.

    The result keeps, above degree 2, only monomials divisible by ``x y``.
    """
    validate_jet(jet)
    d = jet.degree
    mu = jet.mu
    F = jet.coeffs
    steps = []

    P = _diagonalizer(jet.linear_part, mu)
    psi = linear(P, d)
    G = _conjugate(F, psi, d)
    steps.append(psi)

    def run(monomials_by_degree) -> np.ndarray:
        nonlocal G
        total = identity(d)
        for deg in range(2, d + 1):
            mons = monomials_by_degree(deg)
            if not mons:
                continue
            step = _homological(G, mu, mons, d)
            G = _conjugate(G, step, d)
            total = compose(total, step, d)
        return total

    steps.append(run(lambda n: [(m, i, n - i) for m in range(2) for i in range(n + 1)] if n == 2 else []))
    steps.append(run(lambda n: [(1, n, 0), (0, 0, n)] if n >= 3 else []))
    steps.append(run(lambda n: [(0, n, 0), (1, 0, n)] if n >= 3 else []))

    change = steps[0]
    for s in steps[1:]:
        change = compose(change, s, d)
    return NormalFormResult(PlanarJet(G), PlanarJet(change), tuple(PlanarJet(s) for s in steps))


def conjugation_defect(jet: PlanarJet, result: NormalFormResult) -> float:
    """Largest coefficient of ``F o Psi - Psi o N`` (truncated)."""
    d = jet.degree
    lhs = compose(jet.coeffs, result.change.coeffs, d)
    rhs = compose(result.change.coeffs, result.jet.coeffs, d)
    return float(np.max(np.abs(lhs - rhs)))


def normal_form_defects(result: NormalFormResult) -> dict[str, float]:
    """Sizes of the coefficients the normal form must kill."""
    c = result.jet.coeffs
    d = result.jet.degree
    mu = result.jet.mu
    quad = max(abs(c[m, i, 2 - i]) for m in range(2) for i in range(3))
    axes = max(max(abs(c[1, n, 0]), abs(c[0, 0, n])) for n in range(2, d + 1))
    axis_lin = max(max(abs(c[0, n, 0]), abs(c[1, 0, n])) for n in range(2, d + 1))
    lin = max(abs(c[0, 1, 0] - mu), abs(c[1, 0, 1] - 1.0 / mu), abs(c[0, 0, 1]), abs(c[1, 1, 0]))
    return {"quadratic": quad, "axis_invariance": axes, "axis_linearity": axis_lin, "linear": lin}


def shear_jet(mu: float, rng: np.random.Generator, degree: int = 3, scale: float = 1.0) -> PlanarJet:
    """Random area-preserving saddle jet: a conjugated diagonal map after two polynomial shears."""
    d = degree
    t = rng.uniform(-1.0, 1.0)
    s = rng.uniform(-1.0, 1.0)
    M = np.array([[1.0, t], [0.0, 1.0]]) @ np.array([[1.0, 0.0], [s, 1.0]])
    L = M @ np.diag([mu, 1.0 / mu]) @ np.linalg.inv(M)
    sh1 = identity(d)
    sh2 = identity(d)
    for n in range(2, d + 1):
        sh1[0, 0, n] = scale * rng.normal()  # (x + f(y), y)
        sh2[1, n, 0] = scale * rng.normal()  # (x, y + g(x))
    F = compose(linear(L, d), compose(sh1, sh2, d), d)
    return make_jet(F)
