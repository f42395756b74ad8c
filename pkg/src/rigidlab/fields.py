"""Trigonometric polynomials on the 2-torus and fiber weights on the suspension.

A ``ScalarField`` is ``sum a_k cos(2 pi k.x) + b_k sin(2 pi k.x)`` over a finite
set of integer frequencies.  A ``FiberWeight`` is ``sum_d g_d(x) s**d`` with each
``g_d`` a ScalarField and ``s`` the fiber coordinate.

Text form, one term per line::

    cos kx ky amp
    sin kx ky amp
    spow d          # (FiberWeight only) following terms multiply s**d
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi
Freq = tuple[int, int]


def _canonical(k: Freq) -> tuple[Freq, int]:
    """Representative of {k, -k} and the sign flip applied to the sine part."""
    kx, ky = k
    if kx > 0 or (kx == 0 and ky >= 0):
        return (kx, ky), 1
    return (-kx, -ky), -1


@dataclass(frozen=True)
class ScalarField:
    terms: tuple[tuple[Freq, float, float], ...] = ()

    # -- construction -----------------------------------------------------
    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Freq, float, float]]) -> "ScalarField":
        acc: dict[Freq, list[float]] = {}
        for k, a, b in terms:
            key, sgn = _canonical((int(k[0]), int(k[1])))
            slot = acc.setdefault(key, [0.0, 0.0])
            slot[0] += float(a)
            if key != (0, 0):
                slot[1] += sgn * float(b)
        out = tuple((k, a, b) for k, (a, b) in sorted(acc.items()) if a != 0.0 or b != 0.0)
        return cls(out)

    @classmethod
    def constant(cls, c: float) -> "ScalarField":
        return cls.from_terms([((0, 0), c, 0.0)])

    @classmethod
    def cos(cls, kx: int, ky: int, amp: float = 1.0) -> "ScalarField":
        return cls.from_terms([((kx, ky), amp, 0.0)])

    @classmethod
    def sin(cls, kx: int, ky: int, amp: float = 1.0) -> "ScalarField":
        return cls.from_terms([((kx, ky), 0.0, amp)])

    # -- arrays -----------------------------------------------------------
    def _arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.terms:
            return np.zeros((0, 2)), np.zeros(0), np.zeros(0)
        k = np.array([t[0] for t in self.terms], dtype=float)
        a = np.array([t[1] for t in self.terms])
        b = np.array([t[2] for t in self.terms])
        return k, a, b

    # -- evaluation -------------------------------------------------------
    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k, a, b = self._arrays()
        th = TWO_PI * (x @ k.T)
        return np.cos(th) @ a + np.sin(th) @ b

    def increment(self, p, dz) -> np.ndarray:
        """``f(p + dz) - f(p)`` without cancellation for small ``dz``."""
        p = np.asarray(p, dtype=float)
        dz = np.asarray(dz, dtype=float)
        k, a, b = self._arrays()
        th = TWO_PI * (p @ k.T)
        half = math.pi * (dz @ k.T)
        mid = th + half
        sh = np.sin(half)
        return (-2.0 * np.sin(mid) * sh) @ a + (2.0 * np.cos(mid) * sh) @ b

    def deviation(self, x) -> np.ndarray:
        """``f(x) - f(0)``, accurate near the origin."""
        x = np.asarray(x, dtype=float)
        return self.increment(np.zeros_like(x), x)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k, a, b = self._arrays()
        th = TWO_PI * (x @ k.T)
        w = -np.sin(th) * a + np.cos(th) * b
        return TWO_PI * (w @ k)

    def hessian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k, a, b = self._arrays()
        th = TWO_PI * (x @ k.T)
        w = -(np.cos(th) * a + np.sin(th) * b)
        kk = k[:, :, None] * k[:, None, :]
        return TWO_PI**2 * np.tensordot(w, kk, axes=([-1], [0]))

    # -- algebra ----------------------------------------------------------
    @property
    def constant_term(self) -> float:
        for k, a, _ in self.terms:
            if k == (0, 0):
                return a
        return 0.0

    @property
    def is_constant(self) -> bool:
        return all(k == (0, 0) for k, _, _ in self.terms)

    @property
    def max_frequency(self) -> float:
        return max((math.hypot(*k) for k, _, _ in self.terms), default=0.0)

    def amplitude_sum(self) -> float:
        """Sum of the amplitudes of the nonconstant harmonics."""
        return sum(math.hypot(a, b) for k, a, b in self.terms if k != (0, 0))

    def lipschitz(self) -> float:
        return sum(TWO_PI * math.hypot(*k) * math.hypot(a, b) for k, a, b in self.terms)

    def lower_bound(self, grid: int = 256) -> float:
        """Certified lower bound: the better of the amplitude and grid+Lipschitz bounds."""
        amp = self.constant_term - self.amplitude_sum()
        if self.is_constant:
            return amp
        g = (np.arange(grid) + 0.5) / grid
        X, Y = np.meshgrid(g, g, indexing="ij")
        vals = self(np.stack([X, Y], axis=-1))
        # every point is within sqrt(2)/(2 grid) of a cell centre
        lip = float(vals.min()) - self.lipschitz() * math.sqrt(2.0) / (2.0 * grid)
        return max(amp, lip)

    def compose(self, matrix) -> "ScalarField":
        """``f o A`` for an integer matrix A: frequency k becomes A^T k."""
        (p, q), (r, s) = ((int(matrix[0][0]), int(matrix[0][1])), (int(matrix[1][0]), int(matrix[1][1])))
        return ScalarField.from_terms(((p * kx + r * ky, q * kx + s * ky), a, b) for (kx, ky), a, b in self.terms)

    def coboundary(self, matrix) -> "ScalarField":
        """``u o A - u``."""
        return self.compose(matrix) - self

    def __add__(self, other) -> "ScalarField":
        if isinstance(other, (int, float)):
            other = ScalarField.constant(other)
        return ScalarField.from_terms(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> "ScalarField":
        return ScalarField(tuple((k, -a, -b) for k, a, b in self.terms))

    def __sub__(self, other) -> "ScalarField":
        if isinstance(other, (int, float)):
            other = ScalarField.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "ScalarField":
        return (-self) + other

    def __mul__(self, other) -> "ScalarField":
        if isinstance(other, (int, float)):
            c = float(other)
            return ScalarField.from_terms((k, c * a, c * b) for k, a, b in self.terms)
        out = []
        for k1, a1, b1 in self.terms:
            for k2, a2, b2 in other.terms:
                plus = (k1[0] + k2[0], k1[1] + k2[1])
                minus = (k1[0] - k2[0], k1[1] - k2[1])
                # product-to-sum identities
                out.append((minus, 0.5 * (a1 * a2 + b1 * b2), 0.5 * (b1 * a2 - a1 * b2)))
                out.append((plus, 0.5 * (a1 * a2 - b1 * b2), 0.5 * (b1 * a2 + a1 * b2)))
        return ScalarField.from_terms(out)

    __rmul__ = __mul__

    # -- text form --------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for (kx, ky), a, b in self.terms:
            if a != 0.0:
                lines.append(f"cos {kx} {ky} {a!r}")
            if b != 0.0:
                lines.append(f"sin {kx} {ky} {b!r}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, first_line: int = 1) -> "ScalarField":
        w = FiberWeight.from_text(text, first_line)
        if any(d != 0 for d, _ in w.components):
            raise ConfigError("fiber powers are not allowed in a scalar field", first_line)
        return w.base


def _parse_term(parts: list[str], line: int) -> tuple[Freq, float, float]:
    if len(parts) != 4:
        raise ConfigError(f"expected '{parts[0]} kx ky amp'", line)
    try:
        kx, ky = int(parts[1]), int(parts[2])
        amp = float(parts[3])
    except ValueError as exc:
        raise ConfigError(f"bad term: {exc}", line) from None
    if not math.isfinite(amp):
        raise ConfigError("amplitude must be finite", line)
    return ((kx, ky), amp, 0.0) if parts[0] == "cos" else ((kx, ky), 0.0, amp)


@dataclass(frozen=True)
class FiberWeight:
    """``phi(x, s) = sum_d g_d(x) s**d``; components sorted by degree."""

    components: tuple[tuple[int, ScalarField], ...]

    @classmethod
    def from_components(cls, comps: Mapping[int, ScalarField] | Iterable[tuple[int, ScalarField]]) -> "FiberWeight":
        items = comps.items() if isinstance(comps, Mapping) else comps
        acc: dict[int, ScalarField] = {}
        for d, g in items:
            if d < 0:
                raise ValueError("fiber degree must be >= 0")
            acc[d] = acc[d] + g if d in acc else g
        return cls(tuple((d, acc[d]) for d in sorted(acc) if acc[d].terms))

    @classmethod
    def constant(cls, c: float) -> "FiberWeight":
        return cls.from_components({0: ScalarField.constant(c)})

    @classmethod
    def from_field(cls, g: ScalarField) -> "FiberWeight":
        return cls.from_components({0: g})

    @classmethod
    def fiber_power(cls, d: int, c: float = 1.0) -> "FiberWeight":
        return cls.from_components({d: ScalarField.constant(c)})

    @property
    def degree(self) -> int:
        return max((d for d, _ in self.components), default=0)

    @property
    def is_fiber_constant(self) -> bool:
        return all(d == 0 for d, _ in self.components)

    @property
    def base(self) -> ScalarField:
        """The degree-0 component."""
        for d, g in self.components:
            if d == 0:
                return g
        return ScalarField()

    def __call__(self, x, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.zeros(np.broadcast_shapes(np.shape(x)[:-1], s.shape))
        for d, g in self.components:
            out = out + g(x) * s**d
        return out

    def fiber_integral(self, x, r) -> np.ndarray:
        """Closed form of ``int_0^r phi(x, s) ds``."""
        r = np.asarray(r, dtype=float)
        out = np.zeros(np.broadcast_shapes(np.shape(x)[:-1], r.shape))
        for d, g in self.components:
            out = out + g(x) * r ** (d + 1) / (d + 1)
        return out

    def __add__(self, other: "FiberWeight") -> "FiberWeight":
        return FiberWeight.from_components(list(self.components) + list(other.components))

    def __mul__(self, c: float) -> "FiberWeight":
        return FiberWeight.from_components([(d, g * float(c)) for d, g in self.components])

    __rmul__ = __mul__

    def __neg__(self) -> "FiberWeight":
        return self * -1.0

    def __sub__(self, other: "FiberWeight") -> "FiberWeight":
        return self + (-other)

    def to_text(self) -> str:
        out = []
        for d, g in self.components:
            if d != 0 or len(self.components) > 1:
                out.append(f"spow {d}\n")
            out.append(g.to_text())
        return "".join(out)

    @classmethod
    def from_text(cls, text: str, first_line: int = 1) -> "FiberWeight":
        comps: dict[int, list] = {}
        degree = 0
        for offset, raw in enumerate(text.splitlines()):
            line = first_line + offset
            body = raw.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            kind = parts[0].lower()
            parts[0] = kind
            if kind == "spow":
                if len(parts) != 2:
                    raise ConfigError("expected 'spow d'", line)
                try:
                    degree = int(parts[1])
                except ValueError:
                    raise ConfigError(f"bad fiber power {parts[1]!r}", line) from None
                if degree < 0:
                    raise ConfigError("fiber power must be >= 0", line)
                comps.setdefault(degree, [])
            elif kind in ("cos", "sin"):
                comps.setdefault(degree, []).append(_parse_term(parts, line))
            else:
                raise ConfigError(f"unknown term kind {parts[0]!r}", line)
        return cls.from_components({d: ScalarField.from_terms(t) for d, t in comps.items()})
