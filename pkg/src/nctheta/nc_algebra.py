"""Smooth noncommutative tori as finitely supported Fourier series.

An element ``f = sum_n f_n U_n`` is stored as a dict from integer tuples to
complex coefficients; the product follows ``U_n U_m = e^{pi i n.theta.m} U_{n+m}``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DimensionError, PreconditionError

PRUNE_TOL = 1e-15
ANTISYMMETRY_TOL = 1e-12

_EXACT_PHASES = {0.0: 1 + 0j, 0.5: 1j, 1.0: -1 + 0j, 1.5: -1j}


def unit_phase(q: float) -> complex:
    """``exp(pi i q)``, reducing ``q`` mod 2 first so quarter turns are exact."""
    r = math.fmod(q, 2.0)
    if r < 0:
        r += 2.0
    exact = _EXACT_PHASES.get(r)
    if exact is not None:
        return exact
    return cmath.exp(1j * math.pi * r)


@dataclass(frozen=True, eq=False)
class ThetaMatrix:
    """Real antisymmetric ``d x d`` deformation matrix."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.atleast_2d(np.array(self.theta, dtype=float))
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise DimensionError(f"theta must be square, got shape {t.shape}")
        if np.max(np.abs(t + t.T), initial=0.0) > ANTISYMMETRY_TOL:
            raise PreconditionError("theta is not antisymmetric")
        t.setflags(write=False)
        object.__setattr__(self, "theta", t)
        # upper triangle of the antisymmetric part; (x - (-x))/2 is exact
        upper = np.triu((t - t.T) / 2.0, k=1)
        upper.setflags(write=False)
        object.__setattr__(self, "_upper", upper)

    @property
    def d(self) -> int:
        return self.theta.shape[0]

    def form(self, n, m) -> float:
        """``n.theta.m`` evaluated as ``sum_{i<j} theta_ij (n_i m_j - n_j m_i)``.

        Written this way the form vanishes exactly on ``n == m``.
        """
        n = np.asarray(n, dtype=np.int64)
        m = np.asarray(m, dtype=np.int64)
        wedge = np.outer(n, m) - np.outer(m, n)
        return float(np.sum(self._upper * wedge))

    def is_integer(self) -> bool:
        return bool(np.array_equal(np.rint(self.theta), self.theta))

    @classmethod
    def standard(cls, g: int) -> "ThetaMatrix":
        """``theta^{a, a+g} = 1``: the matrix ``[[0, I], [-I, 0]]``."""
        eye = np.eye(g)
        zero = np.zeros((g, g))
        return cls(np.block([[zero, eye], [-eye, zero]]))


def as_theta(theta) -> ThetaMatrix:
    return theta if isinstance(theta, ThetaMatrix) else ThetaMatrix(theta)


@dataclass(frozen=True)
class NcElement:
    d: int
    coeffs: Mapping[tuple, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for n, c in self.coeffs.items():
            key = tuple(int(k) for k in n)
            if len(key) != self.d:
                raise DimensionError(f"index {n} does not have length {self.d}")
            clean[key] = clean.get(key, 0) + complex(c)
        kept = {n: c for n, c in sorted(clean.items()) if abs(c) >= PRUNE_TOL}
        object.__setattr__(self, "coeffs", kept)

    @classmethod
    def unit(cls, d: int) -> "NcElement":
        return cls(d, {(0,) * d: 1.0})

    @classmethod
    def monomial(cls, n, c: complex = 1.0) -> "NcElement":
        n = tuple(int(k) for k in n)
        return cls(len(n), {n: c})

    @classmethod
    def generator(cls, d: int, alpha: int) -> "NcElement":
        """``U_alpha`` for a 0-based direction ``alpha``."""
        n = [0] * d
        n[alpha] = 1
        return cls.monomial(n)

    def __add__(self, other: "NcElement") -> "NcElement":
        _same_d(self, other)
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            out[n] = out.get(n, 0) + c
        return NcElement(self.d, out)

    def __sub__(self, other: "NcElement") -> "NcElement":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "NcElement":
        return NcElement(self.d, {n: c * v for n, v in self.coeffs.items()})

    def __rmul__(self, c):
        return self.scale(c)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "terms": [{"n": list(n), "c": [c.real, c.imag]} for n, c in self.coeffs.items()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "NcElement":
        return cls(
            int(data["d"]),
            {tuple(t["n"]): complex(t["c"][0], t["c"][1]) for t in data["terms"]},
        )


def _same_d(f: NcElement, g: NcElement, theta: ThetaMatrix | None = None):
    if f.d != g.d or (theta is not None and theta.d != f.d):
        raise DimensionError("operands live on tori of different dimension")


def multiply(f: NcElement, g: NcElement, theta) -> NcElement:
    """Star product ``(f * g)_k = sum_{n+m=k} f_n g_m e^{pi i n.theta.m}``."""
    theta = as_theta(theta)
    _same_d(f, g, theta)
    out: dict[tuple, complex] = {}
    for n, a in f.coeffs.items():
        for m, b in g.coeffs.items():
            k = tuple(x + y for x, y in zip(n, m))
            out[k] = out.get(k, 0) + a * b * unit_phase(theta.form(n, m))
    return NcElement(f.d, out)


def involution(f: NcElement) -> NcElement:
    """``(f*)_n = conj(f_{-n})``."""
    return NcElement(f.d, {tuple(-k for k in n): c.conjugate() for n, c in f.coeffs.items()})


def derivation(alpha: int, f: NcElement) -> NcElement:
    """``delta_alpha`` with ``delta_alpha U_n = 2 pi i n_alpha U_n`` (0-based alpha)."""
    if not 0 <= alpha < f.d:
        raise DimensionError(f"derivation index {alpha} out of range for d={f.d}")
    return NcElement(f.d, {n: 2j * math.pi * n[alpha] * c for n, c in f.coeffs.items()})


def coefficient_distance(f: NcElement, g: NcElement) -> float:
    """Largest coefficientwise difference."""
    _same_d(f, g)
    keys = set(f.coeffs) | set(g.coeffs)
    return max((abs(f.coeffs.get(k, 0) - g.coeffs.get(k, 0)) for k in keys), default=0.0)


def check_commutation(alpha: int, beta: int, theta) -> float:
    """Residual of ``U_a U_b = e^{2 pi i theta^{ab}} U_b U_a``."""
    theta = as_theta(theta)
    if alpha == beta:
        raise PreconditionError("commutation check needs distinct generators")
    ua = NcElement.generator(theta.d, alpha)
    ub = NcElement.generator(theta.d, beta)
    lhs = multiply(ua, ub, theta)
    rhs = multiply(ub, ua, theta).scale(unit_phase(2 * theta.theta[alpha, beta]))
    return coefficient_distance(lhs, rhs)
