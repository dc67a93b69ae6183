"""SO(d,d,Z) bookkeeping: fractional-linear action, Grassmann algebra, spinor action.

Grassmann monomials are bitmasks, bit ``i`` standing for the generator
``alpha^{i+1}``; monomials are written in increasing index order and the
Berezin integral reads off the coefficient of ``alpha^1 alpha^2 ... alpha^d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import (
    CompositionError,
    DimensionError,
    PreconditionError,
    SingularityError,
    UnsupportedGeneratorError,
)
from .nc_algebra import ThetaMatrix, as_theta

ANTISYMMETRY_TOL = 1e-10
TRIPLE_TOL = 1e-12


# ---------------------------------------------------------------------------
# Grassmann algebra


def _rational(c):
    if isinstance(c, (Fraction, int)):
        return Fraction(c)
    if isinstance(c, float) and c.is_integer():
        return Fraction(int(c))
    if isinstance(c, np.integer):
        return Fraction(int(c))
    return c


@dataclass(frozen=True)
class GrassmannElement:
    d: int
    coeffs: Mapping[int, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 0:
            raise DimensionError("d must be non-negative")
        full = 1 << self.d
        clean = {}
        for mask, c in self.coeffs.items():
            mask = int(mask)
            if not 0 <= mask < full:
                raise DimensionError(f"monomial {mask:b} uses generators beyond d={self.d}")
            c = _rational(c)
            if c != 0:
                clean[mask] = clean.get(mask, 0) + c
        object.__setattr__(self, "coeffs", {m: c for m, c in sorted(clean.items()) if c != 0})

    @classmethod
    def scalar(cls, d: int, c=1) -> "GrassmannElement":
        return cls(d, {0: c})

    @classmethod
    def generator(cls, d: int, i: int) -> "GrassmannElement":
        """``alpha^{i+1}`` for a 0-based index ``i``."""
        if not 0 <= i < d:
            raise DimensionError(f"generator {i} out of range")
        return cls(d, {1 << i: 1})

    @classmethod
    def monomial(cls, d: int, indices, c=1) -> "GrassmannElement":
        """Product of generators in the given order (0-based)."""
        out = cls.scalar(d, c)
        for i in indices:
            out = grassmann_multiply(out, cls.generator(d, i))
        return out

    def __add__(self, other: "GrassmannElement") -> "GrassmannElement":
        _same_d(self, other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return GrassmannElement(self.d, out)

    def __sub__(self, other: "GrassmannElement") -> "GrassmannElement":
        return self + other.scale(-1)

    def scale(self, c) -> "GrassmannElement":
        c = _rational(c)
        return GrassmannElement(self.d, {m: c * v for m, v in self.coeffs.items()})

    def __mul__(self, other: "GrassmannElement") -> "GrassmannElement":
        return grassmann_multiply(self, other)

    def scalar_part(self):
        return self.coeffs.get(0, 0)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "terms": [
                {"monomial": [i + 1 for i in range(self.d) if m >> i & 1], "c": str(c)}
                for m, c in self.coeffs.items()
            ],
        }


def _same_d(a: GrassmannElement, b: GrassmannElement):
    if a.d != b.d:
        raise DimensionError("Grassmann elements have different numbers of generators")


def shuffle_sign(s: int, t: int) -> int:
    """Sign of reordering ``alpha^S alpha^T`` into increasing order (disjoint ``S``, ``T``)."""
    swaps = 0
    tt = t
    while tt:
        low = tt & -tt
        swaps += bin(s & ~((low << 1) - 1)).count("1")
        tt ^= low
    return -1 if swaps % 2 else 1


def grassmann_multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    _same_d(a, b)
    out: dict = {}
    for s, x in a.coeffs.items():
        for t, y in b.coeffs.items():
            if s & t:
                continue
            out[s | t] = out.get(s | t, 0) + shuffle_sign(s, t) * x * y
    return GrassmannElement(a.d, out)


def grassmann_exp(a: GrassmannElement) -> GrassmannElement:
    """``sum_k a^k / k!`` for nilpotent ``a``; the series stops by ``k = d``."""
    if a.scalar_part() != 0:
        raise PreconditionError("exponential needs a zero scalar part")
    total = GrassmannElement.scalar(a.d)
    power = GrassmannElement.scalar(a.d)
    for k in range(1, a.d + 1):
        power = grassmann_multiply(power, a)
        if not power.coeffs:
            break
        total = total + power.scale(Fraction(1, math.factorial(k)))
    return total


def berezin_top(mu: GrassmannElement):
    """Coefficient of ``alpha^1 ... alpha^d``."""
    return mu.coeffs.get((1 << mu.d) - 1, 0)


def contract(i: int, mu: GrassmannElement) -> GrassmannElement:
    """Left derivative ``d/d alpha^{i+1}``."""
    out = {}
    bit = 1 << i
    for m, c in mu.coeffs.items():
        if m & bit:
            sign = -1 if bin(m & (bit - 1)).count("1") % 2 else 1
            out[m ^ bit] = sign * c
    return GrassmannElement(mu.d, out)


# ---------------------------------------------------------------------------
# SO(d, d, Z)


def split_form(d: int) -> np.ndarray:
    eye = np.eye(d, dtype=np.int64)
    zero = np.zeros((d, d), dtype=np.int64)
    return np.block([[zero, eye], [eye, zero]])


@dataclass(frozen=True, eq=False)
class SODDMatrix:
    """Integer ``2d x 2d`` matrix preserving the split form ``[[0, I], [I, 0]]``."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionError(f"expected an even square matrix, got shape {m.shape}")
        if not np.array_equal(m, np.rint(m)):
            raise PreconditionError("SO(d,d,Z) elements must be integer")
        m = np.rint(m).astype(np.int64)
        q = split_form(m.shape[0] // 2)
        if not np.array_equal(m.T @ q @ m, q):
            raise PreconditionError("matrix does not preserve the split form")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def d(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def blocks(self):
        d = self.d
        m = self.entries
        return m[:d, :d], m[:d, d:], m[d:, :d], m[d:, d:]

    def __matmul__(self, other: "SODDMatrix") -> "SODDMatrix":
        return SODDMatrix(self.entries @ other.entries)

    def __eq__(self, other):
        return isinstance(other, SODDMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    @classmethod
    def identity(cls, d: int) -> "SODDMatrix":
        return cls(np.eye(2 * d, dtype=np.int64))


def gl_generator(a) -> SODDMatrix:
    a = np.rint(np.atleast_2d(np.asarray(a, dtype=float))).astype(np.int64)
    if round(abs(np.linalg.det(a))) != 1:
        raise PreconditionError("A must be unimodular")
    inv_t = np.rint(np.linalg.inv(a)).astype(np.int64).T
    zero = np.zeros_like(a)
    return SODDMatrix(np.block([[a, zero], [zero, inv_t]]))


def shear_generator(n) -> SODDMatrix:
    n = np.rint(np.atleast_2d(np.asarray(n, dtype=float))).astype(np.int64)
    if not np.array_equal(n, -n.T):
        raise PreconditionError("shear block must be antisymmetric")
    eye = np.eye(n.shape[0], dtype=np.int64)
    return SODDMatrix(np.block([[eye, n], [np.zeros_like(n), eye]]))


def flip_generator(d: int, i: int) -> SODDMatrix:
    """Exchange of the ``i``-th coordinate with its dual (0-based)."""
    if not 0 <= i < d:
        raise DimensionError(f"flip index {i} out of range")
    e = np.zeros((d, d), dtype=np.int64)
    e[i, i] = 1
    rest = np.eye(d, dtype=np.int64) - e
    return SODDMatrix(np.block([[rest, e], [e, rest]]))


def generator_from_json(data: dict, d: int | None = None) -> SODDMatrix:
    kind = data.get("kind")
    if kind == "shear":
        return shear_generator(data["N"])
    if kind == "gl":
        return gl_generator(data["A"])
    if kind == "flip":
        if d is None and "d" not in data:
            raise PreconditionError("flip generator needs d")
        return flip_generator(int(data.get("d", d)), int(data["i"]))
    raise UnsupportedGeneratorError(f"unknown generator kind {kind!r}")


def word_product(word, d: int | None = None) -> SODDMatrix:
    if not word:
        if d is None:
            raise PreconditionError("empty word needs d")
        return SODDMatrix.identity(d)
    out = word[0]
    for g in word[1:]:
        out = out @ g
    return out


def fractional_transform(g: SODDMatrix, theta) -> ThetaMatrix:
    """``(M theta + N)(R theta + S)^{-1}``."""
    theta = as_theta(theta)
    if theta.d != g.d:
        raise DimensionError("theta and g disagree on d")
    m, n, r, s = (b.astype(float) for b in g.blocks)
    denom = r @ theta.theta + s
    if np.linalg.cond(denom) > 1e12:
        raise SingularityError("R theta + S is singular: the transform is undefined here")
    out = np.linalg.solve(denom.T, (m @ theta.theta + n).T).T
    scale = max(1.0, float(np.max(np.abs(out))))
    if np.max(np.abs(out + out.T)) > ANTISYMMETRY_TOL * scale:
        raise PreconditionError("transformed theta is not antisymmetric")
    return ThetaMatrix(0.5 * (out - out.T))


# ---------------------------------------------------------------------------
# Spinor action


def _classify(g: SODDMatrix):
    d = g.d
    m, n, r, s = g.blocks
    eye = np.eye(d, dtype=np.int64)
    if not r.any() and not n.any():
        return "gl", m
    if not r.any() and np.array_equal(m, eye) and np.array_equal(s, eye):
        return "shear", n
    if np.array_equal(n, r) and np.array_equal(m, s) and np.array_equal(m + n, eye):
        diag = np.diag(n)
        if np.array_equal(n, np.diag(diag)) and diag.sum() == 1:
            return "flip", int(np.argmax(diag))
    raise UnsupportedGeneratorError("not a GL, shear or single-flip generator; supply a word")


def _gl_image(a: np.ndarray, mu: GrassmannElement) -> GrassmannElement:
    """Algebra automorphism ``alpha^k -> sum_i A[i, k] alpha^i``."""
    d = mu.d
    images = [
        GrassmannElement(d, {1 << i: int(a[i, k]) for i in range(d) if a[i, k]}) for k in range(d)
    ]
    total = GrassmannElement(d)
    for mask, c in mu.coeffs.items():
        term = GrassmannElement.scalar(d, c)
        for k in range(d):
            if mask >> k & 1:
                term = grassmann_multiply(term, images[k])
        total = total + term
    return total


def shear_exponent(n, d: int) -> GrassmannElement:
    """``sum_{i<j} N_ij alpha^i alpha^j``."""
    n = np.asarray(n)
    return GrassmannElement(
        d, {(1 << i) | (1 << j): int(n[i, j]) for i in range(d) for j in range(i + 1, d) if n[i, j]}
    )


def spinor_action(g: SODDMatrix, mu: GrassmannElement) -> GrassmannElement:
    """``S(g) mu`` for a standard generator ``g``.

    GL: the induced automorphism with no determinant factor.  Shear: left
    multiplication by ``exp(sum_{i<j} N_ij alpha^i alpha^j)``.  Flip on ``i``:
    ``alpha^i`` creation plus contraction, which squares to one.
    """
    if g.d != mu.d:
        raise DimensionError("generator and element disagree on d")
    kind, data = _classify(g)
    if kind == "gl":
        return _gl_image(data, mu)
    if kind == "shear":
        return grassmann_multiply(grassmann_exp(shear_exponent(data, mu.d)), mu)
    created = grassmann_multiply(GrassmannElement.generator(mu.d, data), mu)
    return created + contract(data, mu)


def spinor_word(word, mu: GrassmannElement) -> GrassmannElement:
    """``S(g1) S(g2) ... mu`` (rightmost generator first)."""
    for g in reversed(word):
        mu = spinor_action(g, mu)
    return mu


def theta_vector_dimension(word, d: int | None = None) -> int:
    """Top Berezin coefficient of ``S(g) 1``, sign kept."""
    if not word and d is None:
        raise PreconditionError("empty word needs d")
    d = word[0].d if word else d
    top = berezin_top(spinor_word(word, GrassmannElement.scalar(d)))
    top = Fraction(top)
    if top.denominator != 1:
        raise PreconditionError(f"non-integral top coefficient {top}")
    return int(top)


def pfaffian(a) -> int:
    """Exact Pfaffian of an integer antisymmetric matrix by expansion along the first row."""
    a = [[int(x) for x in row] for row in np.asarray(a)]
    n = len(a)
    if n % 2:
        return 0
    if n == 0:
        return 1
    total = 0
    for j in range(1, n):
        if a[0][j] == 0:
            continue
        keep = [k for k in range(1, n) if k != j]
        minor = [[a[r][c] for c in keep] for r in keep]
        total += (-1) ** (j - 1) * a[0][j] * pfaffian(minor)
    return total


# ---------------------------------------------------------------------------
# Bimodule triples


@dataclass(frozen=True, eq=False)
class BimoduleTriple:
    theta: ThetaMatrix
    theta_hat: ThetaMatrix
    g: SODDMatrix
    word: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "theta", as_theta(self.theta))
        object.__setattr__(self, "theta_hat", as_theta(self.theta_hat))
        object.__setattr__(self, "word", tuple(self.word))
        if self.word and word_product(self.word) != self.g:
            raise PreconditionError("word does not multiply to g")
        expected = fractional_transform(self.g, self.theta)
        if np.max(np.abs(expected.theta - self.theta_hat.theta)) > TRIPLE_TOL * max(
            1.0, float(np.max(np.abs(expected.theta)))
        ):
            raise PreconditionError("theta_hat is not the transform of theta")

    @classmethod
    def from_word(cls, theta, word) -> "BimoduleTriple":
        g = word_product(list(word), as_theta(theta).d)
        return cls(theta, fractional_transform(g, theta), g, tuple(word))


def compose_triples(t1: BimoduleTriple, t2: BimoduleTriple) -> BimoduleTriple:
    """``(theta, theta_hat', g' g)`` for ``t1 = (theta, theta_hat, g)``, ``t2 = (theta_hat, theta_hat', g')``."""
    if t1.theta_hat.d != t2.theta.d or np.max(np.abs(t1.theta_hat.theta - t2.theta.theta)) > TRIPLE_TOL:
        raise CompositionError("middle tori differ")
    def has_word(t):
        return bool(t.word) or t.g == SODDMatrix.identity(t.g.d)

    word = t2.word + t1.word if has_word(t1) and has_word(t2) else ()
    return BimoduleTriple(t1.theta, t2.theta_hat, t2.g @ t1.g, word)
