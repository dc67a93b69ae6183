"""Sparse multivariate polynomials with complex coefficients."""

from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import BudgetError

DEGREE_BUDGET = 64


class Poly:
    """Immutable map ``exponent tuple -> complex`` in ``nvars`` variables."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs=None):
        self.nvars = nvars
        clean = {}
        for k, c in (coeffs or {}).items():
            c = complex(c)
            if c != 0:
                clean[tuple(k)] = clean.get(tuple(k), 0) + c
        self.coeffs = {k: c for k, c in sorted(clean.items()) if c != 0}
        if self.degree() > DEGREE_BUDGET:
            raise BudgetError(f"polynomial degree exceeds {DEGREE_BUDGET}")

    @classmethod
    def constant(cls, nvars: int, c: complex = 1.0) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, j: int) -> "Poly":
        k = [0] * nvars
        k[j] = 1
        return cls(nvars, {tuple(k): 1.0})

    @classmethod
    def linear(cls, coefs, const: complex = 0.0) -> "Poly":
        nvars = len(coefs)
        out = {(0,) * nvars: const}
        for j, c in enumerate(coefs):
            k = [0] * nvars
            k[j] = 1
            out[tuple(k)] = c
        return cls(nvars, out)

    def degree(self) -> int:
        return max((sum(k) for k in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return Poly(self.nvars, out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "Poly":
        return Poly(self.nvars, {k: c * v for k, v in self.coeffs.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        out: dict = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + c1 * c2
        return Poly(self.nvars, out)

    def conj(self) -> "Poly":
        """Coefficientwise conjugate (the conjugate function for real arguments)."""
        return Poly(self.nvars, {k: c.conjugate() for k, c in self.coeffs.items()})

    def mul_var(self, j: int) -> "Poly":
        out = {}
        for k, c in self.coeffs.items():
            k2 = list(k)
            k2[j] += 1
            out[tuple(k2)] = c
        return Poly(self.nvars, out)

    def deriv(self, j: int) -> "Poly":
        out = {}
        for k, c in self.coeffs.items():
            if k[j]:
                k2 = list(k)
                k2[j] -= 1
                out[tuple(k2)] = c * k[j]
        return Poly(self.nvars, out)

    def substitute_affine(self, lin, shift) -> "Poly":
        """Return ``x -> p(L x + t)`` with ``L`` of shape (nvars, nvars)."""
        lin = np.asarray(lin, dtype=complex)
        shift = np.asarray(shift, dtype=complex)
        forms = [Poly.linear(lin[j], shift[j]) for j in range(self.nvars)]
        powers: dict = {}

        def power(j, e):
            key = (j, e)
            if key not in powers:
                powers[key] = Poly.constant(self.nvars) if e == 0 else power(j, e - 1) * forms[j]
            return powers[key]

        total = Poly(self.nvars)
        for k, c in self.coeffs.items():
            factors = [power(j, e) for j, e in enumerate(k) if e]
            term = reduce(lambda a, b: a * b, factors, Poly.constant(self.nvars))
            total = total + term.scale(c)
        return total

    def shift(self, a) -> "Poly":
        """``x -> p(x - a)``."""
        return self.substitute_affine(np.eye(self.nvars), -np.asarray(a, dtype=complex))

    def evaluate(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        out = np.zeros(pts.shape[0], dtype=complex)
        for k, c in self.coeffs.items():
            out += c * np.prod(pts ** np.array(k), axis=1)
        return out

    def abs_coefficient_sum(self) -> float:
        return float(sum(abs(c) for c in self.coeffs.values()))

    def max_abs(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def __repr__(self):
        return f"Poly({self.nvars}, {self.coeffs})"
