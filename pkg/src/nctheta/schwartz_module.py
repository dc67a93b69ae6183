"""The Schwartz-space module over a noncommutative torus, done symbolically.

Vectors are finite sums of terms ``p(x) exp(pi i x.Q.x + 2 pi i b.x)`` with
``Im Q`` positive definite.  This family is closed under multiplication by
coordinates, differentiation, complex shifts and modulations, so the
canonical commutation relations and the holomorphicity equations hold as
exact identities up to rounding.

The reference connection on ``S(R^g)`` is ``nabla_a = 2 pi i x_a`` for
``a < g`` and ``nabla_a = d/dx_{a-g}`` for ``a >= g`` (0-based).  With these
operators ``[nabla_a, nabla_{a+g}] = -2 pi i``, i.e. the reference curvature
matrix is ``[[0, -I], [I, 0]]``, whose inverse is the standard
``theta = [[0, I], [-I, 0]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._poly import Poly
from .errors import DimensionError, PositivityError, PreconditionError, SingularityError
from .nc_algebra import NcElement, as_theta
from .symplectic import darboux_standardize

SYMMETRY_TOL = 1e-12


def _complex_matrix(q) -> np.ndarray:
    return np.atleast_2d(np.array(q, dtype=complex))


@dataclass(frozen=True, eq=False)
class PolyGaussianTerm:
    """``poly(x) * exp(pi i x.Q.x + 2 pi i b.x)``."""

    poly: Poly
    Q: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        q = _complex_matrix(self.Q)
        g = q.shape[0]
        if q.shape != (g, g):
            raise DimensionError(f"Q must be square, got {q.shape}")
        if np.max(np.abs(q - q.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(q))):
            raise PreconditionError("Q is not symmetric")
        q = 0.5 * (q + q.T)
        try:
            np.linalg.cholesky(q.imag)
        except np.linalg.LinAlgError:
            raise PositivityError("Im Q is not positive definite; term is not Schwartz") from None
        b = np.atleast_1d(np.array(self.b, dtype=complex))
        if b.shape != (g,) or self.poly.nvars != g:
            raise DimensionError("poly, Q and b disagree on the number of variables")
        q.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "Q", q)
        object.__setattr__(self, "b", b)

    @property
    def g(self) -> int:
        return self.Q.shape[0]

    @property
    def key(self):
        return (self.Q.tobytes(), self.b.tobytes())

    def sort_key(self):
        return tuple(self.Q.real.ravel()) + tuple(self.Q.imag.ravel()) + tuple(
            self.b.real
        ) + tuple(self.b.imag)

    def with_poly(self, poly: Poly) -> "PolyGaussianTerm":
        return PolyGaussianTerm(poly, self.Q, self.b)

    def evaluate(self, points) -> np.ndarray:
        x = np.atleast_2d(np.asarray(points, dtype=float))
        quad = np.einsum("ki,ij,kj->k", x, self.Q, x)
        return self.poly.evaluate(x) * np.exp(1j * math.pi * quad + 2j * math.pi * (x @ self.b))


class PolyGaussianVector:
    """Finite sum of :class:`PolyGaussianTerm` sharing ``g``.

    Terms with bit-identical ``(Q, b)`` are merged and the result is kept in
    a sorted canonical order.
    """

    __slots__ = ("g", "terms")

    def __init__(self, g: int, terms=()):
        merged: dict = {}
        for t in terms:
            if t.g != g:
                raise DimensionError("all terms must share g")
            if t.key in merged:
                prev = merged[t.key]
                merged[t.key] = prev.with_poly(prev.poly + t.poly)
            else:
                merged[t.key] = t
        kept = [t for t in merged.values() if not t.poly.is_zero()]
        self.g = g
        self.terms = tuple(sorted(kept, key=PolyGaussianTerm.sort_key))

    @classmethod
    def gaussian(cls, Q, b=None, poly: Poly | None = None) -> "PolyGaussianVector":
        q = _complex_matrix(Q)
        g = q.shape[0]
        b = np.zeros(g) if b is None else b
        poly = Poly.constant(g) if poly is None else poly
        return cls(g, [PolyGaussianTerm(poly, q, b)])

    def __add__(self, other: "PolyGaussianVector") -> "PolyGaussianVector":
        return PolyGaussianVector(self.g, self.terms + other.terms)

    def __sub__(self, other: "PolyGaussianVector") -> "PolyGaussianVector":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "PolyGaussianVector":
        return PolyGaussianVector(self.g, [t.with_poly(t.poly.scale(c)) for t in self.terms])

    def __rmul__(self, c):
        return self.scale(c)

    def map_polys(self, fn) -> "PolyGaussianVector":
        return PolyGaussianVector(self.g, [t.with_poly(fn(t)) for t in self.terms])

    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, points) -> np.ndarray:
        x = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(x.shape[0], dtype=complex)
        for t in self.terms:
            out += t.evaluate(x)
        return out

    def __call__(self, points):
        return self.evaluate(points)

    def norm(self) -> float:
        return math.sqrt(max(0.0, inner_product(self, self).real))

    def to_json(self) -> dict:
        def cpair(c):
            return [float(np.real(c)), float(np.imag(c))]

        return {
            "g": self.g,
            "terms": [
                {
                    "poly": [{"k": list(k), "c": cpair(c)} for k, c in t.poly.coeffs.items()],
                    "Q": [[cpair(c) for c in row] for row in t.Q],
                    "b": [cpair(c) for c in t.b],
                }
                for t in self.terms
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PolyGaussianVector":
        g = int(data["g"])
        terms = []
        for t in data["terms"]:
            poly = Poly(g, {tuple(m["k"]): complex(*m["c"]) for m in t["poly"]})
            q = np.array([[complex(*c) for c in row] for row in t["Q"]])
            b = np.array([complex(*c) for c in t["b"]])
            terms.append(PolyGaussianTerm(poly, q, b))
        return cls(g, terms)

    def __repr__(self):
        return f"PolyGaussianVector(g={self.g}, terms={len(self.terms)})"


# ---------------------------------------------------------------------------
# Gaussian integrals


def _sqrt_det_inv(m: np.ndarray) -> complex:
    """``det(M)^{-1/2}`` continued from real positive ``M``.

    Eigenvalues of a complex symmetric matrix with positive-definite real
    part have positive real part, so the product of principal roots is the
    analytic branch.
    """
    eig = np.linalg.eigvals(m)
    return complex(np.prod(1.0 / np.sqrt(eig)))


def _moments(cov: np.ndarray):
    """Memoized ``E[y^k]`` for a centred Gaussian with covariance ``cov``."""

    @lru_cache(maxsize=None)
    def moment(k: tuple) -> complex:
        total = sum(k)
        if total == 0:
            return 1.0 + 0j
        if total % 2:
            return 0j
        i = next(idx for idx, e in enumerate(k) if e)
        rest = list(k)
        rest[i] -= 1
        acc = 0j
        for j, e in enumerate(rest):
            if e:
                lower = list(rest)
                lower[j] -= 1
                acc += cov[i, j] * e * moment(tuple(lower))
        return acc

    return moment


def gaussian_integral(poly: Poly, Q, b) -> complex:
    """``int p(x) exp(pi i x.Q.x + 2 pi i b.x) dx`` over ``R^g`` in closed form.

    Completing the square moves the Gaussian to a complex centre; the shifted
    polynomial is then integrated monomial by monomial with Wick moments.
    """
    q = _complex_matrix(Q)
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    g = q.shape[0]
    m = -1j * q
    if np.min(np.linalg.eigvalsh(0.5 * (m.real + m.real.T))) <= 0:
        raise SingularityError("combined quadratic form is not positive")
    m_inv = np.linalg.inv(m)
    mu = 1j * m_inv @ b
    const = _sqrt_det_inv(m) * np.exp(-math.pi * (b @ m_inv @ b))
    moment = _moments(m_inv / (2 * math.pi))
    shifted = poly.substitute_affine(np.eye(g), mu)
    return complex(const * sum(c * moment(k) for k, c in shifted.coeffs.items()))


def inner_product(v: PolyGaussianVector, w: PolyGaussianVector) -> complex:
    """``int conj(v(x)) w(x) dx`` (conjugate-linear in the first slot)."""
    if v.g != w.g:
        raise DimensionError("vectors have different g")
    total = 0j
    for s in v.terms:
        ps = s.poly.conj()
        for t in w.terms:
            total += gaussian_integral(ps * t.poly, t.Q - s.Q.conj(), t.b - s.b.conj())
    return total


def quadrature_norm(v: PolyGaussianVector, max_points: int = 1_000_000) -> float:
    """L2 norm from pointwise evaluation on a trapezoid grid (g <= 2).

    Used where the symbolic norm would suffer cancellation, e.g. the
    distance between two nearly equal Gaussians with differently rounded
    exponents.
    """
    if v.is_zero():
        return 0.0
    g = v.g
    if g > 2:
        raise PreconditionError("quadrature norm is only provided for g <= 2")
    lo = np.full(g, np.inf)
    hi = np.full(g, -np.inf)
    fmax = 0.0
    for t in v.terms:
        im_q = t.Q.imag
        lam = np.linalg.eigvalsh(im_q)[0]
        centre = -np.linalg.solve(im_q, t.b.imag)
        half = math.sqrt(45.0 / (math.pi * lam)) + 1.0 + math.sqrt(t.poly.degree())
        lo = np.minimum(lo, centre - half)
        hi = np.maximum(hi, centre + half)
    for t in v.terms:
        reach = np.max(np.abs(np.concatenate([lo, hi])))
        fmax = max(fmax, np.max(np.abs(t.Q.real)) * g * reach + np.max(np.abs(t.b.real)))
    step = 1.0 / (8.0 * (fmax + 1.0))
    per_axis = int(min(max(801, math.ceil(np.max(hi - lo) / step) + 1), max_points ** (1.0 / g)))
    axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(g)]
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gr.ravel() for gr in grids], axis=1)
    vals = np.abs(v.evaluate(pts)) ** 2
    cell = np.prod([(hi[i] - lo[i]) / (per_axis - 1) for i in range(g)])
    return math.sqrt(float(np.sum(vals)) * cell)


def probe_points(g: int, n: int = 10, seed: int = 1234, spread: float = 1.5) -> np.ndarray:
    """Deterministic sample points in ``[-spread, spread]^g``."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-spread, spread, size=(n, g))


# ---------------------------------------------------------------------------
# Connection operators


def reference_curvature(g: int) -> np.ndarray:
    """Matrix ``w`` with ``[nabla_a, nabla_b] = 2 pi i w_ab`` for the reference connection."""
    eye = np.eye(g)
    zero = np.zeros((g, g))
    return np.block([[zero, -eye], [eye, zero]])


def _check_index(alpha: int, g: int):
    if not 0 <= alpha < 2 * g:
        raise DimensionError(f"connection index {alpha} out of range for g={g}")


def apply_nabla(alpha: int, v: PolyGaussianVector) -> PolyGaussianVector:
    """Apply the reference ``nabla_alpha`` (0-based)."""
    g = v.g
    _check_index(alpha, g)
    if alpha < g:
        return v.map_polys(lambda t: t.poly.mul_var(alpha).scale(2j * math.pi))
    j = alpha - g

    def deriv(t: PolyGaussianTerm) -> Poly:
        lin = Poly.linear(2j * math.pi * t.Q[j], 2j * math.pi * t.b[j])
        return t.poly.deriv(j) + t.poly * lin

    return v.map_polys(deriv)


def apply_nabla_combination(coeffs, v: PolyGaussianVector) -> PolyGaussianVector:
    """Apply ``sum_a coeffs[a] nabla_a`` in one pass over the terms."""
    coeffs = np.asarray(coeffs, dtype=complex)
    g = v.g
    if coeffs.shape != (2 * g,):
        raise DimensionError(f"expected {2 * g} coefficients")
    u, s = coeffs[:g], coeffs[g:]

    def combo(t: PolyGaussianTerm) -> Poly:
        out = Poly(g)
        mult = Poly.linear(2j * math.pi * u)
        if np.any(u):
            out = out + t.poly * mult
        if np.any(s):
            for j in range(g):
                if s[j] != 0:
                    lin = Poly.linear(2j * math.pi * t.Q[j], 2j * math.pi * t.b[j])
                    out = out + (t.poly.deriv(j) + t.poly * lin).scale(s[j])
        return out

    return v.map_polys(combo)


def nabla_commutator(c1, c2) -> complex:
    """Scalar ``[c1.nabla, c2.nabla]`` for the reference connection."""
    c1 = np.asarray(c1, dtype=complex)
    c2 = np.asarray(c2, dtype=complex)
    g = c1.shape[0] // 2
    return complex(2j * math.pi * (c1 @ reference_curvature(g) @ c2))


@dataclass(frozen=True, eq=False)
class WeylOperator:
    """``(W f)(x) = phase * exp(2 pi i w.x) * f(x - a)``; parameters may be complex."""

    shift: np.ndarray
    modulation: np.ndarray
    phase: complex = 1.0

    def __post_init__(self):
        a = np.atleast_1d(np.array(self.shift, dtype=complex))
        w = np.atleast_1d(np.array(self.modulation, dtype=complex))
        if a.shape != w.shape:
            raise DimensionError("shift and modulation differ in length")
        object.__setattr__(self, "shift", a)
        object.__setattr__(self, "modulation", w)
        object.__setattr__(self, "phase", complex(self.phase))

    @property
    def g(self) -> int:
        return self.shift.shape[0]

    @classmethod
    def identity(cls, g: int) -> "WeylOperator":
        return cls(np.zeros(g), np.zeros(g), 1.0)

    @classmethod
    def exp_nabla(cls, coeffs) -> "WeylOperator":
        """``exp(sum_a coeffs[a] nabla_a)``.

        Splitting ``K = 2 pi i u.x + s.d`` with ``[2 pi i u.x, s.d] = -2 pi i u.s``
        gives ``exp(K) = e^{pi i u.s} e^{2 pi i u.x} e^{s.d}``.
        """
        c = np.asarray(coeffs, dtype=complex)
        g = c.shape[0] // 2
        u, s = c[:g], c[g:]
        return cls(-s, u, np.exp(1j * math.pi * (u @ s)))

    def __matmul__(self, other: "WeylOperator") -> "WeylOperator":
        """Composition ``self o other``."""
        phase = self.phase * other.phase * np.exp(-2j * math.pi * (other.modulation @ self.shift))
        return WeylOperator(self.shift + other.shift, self.modulation + other.modulation, phase)

    def scaled(self, c: complex) -> "WeylOperator":
        return WeylOperator(self.shift, self.modulation, self.phase * c)

    def __call__(self, v: PolyGaussianVector) -> PolyGaussianVector:
        return apply_weyl(self, v)

    def evaluate_on(self, fn, points) -> np.ndarray:
        """Numeric action on a callable, for pointwise oracles."""
        if np.any(self.shift.imag):
            raise PreconditionError("pointwise action needs a real shift")
        x = np.atleast_2d(np.asarray(points, dtype=float))
        return self.phase * np.exp(2j * math.pi * (x @ self.modulation)) * fn(x - self.shift.real)


def apply_weyl(W: WeylOperator, v: PolyGaussianVector) -> PolyGaussianVector:
    """Exact action: recentre the polynomial, adjust ``b`` and absorb constants."""
    if W.g != v.g:
        raise DimensionError("operator and vector have different g")
    a, w = W.shift, W.modulation
    out = []
    for t in v.terms:
        qa = t.Q @ a
        const = W.phase * np.exp(1j * math.pi * (a @ qa) - 2j * math.pi * (t.b @ a))
        poly = t.poly.shift(a).scale(const) if np.any(a) else t.poly.scale(const)
        out.append(PolyGaussianTerm(poly, t.Q, t.b - qa + w))
    return PolyGaussianVector(v.g, out)


# ---------------------------------------------------------------------------
# Module structure


class CCRRepresentation:
    """Connection ``nabla_alpha = sum_a M[alpha, a] nabla^ref_a`` with curvature ``theta^{-1}``.

    For the standard ``theta`` the matrix ``M`` is the identity.  Otherwise a
    Darboux basis ``T`` of ``omega = theta^{-1}`` (``T^T omega T = J``) gives
    ``M = T^{-T} P`` with ``P = diag(I, -I)``, since ``P J P`` is the
    reference curvature.
    """

    def __init__(self, theta):
        theta = as_theta(theta)
        d = theta.d
        if d % 2:
            raise DimensionError("the Schwartz module needs an even-dimensional torus")
        try:
            omega = np.linalg.inv(theta.theta)
        except np.linalg.LinAlgError:
            raise SingularityError("theta is singular") from None
        if np.linalg.cond(theta.theta) > 1e12:
            raise SingularityError("theta is numerically singular")
        omega = 0.5 * (omega - omega.T)
        g = d // 2
        ref = reference_curvature(g)
        if np.array_equal(omega, ref):
            m = np.eye(d)
        else:
            t = darboux_standardize(omega)
            p = np.diag(np.concatenate([np.ones(g), -np.ones(g)]))
            m = np.linalg.inv(t).T @ p
        self.theta = theta
        self.omega = omega
        self.g = g
        self.matrix = m

    def nabla_coeffs(self, alpha: int) -> np.ndarray:
        return self.matrix[alpha]

    def apply_nabla(self, alpha: int, v: PolyGaussianVector) -> PolyGaussianVector:
        _check_index(alpha, self.g)
        return apply_nabla_combination(self.matrix[alpha], v)

    def generator_coeffs(self, alpha: int) -> np.ndarray:
        """Reference coefficients of ``K_alpha = -theta^{alpha beta} nabla_beta``."""
        return -(self.theta.theta @ self.matrix)[alpha]

    def generator(self, alpha: int) -> WeylOperator:
        return WeylOperator.exp_nabla(self.generator_coeffs(alpha))

    def word(self, n) -> WeylOperator:
        """``W_n = exp(sum_lambda n_lambda K_lambda)``."""
        n = np.asarray(n, dtype=float)
        return WeylOperator.exp_nabla(-(n @ self.theta.theta @ self.matrix))


def generator_U(alpha: int, theta) -> WeylOperator:
    """``U_alpha = exp(-theta^{alpha beta} nabla_beta)`` as a Weyl operator (0-based)."""
    rep = CCRRepresentation(theta)
    _check_index(alpha, rep.g)
    return rep.generator(alpha)


def module_action(f: NcElement, v: PolyGaussianVector, theta) -> PolyGaussianVector:
    """``sum_n f_n W_n v`` with ``W_n = exp(sum n_lambda K_lambda)``.

    These operators satisfy ``W_m W_n = e^{pi i n.theta.m} W_{n+m}``, so the
    action is a right action: acting by ``f`` and then by ``h`` equals acting
    by the star product ``f * h``.
    """
    rep = CCRRepresentation(theta)
    if f.d != 2 * v.g:
        raise DimensionError("element and module disagree on dimension")
    out = PolyGaussianVector(v.g)
    for n, c in f.coeffs.items():
        out = out + apply_weyl(rep.word(n), v).scale(c)
    return out


def curvature_residual(theta, v: PolyGaussianVector) -> float:
    """``max_{a,b} || ([nabla_a, nabla_b] - 2 pi i omega_ab) v ||`` with ``omega = theta^{-1}``."""
    rep = CCRRepresentation(theta)
    worst = 0.0
    d = 2 * rep.g
    for a in range(d):
        for b in range(a + 1, d):
            ab = rep.apply_nabla(a, rep.apply_nabla(b, v))
            ba = rep.apply_nabla(b, rep.apply_nabla(a, v))
            r = ab - ba - v.scale(2j * math.pi * rep.omega[a, b])
            worst = max(worst, r.norm())
    return worst


def theta_vector(omega) -> PolyGaussianVector:
    """The holomorphic vector ``exp(pi i x.Omega.x)``."""
    q = _complex_matrix(omega)
    if np.max(np.abs(q - q.T)) > SYMMETRY_TOL:
        raise PreconditionError("Omega is not symmetric")
    try:
        np.linalg.cholesky(0.5 * (q.imag + q.imag.T))
    except np.linalg.LinAlgError:
        raise PositivityError(
            "Omega is not positive: the quadratic exponent is not a Schwartz function"
        ) from None
    return PolyGaussianVector.gaussian(q)


def holomorphic_operator(omega, alpha: int, v: PolyGaussianVector) -> PolyGaussianVector:
    """``(d/dx_alpha - 2 pi i Omega_{alpha beta} x_beta) v``."""
    q = _complex_matrix(omega)
    g = q.shape[0]
    coeffs = np.concatenate([-q[alpha], np.eye(g)[alpha]])
    return apply_nabla_combination(coeffs, v)


def holomorphic_residual(omega, v: PolyGaussianVector) -> float:
    q = _complex_matrix(omega)
    if q.shape[0] != v.g:
        raise DimensionError("Omega and vector disagree on g")
    return max(holomorphic_operator(q, a, v).norm() for a in range(v.g))
