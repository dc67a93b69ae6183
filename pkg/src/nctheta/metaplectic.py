"""Projective action of Sp(2g, Z) on module vectors and the phases ``c_alpha``.

Generators and their symplectic matrices:

* ``LINEAR(A)``: ``(V f)(x) = f(A^T x)``, ``gamma = diag(A, A^{-T})``
* ``SHEAR(B)``: ``(V f)(x) = exp(pi i x.B.x) f(x)``, ``gamma = [[I, B], [0, I]]``
* ``FOURIER``: ``(V f)(xi) = int f(x) exp(-2 pi i xi.x) dx``, ``gamma = [[0, -I], [I, 0]]``

Each satisfies ``V theta_Omega ~ theta_{gamma Omega}``.  A word ``[g1, g2, ...]``
stands for ``gamma = gamma1 gamma2 ...`` and ``V = V1 V2 ...`` (``g1`` applied
last).  Index placement: ``V nabla_a V^{-1} = sum_b G[a, b] nabla_b`` with
``G = [[A^T, -C^T], [-B^T, D^T]]`` in terms of the blocks of ``gamma``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ._poly import Poly
from .errors import DimensionError, PreconditionError, SingularityError
from .nc_algebra import ThetaMatrix, as_theta, unit_phase
from .schwartz_module import (
    CCRRepresentation,
    PolyGaussianTerm,
    PolyGaussianVector,
    WeylOperator,
    apply_nabla_combination,
    apply_weyl,
    inner_product,
    nabla_commutator,
    probe_points,
    quadrature_norm,
    theta_vector,
)
from .symplectic import SymplecticIntMatrix, blocks, from_blocks, is_in_gamma12, mobius_action

KINDS = ("linear", "shear", "fourier")


@dataclass(frozen=True, eq=False)
class MetaplecticGenerator:
    kind: str
    matrix: np.ndarray | None = None
    g: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown generator kind {self.kind!r}")
        if self.kind == "fourier":
            object.__setattr__(self, "matrix", None)
            return
        m = np.atleast_2d(np.array(self.matrix))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("generator matrix must be square")
        if not np.array_equal(m, np.rint(m)):
            raise PreconditionError("generator matrix must be integer")
        m = np.rint(m).astype(np.int64)
        if self.kind == "linear" and round(abs(np.linalg.det(m))) != 1:
            raise PreconditionError("LINEAR needs |det A| = 1")
        if self.kind == "shear" and not np.array_equal(m, m.T):
            raise PreconditionError("SHEAR needs symmetric B")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "g", m.shape[0])

    @classmethod
    def linear(cls, a) -> "MetaplecticGenerator":
        return cls("linear", a)

    @classmethod
    def shear(cls, b) -> "MetaplecticGenerator":
        return cls("shear", b)

    @classmethod
    def fourier(cls, g: int = 1) -> "MetaplecticGenerator":
        return cls("fourier", None, g)

    @property
    def gamma(self) -> SymplecticIntMatrix:
        g = self.g
        eye = np.eye(g, dtype=np.int64)
        zero = np.zeros((g, g), dtype=np.int64)
        if self.kind == "linear":
            a = self.matrix
            a_inv_t = np.rint(np.linalg.inv(a)).astype(np.int64).T
            return SymplecticIntMatrix(from_blocks(a, zero, zero, a_inv_t))
        if self.kind == "shear":
            return SymplecticIntMatrix(from_blocks(eye, self.matrix, zero, eye))
        return SymplecticIntMatrix(from_blocks(zero, -eye, eye, zero))

    def to_json(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear", "A": self.matrix.tolist()}
        if self.kind == "shear":
            return {"kind": "shear", "B": self.matrix.tolist()}
        return {"kind": "fourier", "g": self.g}

    @classmethod
    def from_json(cls, data: dict) -> "MetaplecticGenerator":
        kind = data["kind"]
        if kind == "linear":
            return cls.linear(data["A"])
        if kind == "shear":
            return cls.shear(data["B"])
        if kind == "fourier":
            return cls.fourier(int(data.get("g", 1)))
        raise PreconditionError(f"unknown generator kind {kind!r}")

    def __repr__(self):
        if self.kind == "fourier":
            return f"FOURIER(g={self.g})"
        return f"{self.kind.upper()}({self.matrix.tolist()})"


def word_gamma(word, g: int | None = None) -> SymplecticIntMatrix:
    """Symplectic matrix of a word: the ordered product of generator matrices."""
    if not word:
        if g is None:
            raise PreconditionError("empty word needs an explicit g")
        return SymplecticIntMatrix(np.eye(2 * g, dtype=np.int64))
    out = word[0].gamma
    for gen in word[1:]:
        out = out @ gen.gamma
    return out


# ---------------------------------------------------------------------------
# Action on poly-Gaussian vectors


def _fourier_term(t: PolyGaussianTerm) -> list[PolyGaussianTerm]:
    g = t.g
    if np.linalg.cond(t.Q) > 1e12:
        raise SingularityError("Q is numerically singular; Fourier image undefined")
    q_inv = np.linalg.inv(t.Q)
    q_new = -0.5 * (q_inv + q_inv.T)
    b_new = q_inv @ t.b
    eig = np.linalg.eigvals(-1j * t.Q)
    const = np.prod(1.0 / np.sqrt(eig)) * np.exp(-1j * math.pi * (t.b @ q_inv @ t.b))

    # x_j -> D_j = (i / 2 pi) d/dxi_j acting on the transformed Gaussian
    def d_op(p: Poly, j: int) -> Poly:
        lin = Poly.linear(2j * math.pi * q_new[j], 2j * math.pi * b_new[j])
        return (p.deriv(j) + p * lin).scale(1j / (2 * math.pi))

    cache: dict = {(0,) * g: Poly.constant(g, const)}

    def image(k: tuple) -> Poly:
        if k not in cache:
            j = next(i for i, e in enumerate(k) if e)
            lower = list(k)
            lower[j] -= 1
            cache[k] = d_op(image(tuple(lower)), j)
        return cache[k]

    total = Poly(g)
    for k, c in t.poly.coeffs.items():
        total = total + image(k).scale(c)
    return [PolyGaussianTerm(total, q_new, b_new)]


def apply_v_gamma(gen: MetaplecticGenerator, v: PolyGaussianVector) -> PolyGaussianVector:
    if gen.g != v.g:
        raise DimensionError("generator and vector disagree on g")
    out = []
    for t in v.terms:
        if gen.kind == "shear":
            out.append(PolyGaussianTerm(t.poly, t.Q + gen.matrix, t.b))
        elif gen.kind == "linear":
            a = gen.matrix.astype(float)
            out.append(PolyGaussianTerm(t.poly.substitute_affine(a.T, np.zeros(v.g)), a @ t.Q @ a.T, a @ t.b))
        else:
            out.extend(_fourier_term(t))
    return PolyGaussianVector(v.g, out)


def apply_word(word, v: PolyGaussianVector) -> PolyGaussianVector:
    """``V_{g1} V_{g2} ... v`` (the last generator acts first)."""
    for gen in reversed(word):
        v = apply_v_gamma(gen, v)
    return v


def conjugation_matrix(gamma) -> np.ndarray:
    """``G`` with ``V nabla_a V^{-1} = sum_b G[a, b] nabla_b``."""
    if not isinstance(gamma, SymplecticIntMatrix):
        gamma = SymplecticIntMatrix(gamma)
    a, b, c, d = blocks(gamma.entries)
    return np.block([[a.T, -c.T], [-b.T, d.T]]).astype(float)


def defining_relation_residual(word, v: PolyGaussianVector, points=None) -> float:
    """Max over ``a`` and probe points of ``|V nabla_a v - (G nabla)_a V v|``."""
    g = v.g
    big_g = conjugation_matrix(word_gamma(word, g))
    pts = probe_points(g) if points is None else points
    vv = apply_word(word, v)
    worst = 0.0
    for alpha in range(2 * g):
        lhs = apply_word(word, apply_nabla_combination(np.eye(2 * g)[alpha], v))
        rhs = apply_nabla_combination(big_g[alpha], vv)
        worst = max(worst, float(np.max(np.abs(lhs.evaluate(pts) - rhs.evaluate(pts)))))
    return worst


def ray_residual(w: PolyGaussianVector, t: PolyGaussianVector) -> float:
    """``min_c ||w - c t|| / ||w||``; ``c`` from inner products, distance by quadrature."""
    tt = inner_product(t, t).real
    if tt <= 0:
        raise SingularityError("reference vector is zero")
    c = inner_product(t, w) / tt
    nw = w.norm()
    if nw == 0:
        raise SingularityError("transformed vector is zero")
    return quadrature_norm(w - t.scale(c)) / nw


def check_theta_covariance(word, omega) -> float:
    """Ray distance between ``V_word theta_Omega`` and ``theta_{gamma Omega}``."""
    om = np.atleast_2d(np.asarray(omega, dtype=complex))
    g = om.shape[0]
    w = apply_word(word, theta_vector(om))
    image = mobius_action(word_gamma(word, g), om)
    return ray_residual(w, theta_vector(image.omega))


# ---------------------------------------------------------------------------
# Transformed generators


def c_alpha(gamma, theta) -> list[complex]:
    """``c_a = exp(pi i sum_{l<m} gamma[a,l] theta^{lm} gamma[a,m])``."""
    if not isinstance(gamma, SymplecticIntMatrix):
        gamma = SymplecticIntMatrix(gamma)
    theta = as_theta(theta)
    d = gamma.entries.shape[0]
    if theta.d != d:
        raise DimensionError("gamma and theta disagree on dimension")
    upper = np.triu(theta.theta, k=1)
    out = []
    for row in gamma.entries:
        n = row.astype(float)
        out.append(unit_phase(float(n @ upper @ n)))
    return out


def transformed_generator_operators(gamma, theta, alpha: int, include_phase: bool = True):
    """Both sides: ``exp(sum_l gamma[a,l] K_l)`` and ``c_a U_1^{n_1} U_2^{n_2} ...``."""
    if not isinstance(gamma, SymplecticIntMatrix):
        gamma = SymplecticIntMatrix(gamma)
    rep = CCRRepresentation(theta)
    n = gamma.entries[alpha]
    lhs = rep.word(n)
    factors = [rep.word(np.eye(len(n))[lam] * n[lam]) for lam in range(len(n)) if n[lam]]
    phase = c_alpha(gamma, rep.theta)[alpha] if include_phase else 1.0
    return lhs, phase, factors


def check_transformed_generators(gamma, theta, v: PolyGaussianVector, include_phase: bool = True) -> float:
    """Pointwise discrepancy of the two expressions for ``U'_a``, max over ``a``.

    The ordered product is applied factor by factor to ``v``; the left side
    is a single Weyl operator.
    """
    if not isinstance(gamma, SymplecticIntMatrix):
        gamma = SymplecticIntMatrix(gamma)
    pts = probe_points(v.g)
    worst = 0.0
    for alpha in range(gamma.entries.shape[0]):
        lhs, phase, factors = transformed_generator_operators(gamma, theta, alpha, include_phase)
        rhs_v = v
        for f in reversed(factors):
            rhs_v = apply_weyl(f, rhs_v)
        diff = apply_weyl(lhs, v).evaluate(pts) - phase * rhs_v.evaluate(pts)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def generators_commute_residual(theta, v: PolyGaussianVector) -> float:
    """``max |U_a U_b v - U_b U_a v|`` at probe points; zero iff theta is integral."""
    rep = CCRRepresentation(theta)
    pts = probe_points(v.g)
    d = 2 * v.g
    worst = 0.0
    for a, b in itertools.combinations(range(d), 2):
        ua, ub = rep.generator(a), rep.generator(b)
        diff = apply_weyl(ua, apply_weyl(ub, v)).evaluate(pts) - apply_weyl(ub, apply_weyl(ua, v)).evaluate(pts)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def _probe_vector(g: int) -> PolyGaussianVector:
    q = 1j * np.eye(g) + 0.2 * np.ones((g, g))
    b = 0.1 + 0.05j * np.arange(1, g + 1)
    return PolyGaussianVector.gaussian(q, b)


def bch_phase_check(k_list, v: PolyGaussianVector | None = None) -> float:
    """``exp(sum K_i) = exp(-1/2 sum_{i<j} [K_i, K_j]) prod_i exp(K_i)`` on a probe vector.

    Each ``K_i`` is a coefficient vector over the reference ``nabla``; the
    commutators are the central scalars ``2 pi i K_i.w.K_j``.  The product is
    applied factor by factor (rightmost first).
    """
    ks = [np.asarray(k, dtype=complex) for k in k_list]
    if not ks:
        return 0.0
    g = ks[0].shape[0] // 2
    if any(k.shape != (2 * g,) for k in ks):
        raise DimensionError("all exponents must have length 2g")
    v = _probe_vector(g) if v is None else v
    central = sum(
        (nabla_commutator(ks[i], ks[j]) for i, j in itertools.combinations(range(len(ks)), 2)),
        0j,
    )
    lhs = apply_weyl(WeylOperator.exp_nabla(sum(ks)), v)
    rhs = v
    for k in reversed(ks):
        rhs = apply_weyl(WeylOperator.exp_nabla(k), rhs)
    pts = probe_points(g)
    diff = lhs.evaluate(pts) - np.exp(-0.5 * central) * rhs.evaluate(pts)
    return float(np.max(np.abs(diff)))


# ---------------------------------------------------------------------------
# Gamma_{1,2} scan


def theta_group_generators(g: int) -> list[MetaplecticGenerator]:
    """A generating set of Gamma_{1,2}: GL(g, Z), even shears and the Fourier transform."""
    out = [MetaplecticGenerator.linear(-np.eye(g, dtype=int))]
    if g >= 2:
        for i, j in itertools.combinations(range(g), 2):
            swap = np.eye(g, dtype=int)
            swap[[i, j]] = swap[[j, i]]
            out.append(MetaplecticGenerator.linear(swap))
            elem = np.eye(g, dtype=int)
            elem[i, j] = 1
            out.append(MetaplecticGenerator.linear(elem))
    for i in range(g):
        for sign in (1, -1):
            b = np.zeros((g, g), dtype=int)
            b[i, i] = 2 * sign
            out.append(MetaplecticGenerator.shear(b))
    for i, j in itertools.combinations(range(g), 2):
        for sign in (1, -1):
            b = np.zeros((g, g), dtype=int)
            b[i, j] = b[j, i] = sign
            out.append(MetaplecticGenerator.shear(b))
    out.append(MetaplecticGenerator.fourier(g))
    return out


def odd_shear_probes(g: int) -> list[MetaplecticGenerator]:
    out = []
    for i in range(g):
        for sign in (1, -1):
            b = np.zeros((g, g), dtype=int)
            b[i, i] = sign
            out.append(MetaplecticGenerator.shear(b))
    if g >= 2:
        out.append(MetaplecticGenerator.shear(np.eye(g, dtype=int)))
    return out


def gamma12_criterion_scan(g: int, max_word_len: int) -> dict:
    """Check ``all c_a == 1  <=>  gamma in Gamma_{1,2}`` over generated words.

    Every word up to ``max_word_len`` in the theta-group generators is
    visited, then each odd-shear probe alone and multiplied on both sides by
    the words of length at most one.
    """
    if not 1 <= max_word_len <= 5:
        raise PreconditionError("max_word_len must be between 1 and 5")
    theta = ThetaMatrix.standard(g)
    gens = theta_group_generators(g)
    probes = odd_shear_probes(g)
    counterexamples = []
    checked = 0
    in_group = 0
    distinct = set()

    def visit(word):
        nonlocal checked, in_group
        gamma = word_gamma(word, g)
        phases = c_alpha(gamma, theta)
        all_one = all(p == 1 for p in phases)
        member = is_in_gamma12(gamma)
        checked += 1
        in_group += member
        distinct.add(gamma.entries.tobytes())
        if all_one != member:
            counterexamples.append({"word": [w.to_json() for w in word], "gamma": gamma.entries.tolist()})
        return member

    frontier = deque([()])
    group_words = []
    while frontier:
        word = frontier.popleft()
        if word:
            if not visit(list(word)):
                counterexamples.append({"word": [w.to_json() for w in word], "reason": "generator word left the group"})
            group_words.append(word)
        if len(word) < max_word_len:
            frontier.extend(word + (gen,) for gen in gens)

    short = [()] + [w for w in group_words if len(w) == 1]
    probe_hits = 0
    for probe in probes:
        for left in short:
            for right in short:
                member = visit(list(left) + [probe] + list(right))
                probe_hits += not member
    return {
        "g": g,
        "max_word_len": max_word_len,
        "words_checked": checked,
        "in_gamma12": in_group,
        "outside_gamma12": checked - in_group,
        "distinct_matrices": len(distinct),
        "probe_words_outside": probe_hits,
        "counterexamples": counterexamples,
    }
