import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nctheta.errors import DimensionError, PreconditionError
from nctheta.nc_algebra import (
    NcElement,
    ThetaMatrix,
    check_commutation,
    coefficient_distance,
    derivation,
    involution,
    multiply,
    unit_phase,
)


def brute_force(f, g, theta):
    out = {}
    for n, a in f.coeffs.items():
        for m, b in g.coeffs.items():
            k = tuple(x + y for x, y in zip(n, m))
            phase = cmath.exp(1j * math.pi * (np.array(n) @ theta @ np.array(m)))
            out[k] = out.get(k, 0) + a * b * phase
    return NcElement(f.d, out)


@st.composite
def elements(draw, d, support=10):
    n = draw(st.integers(1, support))
    coeffs = {}
    for _ in range(n):
        key = tuple(draw(st.lists(st.integers(-3, 3), min_size=d, max_size=d)))
        coeffs[key] = complex(draw(st.floats(-2, 2)), draw(st.floats(-2, 2)))
    return NcElement(d, coeffs)


@st.composite
def thetas(draw, d):
    vals = draw(st.lists(st.floats(-2, 2), min_size=d * d, max_size=d * d))
    a = np.triu(np.array(vals).reshape(d, d), 1)
    return ThetaMatrix(a - a.T)


@st.composite
def triples(draw):
    d = draw(st.integers(1, 4))
    return d, draw(thetas(d)), draw(elements(d)), draw(elements(d)), draw(elements(d))


class TestMultiply:
    def test_generators(self):
        th = [[0, 1 / 3], [-1 / 3, 0]]
        prod = multiply(NcElement.generator(2, 0), NcElement.generator(2, 1), th)
        assert prod.coeffs.keys() == {(1, 1)}
        assert abs(prod.coeffs[(1, 1)] - cmath.exp(1j * math.pi / 3)) < 1e-15

    @given(triples())
    def test_unit(self, t):
        d, th, f, _, _ = t
        one = NcElement.unit(d)
        assert multiply(one, f, th).coeffs == f.coeffs
        assert multiply(f, one, th).coeffs == f.coeffs

    @given(triples())
    def test_brute_force_oracle(self, t):
        d, th, f, g, _ = t
        assert coefficient_distance(multiply(f, g, th), brute_force(f, g, th.theta)) < 1e-12

    @given(triples())
    def test_associativity(self, t):
        d, th, f, g, h = t
        lhs = multiply(multiply(f, g, th), h, th)
        rhs = multiply(f, multiply(g, h, th), th)
        assert coefficient_distance(lhs, rhs) < 1e-12

    def test_theta_zero_is_convolution(self, rng):
        f = NcElement(2, {(1, 0): 2, (0, 1): 1j})
        g = NcElement(2, {(1, 0): 1, (-1, 2): 3})
        prod = multiply(f, g, np.zeros((2, 2)))
        assert prod.coeffs == {(0, 2): 6, (1, 1): 1j, (2, 0): 2, (-1, 3): 3j}

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            multiply(NcElement.unit(2), NcElement.unit(3), np.zeros((2, 2)))

    def test_support(self):
        f = NcElement(2, {(1, 0): 1, (0, 0): 1})
        g = NcElement(2, {(0, 1): 1})
        prod = multiply(f, g, [[0, 0.2], [-0.2, 0]])
        assert set(prod.coeffs) <= {(1, 1), (0, 1)}


class TestElement:
    def test_pruning_after_merge(self):
        f = NcElement(1, {(1,): 1.0}) + NcElement(1, {(1,): -1.0 + 1e-16})
        assert f.coeffs == {}

    def test_json_roundtrip(self):
        f = NcElement(2, {(1, -1): 0.5 - 2j, (0, 3): 1})
        assert NcElement.from_json(f.to_json()) == f

    def test_bad_index(self):
        with pytest.raises(DimensionError):
            NcElement(2, {(1,): 1})

    def test_theta_validation(self):
        with pytest.raises(PreconditionError):
            ThetaMatrix([[0, 1], [1, 0]])

    def test_form_vanishes_on_diagonal(self):
        th = ThetaMatrix([[0, 0.1234567], [-0.1234567, 0]])
        assert th.form([3, -7], [3, -7]) == 0.0

    def test_unit_phase_exact(self):
        assert unit_phase(1.0) == -1
        assert unit_phase(-0.5) == -1j
        assert unit_phase(4.5) == 1j


class TestInvolution:
    def test_unitary(self):
        th = [[0, 0.3], [-0.3, 0]]
        u = NcElement.monomial((2, -1))
        assert coefficient_distance(multiply(involution(u), u, th), NcElement.unit(2)) < 1e-15

    @given(triples())
    def test_twice(self, t):
        f = t[2]
        assert involution(involution(f)) == f

    @given(triples())
    def test_antimultiplicative(self, t):
        d, th, f, g, _ = t
        lhs = involution(multiply(f, g, th))
        rhs = multiply(involution(g), involution(f), th)
        assert coefficient_distance(lhs, rhs) < 1e-13


class TestDerivation:
    def test_generators(self):
        u1 = NcElement.generator(2, 0)
        assert coefficient_distance(derivation(0, u1), u1.scale(2j * math.pi)) == 0
        assert derivation(0, NcElement.generator(2, 1)).coeffs == {}

    @given(triples(), st.data())
    def test_leibniz(self, t, data):
        d, th, f, g, _ = t
        a = data.draw(st.integers(0, d - 1))
        lhs = derivation(a, multiply(f, g, th))
        rhs = multiply(derivation(a, f), g, th) + multiply(f, derivation(a, g), th)
        assert coefficient_distance(lhs, rhs) < 1e-12 * max(1.0, lhs.max_abs())

    def test_range(self):
        with pytest.raises(DimensionError):
            derivation(2, NcElement.unit(2))


class TestCommutation:
    @given(st.integers(2, 4).flatmap(lambda d: st.tuples(st.just(d), thetas(d))), st.data())
    def test_relation(self, dt, data):
        d, th = dt
        a = data.draw(st.integers(0, d - 1))
        b = data.draw(st.integers(0, d - 1).filter(lambda x: x != a))
        assert check_commutation(a, b, th) < 1e-15

    def test_integer_theta_commutes(self):
        th = [[0, 2, -1], [-2, 0, 3], [1, -3, 0]]
        for a in range(3):
            for b in range(3):
                if a != b:
                    assert check_commutation(a, b, th) == 0.0
                    ua, ub = NcElement.generator(3, a), NcElement.generator(3, b)
                    assert multiply(ua, ub, th) == multiply(ub, ua, th)

    def test_needs_distinct(self):
        with pytest.raises(PreconditionError):
            check_commutation(0, 0, np.zeros((2, 2)))
