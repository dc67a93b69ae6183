import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nctheta.duality import (
    BimoduleTriple,
    GrassmannElement as G,
    SODDMatrix,
    berezin_top,
    compose_triples,
    flip_generator,
    fractional_transform,
    generator_from_json,
    gl_generator,
    grassmann_exp,
    grassmann_multiply,
    pfaffian,
    shear_generator,
    spinor_action,
    spinor_word,
    theta_vector_dimension,
    word_product,
)
from nctheta.errors import (
    CompositionError,
    DimensionError,
    PreconditionError,
    SingularityError,
    UnsupportedGeneratorError,
)
from nctheta.nc_algebra import ThetaMatrix
from nctheta.sampling import random_antisymmetric

seeds = st.integers(0, 2**31)


def a(d, i):
    return G.generator(d, i)


def matching_pfaffian(m) -> int:
    """Sum over perfect matchings with the crossing-number sign."""
    n = len(m)

    def matchings(rest):
        if not rest:
            yield []
            return
        first = rest[0]
        for k in range(1, len(rest)):
            pair = (first, rest[k])
            for tail in matchings(rest[1:k] + rest[k + 1 :]):
                yield [pair] + tail

    total = 0
    for mt in matchings(list(range(n))):
        crossings = sum(1 for (i, j), (k, l) in itertools.combinations(mt, 2) if i < k < j < l or k < i < l < j)
        prod = 1
        for i, j in mt:
            prod *= int(m[i][j])
        total += (-1) ** crossings * prod
    return total


def brute_multiply(x: G, y: G) -> G:
    out = {}
    for s, cx in x.coeffs.items():
        for t, cy in y.coeffs.items():
            seq = [i for i in range(x.d) if s >> i & 1] + [i for i in range(y.d) if t >> i & 1]
            if len(set(seq)) < len(seq):
                continue
            inversions = sum(1 for p, q in itertools.combinations(seq, 2) if p > q)
            mask = sum(1 << i for i in seq)
            out[mask] = out.get(mask, 0) + (-1) ** inversions * cx * cy
    return G(x.d, out)


def random_element(rng, d):
    return G(d, {int(m): Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) for m in rng.integers(0, 1 << d, 5)})


class TestGrassmann:
    def test_examples(self):
        assert a(2, 0) * a(2, 1) == (a(2, 1) * a(2, 0)).scale(-1)
        assert (a(2, 0) * a(2, 0)).coeffs == {}
        one = G.scalar(2)
        prod = (one + a(2, 0)) * (one + a(2, 1))
        assert prod == brute_multiply(one + a(2, 0), one + a(2, 1))
        assert prod.coeffs == {0: 1, 1: 1, 2: 1, 3: 1}

    @given(seeds)
    def test_brute_force_oracle(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 6))
        x, y = random_element(rng, d), random_element(rng, d)
        assert grassmann_multiply(x, y) == brute_multiply(x, y)

    @given(seeds)
    def test_axioms(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 6))
        x, y, z = (random_element(rng, d) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
        i, j = rng.integers(0, d, 2)
        assert a(d, i) * a(d, j) == (a(d, j) * a(d, i)).scale(-1)

    def test_graded_commutativity(self):
        even = G.monomial(4, [0, 1])
        odd = a(4, 2)
        assert even * odd == odd * even
        assert G.monomial(4, [0, 1, 2]) * a(4, 3) == (a(4, 3) * G.monomial(4, [0, 1, 2])).scale(-1)

    def test_exp(self):
        assert grassmann_exp(G(3)) == G.scalar(3)
        x = G.monomial(2, [0, 1])
        assert grassmann_exp(x) == G.scalar(2) + x
        q = G.monomial(4, [0, 1]) + G.monomial(4, [2, 3])
        assert grassmann_exp(q) == G.scalar(4) + q + G.monomial(4, [0, 1, 2, 3])
        with pytest.raises(PreconditionError):
            grassmann_exp(G.scalar(2))

    def test_berezin(self):
        assert berezin_top(G.scalar(3)) == 0
        assert berezin_top(G.monomial(3, [0, 1, 2], 5) + a(3, 1)) == 5
        assert berezin_top(grassmann_exp(G.monomial(4, [0, 1]) + G.monomial(4, [2, 3]))) == 1

    def test_exact_arithmetic(self):
        x = G.scalar(1, Fraction(1, 3)) * G.scalar(1, 3)
        assert x.coeffs == {0: 1} and isinstance(x.coeffs[0], Fraction)

    def test_dimension_errors(self):
        with pytest.raises(DimensionError):
            a(2, 0) * a(3, 0)
        with pytest.raises(DimensionError):
            G(2, {4: 1})
        with pytest.raises(DimensionError):
            a(2, 2)

    def test_json(self):
        assert G.monomial(3, [2, 0], Fraction(1, 2)).to_json() == {"d": 3, "terms": [{"monomial": [1, 3], "c": "-1/2"}]}


class TestSODD:
    def test_validation(self):
        with pytest.raises(PreconditionError):
            SODDMatrix(np.diag([2, 1, 1, 1]))
        with pytest.raises(DimensionError):
            SODDMatrix(np.eye(3))
        with pytest.raises(PreconditionError):
            shear_generator([[0, 1], [1, 0]])
        with pytest.raises(PreconditionError):
            gl_generator([[2, 0], [0, 1]])

    def test_json_generators(self):
        assert generator_from_json({"kind": "shear", "N": [[0, 1], [-1, 0]]}) == shear_generator([[0, 1], [-1, 0]])
        assert generator_from_json({"kind": "flip", "i": 1}, d=2) == flip_generator(2, 1)
        with pytest.raises(UnsupportedGeneratorError):
            generator_from_json({"kind": "boost"})

    def test_flip_squares_to_identity(self):
        f = flip_generator(3, 1)
        assert f @ f == SODDMatrix.identity(3)


class TestFractionalTransform:
    theta = ThetaMatrix(np.array([[0, 0.3], [-0.3, 0]]))

    def test_identity(self):
        out = fractional_transform(SODDMatrix.identity(2), self.theta)
        assert np.array_equal(out.theta, self.theta.theta)

    def test_shear(self):
        n = np.array([[0, 2], [-2, 0]])
        out = fractional_transform(shear_generator(n), self.theta)
        assert np.allclose(out.theta, self.theta.theta + n, atol=1e-15)

    def test_gl(self):
        a_mat = np.array([[1, 1], [0, 1]])
        out = fractional_transform(gl_generator(a_mat), self.theta)
        assert np.allclose(out.theta, a_mat @ self.theta.theta @ a_mat.T, atol=1e-15)

    def test_single_flip_singular_d2(self):
        with pytest.raises(SingularityError):
            fractional_transform(flip_generator(2, 0), self.theta)

    def test_double_flip_inverts(self):
        out = fractional_transform(flip_generator(2, 0) @ flip_generator(2, 1), self.theta)
        assert np.allclose(out.theta, np.linalg.inv(self.theta.theta), atol=1e-12)

    @given(seeds)
    def test_composition_law(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.choice([2, 4]))
        theta = ThetaMatrix(random_antisymmetric(rng, d))
        word = []
        for _ in range(3):
            kind = rng.integers(0, 3)
            if kind == 0:
                word.append(shear_generator(np.rint(random_antisymmetric(rng, d, 2.4))))
            elif kind == 1:
                m = np.eye(d, dtype=int)
                i, j = rng.choice(d, 2, replace=False)
                m[i, j] = int(rng.integers(-1, 2))
                word.append(gl_generator(m))
            else:
                word.append(flip_generator(d, 0) @ flip_generator(d, 1))
        try:
            step = theta
            for g in reversed(word):
                step = fractional_transform(g, step)
            direct = fractional_transform(word_product(word), theta)
        except SingularityError:
            return
        scale = max(1.0, float(np.max(np.abs(direct.theta))))
        assert np.max(np.abs(step.theta - direct.theta)) < 1e-10 * scale
        assert np.max(np.abs(direct.theta + direct.theta.T)) == 0.0

    def test_dimension(self):
        with pytest.raises(DimensionError):
            fractional_transform(SODDMatrix.identity(3), self.theta)


class TestSpinor:
    def test_identity(self):
        mu = a(2, 0) + G.scalar(2, 3)
        assert spinor_action(SODDMatrix.identity(2), mu) == mu

    def test_shear_example(self):
        out = spinor_action(shear_generator([[0, 1], [-1, 0]]), G.scalar(2))
        assert out == G.scalar(2) + G.monomial(2, [0, 1])

    def test_flip(self):
        f = flip_generator(3, 1)
        assert spinor_action(f, G.scalar(3)) == a(3, 1)
        mu = G.monomial(3, [0, 1]) + G.scalar(3, 2)
        assert spinor_word([f, f], mu) == mu

    def test_gl_is_automorphism(self, rng):
        m = gl_generator([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
        for _ in range(5):
            x, y = random_element(rng, 3), random_element(rng, 3)
            assert spinor_action(m, x * y) == spinor_action(m, x) * spinor_action(m, y)

    def test_word_consistency(self):
        s1 = shear_generator([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
        s2 = shear_generator([[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
        one = G.scalar(4)
        combined = spinor_action(s1 @ s2, one)
        assert spinor_action(s1, spinor_action(s2, one)) == combined
        gl = gl_generator(np.array([[1, 0, 1, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))
        gl_inv = SODDMatrix(np.linalg.inv(gl.entries).round())
        assert spinor_word([gl, s1, gl_inv], one) == spinor_action(gl @ s1 @ gl_inv, one)

    def test_unsupported(self):
        with pytest.raises(UnsupportedGeneratorError):
            spinor_action(flip_generator(2, 0) @ shear_generator([[0, 1], [-1, 0]]), G.scalar(2))

    def test_dimension(self):
        with pytest.raises(DimensionError):
            spinor_action(SODDMatrix.identity(2), G.scalar(3))


class TestDimension:
    def test_examples(self):
        assert theta_vector_dimension([], 2) == 0
        assert theta_vector_dimension([shear_generator([[0, 1], [-1, 0]])]) == 1
        n = np.zeros((4, 4), dtype=int)
        n[0, 1], n[2, 3] = 1, 1
        assert theta_vector_dimension([shear_generator(n - n.T)]) == 1

    def test_sign_kept(self):
        assert theta_vector_dimension([shear_generator([[0, -1], [1, 0]])]) == -1

    def test_pfaffian_oracle_exhaustive_d2(self):
        for x in range(-2, 3):
            n = [[0, x], [-x, 0]]
            assert theta_vector_dimension([shear_generator(n)]) == pfaffian(n) == matching_pfaffian(n) == x

    @given(seeds)
    def test_pfaffian_oracle_d4(self, seed):
        rng = np.random.default_rng(seed)
        upper = np.triu(rng.integers(-2, 3, (4, 4)), 1)
        n = upper - upper.T
        expected = matching_pfaffian(n)
        assert pfaffian(n) == expected
        assert theta_vector_dimension([shear_generator(n)]) == expected
        assert expected**2 == round(np.linalg.det(n))

    def test_pfaffian_d6(self, rng):
        upper = np.triu(rng.integers(-2, 3, (6, 6)), 1)
        n = upper - upper.T
        assert pfaffian(n) == matching_pfaffian(n)

    def test_empty_needs_d(self):
        with pytest.raises(PreconditionError):
            theta_vector_dimension([])


class TestTriples:
    theta = ThetaMatrix(np.array([[0, 0.3], [-0.3, 0]]))
    n1 = shear_generator([[0, 1], [-1, 0]])
    n2 = shear_generator([[0, 2], [-2, 0]])

    def test_identity(self):
        t1 = BimoduleTriple.from_word(self.theta, [self.n1])
        ident = BimoduleTriple.from_word(t1.theta_hat, [])
        out = compose_triples(t1, ident)
        assert out.g == t1.g and np.allclose(out.theta_hat.theta, t1.theta_hat.theta)

    def test_two_shears(self):
        t1 = BimoduleTriple.from_word(self.theta, [self.n1])
        t2 = BimoduleTriple.from_word(t1.theta_hat, [self.n2])
        out = compose_triples(t1, t2)
        assert np.allclose(out.theta_hat.theta, self.theta.theta + [[0, 3], [-3, 0]], atol=1e-15)
        assert out.word == (self.n2, self.n1)
        assert theta_vector_dimension(list(out.word)) == 3

    def test_mismatch(self):
        t1 = BimoduleTriple.from_word(self.theta, [self.n1])
        with pytest.raises(CompositionError):
            compose_triples(t1, BimoduleTriple.from_word(self.theta, [self.n2]))

    def test_inconsistent_triple(self):
        with pytest.raises(PreconditionError):
            BimoduleTriple(self.theta, self.theta, self.n1)
