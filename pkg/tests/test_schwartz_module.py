import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from nctheta._poly import Poly
from nctheta.errors import BudgetError, DimensionError, PositivityError, SingularityError
from nctheta.nc_algebra import NcElement, ThetaMatrix, derivation, multiply
from nctheta.sampling import random_theta, random_vector
from nctheta.schwartz_module import (
    CCRRepresentation,
    PolyGaussianTerm,
    PolyGaussianVector,
    WeylOperator,
    apply_nabla,
    apply_weyl,
    curvature_residual,
    gaussian_integral,
    generator_U,
    holomorphic_residual,
    inner_product,
    module_action,
    probe_points,
    quadrature_norm,
    theta_vector,
)

seeds = st.integers(0, 2**31)


def gauss():
    return theta_vector([[1j]])


def pointwise(a, b, pts):
    return float(np.max(np.abs(a.evaluate(pts) - b.evaluate(pts))))


class TestTerms:
    def test_rejects_non_schwartz(self):
        with pytest.raises(PositivityError):
            PolyGaussianVector.gaussian([[1.0]])

    def test_rejects_asymmetric(self):
        from nctheta.errors import PreconditionError

        with pytest.raises(PreconditionError):
            PolyGaussianVector.gaussian([[1j, 0.2], [0.0, 1j]])

    def test_dimension_checks(self):
        with pytest.raises(DimensionError):
            PolyGaussianTerm(Poly.constant(2), np.array([[1j]]), np.zeros(1))

    def test_json_roundtrip(self, rng):
        v = random_vector(rng, 2)
        w = PolyGaussianVector.from_json(v.to_json())
        pts = probe_points(2)
        assert pointwise(v, w, pts) == 0.0

    def test_json_layout(self):
        data = gauss().to_json()
        assert data == {"g": 1, "terms": [{"poly": [{"k": [0], "c": [1.0, 0.0]}], "Q": [[[0.0, 1.0]]], "b": [[0.0, 0.0]]}]}

    def test_canonical_order(self, rng):
        v = random_vector(rng, 1, n_terms=3)
        w = PolyGaussianVector(1, tuple(reversed(v.terms)))
        assert v.to_json() == w.to_json()


class TestNabla:
    def test_derivative_sector(self):
        q = np.array([[0.3 + 1.1j]])
        v = PolyGaussianVector.gaussian(q)
        out = apply_nabla(1, v)
        pts = probe_points(1)
        expected = 2j * math.pi * q[0, 0] * pts[:, 0] * v.evaluate(pts)
        assert np.allclose(out.evaluate(pts), expected, atol=1e-13)

    def test_multiplication_sector(self):
        v = gauss()
        pts = probe_points(1)
        assert np.allclose(apply_nabla(0, v).evaluate(pts), 2j * math.pi * pts[:, 0] * v.evaluate(pts))

    def test_commutator_g1(self, rng):
        v = random_vector(rng, 1)
        comm = apply_nabla(0, apply_nabla(1, v)) - apply_nabla(1, apply_nabla(0, v))
        # the derivative / multiplication order gives -2 pi i
        assert (comm - v.scale(-2j * math.pi)).norm() < 1e-12

    def test_derivative_oracle(self, rng):
        v = random_vector(rng, 2)
        pts = probe_points(2)
        h = 1e-5
        for j in range(2):
            e = np.eye(2)[j] * h
            fd = (v.evaluate(pts + e) - v.evaluate(pts - e)) / (2 * h)
            assert np.max(np.abs(apply_nabla(2 + j, v).evaluate(pts) - fd)) < 1e-6

    def test_index_range(self):
        with pytest.raises(DimensionError):
            apply_nabla(2, gauss())

    def test_budget(self):
        v = PolyGaussianVector.gaussian([[1j]], poly=Poly(1, {(64,): 1}))
        with pytest.raises(BudgetError):
            apply_nabla(0, v)


class TestWeyl:
    def test_identity(self, rng):
        v = random_vector(rng, 1)
        assert pointwise(apply_weyl(WeylOperator.identity(1), v), v, probe_points(1)) == 0.0

    def test_pure_shift(self):
        w = apply_weyl(WeylOperator([1.0], [0.0]), gauss())
        term = w.terms[0]
        assert abs(term.b[0] - (-1j)) < 1e-15
        assert abs(term.poly.coeffs[(0,)] - math.exp(-math.pi)) < 1e-15
        xs = np.array([[0.0], [0.5], [1.0]])
        assert np.allclose(w.evaluate(xs), np.exp(-math.pi * (xs[:, 0] - 1) ** 2), atol=1e-15)

    @given(seeds)
    def test_composition(self, seed):
        rng = np.random.default_rng(seed)
        g = int(rng.integers(1, 3))
        v = random_vector(rng, g)
        w1 = WeylOperator(rng.normal(size=g), rng.normal(size=g), np.exp(1j * rng.normal()))
        w2 = WeylOperator(rng.normal(size=g), rng.normal(size=g), 0.5)
        pts = probe_points(g)
        assert pointwise(apply_weyl(w1 @ w2, v), apply_weyl(w1, apply_weyl(w2, v)), pts) < 1e-12

    @given(seeds)
    def test_numeric_oracle(self, seed):
        rng = np.random.default_rng(seed)
        v = random_vector(rng, 2)
        w = WeylOperator(rng.normal(size=2), rng.normal(size=2), 1j)
        pts = probe_points(2)
        direct = w.evaluate_on(v.evaluate, pts)
        assert np.max(np.abs(apply_weyl(w, v).evaluate(pts) - direct)) < 1e-12

    def test_numeric_action_needs_real_shift(self):
        from nctheta.errors import PreconditionError

        with pytest.raises(PreconditionError):
            WeylOperator([0.5j], [0.0]).evaluate_on(gauss().evaluate, probe_points(1))


class TestGenerators:
    def test_standard_shift_and_modulation(self):
        th = ThetaMatrix.standard(1)
        u0, u1 = generator_U(0, th), generator_U(1, th)
        assert np.allclose(u0.shift, [1]) and np.allclose(u0.modulation, [0]) and u0.phase == 1
        assert np.allclose(u1.shift, [0]) and np.allclose(u1.modulation, [1]) and u1.phase == 1

    @pytest.mark.parametrize("g", [1, 2])
    def test_nabla_u_commutator(self, g, rng):
        v = random_vector(rng, g)
        pts = probe_points(g)
        for theta in (ThetaMatrix.standard(g).theta, random_theta(rng, g)):
            rep = CCRRepresentation(theta)
            for a in range(2 * g):
                for b in range(2 * g):
                    u = rep.generator(b)
                    lhs = rep.apply_nabla(a, apply_weyl(u, v)) - apply_weyl(u, rep.apply_nabla(a, v))
                    rhs = apply_weyl(u, v).scale(2j * math.pi * (a == b))
                    assert pointwise(lhs, rhs, pts) < 1e-11

    def test_wrong_size(self):
        with pytest.raises(DimensionError):
            generator_U(0, np.zeros((3, 3)))

    def test_singular_theta(self):
        with pytest.raises(SingularityError):
            CCRRepresentation(np.zeros((2, 2)))


class TestModuleAction:
    theta = np.array([[0, 0.37, 0.1, -0.2], [-0.37, 0, 0.25, 0.05], [-0.1, -0.25, 0, 0.6], [0.2, -0.05, -0.6, 0]])

    def test_unit(self, rng):
        v = random_vector(rng, 2)
        out = module_action(NcElement.unit(4), v, self.theta)
        assert pointwise(out, v, probe_points(2)) < 1e-14

    @given(seeds)
    def test_right_module_law(self, seed):
        rng = np.random.default_rng(seed)
        v = random_vector(rng, 2, n_terms=1)
        f = NcElement(4, {tuple(rng.integers(-1, 2, 4)): 1.0, (0, 0, 0, 0): 0.5j})
        h = NcElement(4, {tuple(rng.integers(-1, 2, 4)): 2.0})
        sequential = module_action(h, module_action(f, v, self.theta), self.theta)
        combined = module_action(multiply(f, h, self.theta), v, self.theta)
        assert pointwise(sequential, combined, probe_points(2)) < 1e-12

    def test_generator_product(self, rng):
        v = random_vector(rng, 2)
        e1, e2 = NcElement.generator(4, 0), NcElement.generator(4, 1)
        rep = CCRRepresentation(self.theta)
        combined = module_action(multiply(e1, e2, self.theta), v, self.theta)
        sequential = apply_weyl(rep.generator(1), apply_weyl(rep.generator(0), v))
        assert pointwise(combined, sequential, probe_points(2)) < 1e-12

    @given(seeds)
    def test_leibniz(self, seed):
        rng = np.random.default_rng(seed)
        v = random_vector(rng, 2, n_terms=1)
        f = NcElement(4, {tuple(rng.integers(-1, 2, 4)): 1.0, tuple(rng.integers(-1, 2, 4)): -0.5})
        rep = CCRRepresentation(self.theta)
        pts = probe_points(2)
        for a in range(4):
            lhs = rep.apply_nabla(a, module_action(f, v, self.theta))
            rhs = module_action(f, rep.apply_nabla(a, v), self.theta) + module_action(derivation(a, f), v, self.theta)
            assert pointwise(lhs, rhs, pts) < 1e-11

    def test_dimension(self):
        with pytest.raises(DimensionError):
            module_action(NcElement.unit(2), random_vector(np.random.default_rng(0), 2), self.theta)


class TestCurvature:
    def test_standard(self, rng):
        for g in (1, 2):
            assert curvature_residual(ThetaMatrix.standard(g), random_vector(rng, g)) < 1e-12

    @given(seeds)
    def test_darboux(self, seed):
        rng = np.random.default_rng(seed)
        assert curvature_residual(random_theta(rng, 2), random_vector(rng, 2)) < 1e-11


class TestThetaVector:
    def test_examples(self):
        v = gauss()
        pts = probe_points(1)
        assert np.allclose(v.evaluate(pts), np.exp(-math.pi * pts[:, 0] ** 2))
        with pytest.raises(PositivityError):
            theta_vector([[-1j]])
        v2 = theta_vector(1j * np.eye(2))
        p2 = probe_points(2)
        assert np.allclose(v2.evaluate(p2), np.exp(-math.pi * np.sum(p2**2, axis=1)))

    def test_holomorphic(self):
        for om in ([[1j]], [[0.5 + 2j]], [[1j, 0.3], [0.3, 2j]]):
            assert holomorphic_residual(om, theta_vector(om)) < 1e-12

    def test_wrong_gaussian(self):
        assert holomorphic_residual([[1j]], theta_vector([[2j]])) > 0.1

    def test_not_unique_with_polynomial(self):
        v = PolyGaussianVector.gaussian([[1j]], poly=Poly.variable(1, 0))
        assert holomorphic_residual([[1j]], v) > 0.1


class TestInnerProduct:
    def test_gaussian(self):
        assert abs(inner_product(gauss(), gauss()) - 2**-0.5) < 1e-15
        val, _ = integrate.quad(lambda x: math.exp(-2 * math.pi * x * x), -np.inf, np.inf)
        assert abs(val - 2**-0.5) < 1e-12

    def test_odd(self):
        odd = PolyGaussianVector.gaussian([[1j]], poly=Poly.variable(1, 0))
        assert abs(inner_product(odd, gauss())) < 1e-16

    @given(seeds)
    def test_quadrature_oracle(self, seed):
        rng = np.random.default_rng(seed)
        v, w = random_vector(rng, 1), random_vector(rng, 1)

        def part(fn):
            return integrate.quad(fn, -12, 12, limit=400, epsabs=1e-13)[0]

        re = part(lambda x: (np.conj(v.evaluate([[x]])[0]) * w.evaluate([[x]])[0]).real)
        im = part(lambda x: (np.conj(v.evaluate([[x]])[0]) * w.evaluate([[x]])[0]).imag)
        assert abs(inner_product(v, w) - complex(re, im)) < 1e-10

    @given(seeds)
    def test_hermitian_positive(self, seed):
        rng = np.random.default_rng(seed)
        g = int(rng.integers(1, 3))
        v, w = random_vector(rng, g), random_vector(rng, g)
        assert abs(inner_product(v, w) - np.conj(inner_product(w, v))) < 1e-12
        vv = inner_product(v, v)
        assert vv.real > 0 and abs(vv.imag) < 1e-12

    def test_quadrature_norm_agrees(self, rng):
        for g in (1, 2):
            v = random_vector(rng, g)
            assert abs(quadrature_norm(v) - v.norm()) < 1e-9

    def test_gaussian_integral_moments(self):
        # int x^2 e^{-pi x^2} = 1/(2 pi)
        assert abs(gaussian_integral(Poly(1, {(2,): 1}), [[1j]], [0]) - 1 / (2 * math.pi)) < 1e-15

    def test_dimension(self):
        with pytest.raises(DimensionError):
            inner_product(gauss(), theta_vector(1j * np.eye(2)))
