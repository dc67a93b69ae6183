"""The ten acceptance criteria as callable checks.

Each ``criterion_N(quick, seed)`` returns a :class:`CriterionResult` holding
named residuals with their tolerances; ``run_all`` evaluates every one.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import correspondence as corr
from . import duality as dual
from . import metaplectic as meta
from .errors import PositivityError, SingularityError
from .nc_algebra import NcElement, ThetaMatrix, check_commutation, coefficient_distance, multiply
from .sampling import random_antisymmetric, random_nc_element, random_siegel, random_theta, random_vector
from .schwartz_module import (
    CCRRepresentation,
    PolyGaussianVector,
    apply_weyl,
    curvature_residual,
    holomorphic_operator,
    holomorphic_residual,
    probe_points,
    theta_vector,
)
from .theta_classical import check_periodicity, check_quasi_periodicity, modular_ratio
from ._poly import Poly


@dataclass
class Residual:
    name: str
    value: float
    tol: float
    at_least: bool = False  # differential checks must stay above the threshold

    @property
    def ok(self) -> bool:
        return bool(self.value >= self.tol) if self.at_least else bool(self.value <= self.tol)

    def to_json(self) -> dict:
        out = {"name": self.name, "value": self.value, "tol": self.tol, "pass": self.ok}
        if self.at_least:
            out["bound"] = "lower"
        return out


@dataclass
class CriterionResult:
    number: int
    title: str
    residuals: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.residuals)

    def add(self, name: str, value: float, tol: float, at_least: bool = False):
        self.residuals.append(Residual(name, float(value), tol, at_least))

    def line(self) -> str:
        worst = ", ".join(f"{r.name}={r.value:.2e} ({'>=' if r.at_least else '<='}{r.tol:.0e})" for r in self.residuals if not r.ok)
        status = "PASS" if self.passed else "FAIL"
        detail = worst if worst else f"{len(self.residuals)} residuals within tolerance"
        tail = f" [{self.note}]" if self.note else ""
        return f"[{status}] criterion {self.number:2d} {self.title}: {detail}{tail}"

    def to_json(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "pass": self.passed,
            "residuals": [r.to_json() for r in self.residuals],
            "info": self.info,
            "note": self.note,
        }


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng([seed, salt])


def criterion_1(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(1, "theta periodicity and quasi-periodicity")
    rng = _rng(seed, 1)
    start = time.perf_counter()
    per = quasi = 0.0
    for g in (1, 2):
        for _ in range(20):
            omega = random_siegel(rng, g)
            z = rng.uniform(-1, 1, g) + 1j * rng.uniform(-0.5, 0.5, g)
            m = rng.integers(-2, 3, g)
            if not m.any():
                m[0] = 1
            per = max(per, check_periodicity(z, omega, m))
            quasi = max(quasi, check_quasi_periodicity(z, omega, m))
    elapsed = time.perf_counter() - start
    res.add("periodicity", per, 1e-10)
    res.add("quasi_periodicity", quasi, 1e-10)
    res.add("runtime_s", elapsed, 5.0)
    return res


def modular_words():
    t2 = np.array([[1, 2], [0, 1]])
    tm2 = np.array([[1, -2], [0, 1]])
    s = np.array([[0, -1], [1, 0]])
    minus = -np.eye(2, dtype=int)
    gens = {"T2": t2, "T-2": tm2, "S": s, "-I": minus}
    words = {"T2*S": t2 @ s, "S*T2": s @ t2, "S*S": s @ s, "T-2*S": tm2 @ s, "S*T-2": s @ tm2}
    return gens, words


def criterion_2(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(2, "theta modular law on the theta group")
    gens, words = modular_words()
    samples = [0.0, 0.13, -0.21 + 0.05j, 0.37 - 0.02j, 0.5 + 0.08j]
    const = eighth = 0.0
    zetas = {}
    for name, gamma in {**gens, **words}.items():
        for omega in (1j, 2j, 0.5 + 1j):
            zeta, spread = modular_ratio(gamma, [0.1 + 0.05j], [[omega]], [[s] for s in samples])
            const = max(const, spread)
            eighth = max(eighth, abs(zeta**8 - 1))
            zetas[f"{name}@{omega}"] = [zeta.real, zeta.imag]
    res.add("constancy", const, 1e-8)
    res.add("eighth_root", eighth, 1e-8)
    res.info["zeta"] = zetas
    return res


def criterion_3(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(3, "star product associativity and commutation")
    rng = _rng(seed, 3)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 5))
        theta = ThetaMatrix(random_antisymmetric(rng, d))
        f, g, h = (random_nc_element(rng, d) for _ in range(3))
        lhs = multiply(multiply(f, g, theta), h, theta)
        rhs = multiply(f, multiply(g, h, theta), theta)
        worst = max(worst, coefficient_distance(lhs, rhs))
    res.add("associativity", worst, 1e-12)
    comm = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 5))
        theta = ThetaMatrix(random_antisymmetric(rng, d))
        a, b = rng.choice(d, 2, replace=False)
        comm = max(comm, check_commutation(int(a), int(b), theta))
    res.add("commutation", comm, 1e-15)
    mismatches = 0
    for _ in range(20):
        d = int(rng.integers(1, 5))
        f, g = random_nc_element(rng, d), random_nc_element(rng, d)
        conv: dict = {}
        for n, a in f.coeffs.items():
            for m, b in g.coeffs.items():
                k = tuple(x + y for x, y in zip(n, m))
                conv[k] = conv.get(k, 0) + a * b
        if multiply(f, g, np.zeros((d, d))).coeffs != NcElement(d, conv).coeffs:
            mismatches += 1
    res.add("theta0_convolution_mismatches", mismatches, 0)
    return res


def criterion_4(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(4, "constant curvature and generator commutators")
    rng = _rng(seed, 4)
    curv = comm = 0.0
    for k in range(20):
        g = 1 + k % 2
        v = random_vector(rng, g)
        for theta in (ThetaMatrix.standard(g).theta, random_theta(rng, g)):
            curv = max(curv, curvature_residual(theta, v))
    for g in (1, 2):
        v = random_vector(rng, g)
        pts = probe_points(g)
        for theta in (ThetaMatrix.standard(g).theta, random_theta(rng, g)):
            rep = CCRRepresentation(theta)
            for a in range(2 * g):
                for b in range(2 * g):
                    u = rep.generator(b)
                    lhs = rep.apply_nabla(a, apply_weyl(u, v)) - apply_weyl(u, rep.apply_nabla(a, v))
                    expected = apply_weyl(u, v).scale(2j * math.pi * (a == b))
                    comm = max(comm, float(np.max(np.abs(lhs.evaluate(pts) - expected.evaluate(pts)))))
    res.add("curvature", curv, 1e-11)
    res.add("nabla_U_commutator", comm, 1e-11)
    return res


def holomorphic_kernel_dimension(omega, degree: int = 2) -> tuple[int, np.ndarray]:
    """Nullity of the holomorphicity operator on ``{p(x) theta_Omega : deg p <= degree}``."""
    om = np.atleast_2d(np.asarray(omega, dtype=complex))
    g = om.shape[0]
    monomials = [k for k in itertools.product(range(degree + 1), repeat=g) if sum(k) <= degree]
    pts = probe_points(g, n=4 * len(monomials))
    columns = []
    for k in monomials:
        v = PolyGaussianVector.gaussian(om, poly=Poly(g, {k: 1.0}))
        col = np.concatenate([holomorphic_operator(om, a, v).evaluate(pts) for a in range(g)])
        columns.append(col)
    mat = np.stack(columns, axis=1)
    sv = np.linalg.svd(mat, compute_uv=False)
    rank = int(np.sum(sv > 1e-9 * sv[0]))
    _, _, vh = np.linalg.svd(mat)
    return len(monomials) - rank, vh[-1].conj()


def criterion_5(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(5, "theta-vector existence and uniqueness")
    rng = _rng(seed, 5)
    holo = 0.0
    omegas = [random_siegel(rng, 1 + k % 2) for k in range(10)]
    for om in omegas:
        holo = max(holo, holomorphic_residual(om, theta_vector(om)))
    res.add("holomorphic_residual", holo, 1e-12)
    bad = [[[-1j]], [[0.5]], [[1j, 0], [0, -1j]], [[2 + 0j, 0.3], [0.3, 1j]], [[0.1j, 1j], [1j, 0.1j]]]
    accepted = 0
    for om in bad:
        try:
            theta_vector(om)
            accepted += 1
        except PositivityError:
            pass
    res.add("nonpositive_accepted", accepted, 0)
    wrong_dim = 0
    not_constant = 0.0
    for om in omegas[:4]:
        dim, null = holomorphic_kernel_dimension(om)
        wrong_dim += dim != 1
        not_constant = max(not_constant, float(np.linalg.norm(null[1:]) / abs(null[0])))
    res.add("kernel_dimension_mismatches", wrong_dim, 0)
    res.add("kernel_nonconstant_part", not_constant, 1e-9)
    return res


def criterion_6(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(6, "vectors as line-bundle sections")
    rng = _rng(seed, 6)
    worst1 = max(corr.check_theta_correspondence([[om]], corr.uniform_grid(1, 8)) for om in (1j, 0.5 + 1j))
    res.add("theta_correspondence_g1", worst1, 1e-9)
    om2 = [[1j, 0.3], [0.3, 2j]]
    res.add("theta_correspondence_g2", corr.check_theta_correspondence(om2, corr.uniform_grid(2, 4)), 1e-8)
    laws = 0.0
    for v in (theta_vector([[0.5 + 1j]]), random_vector(rng, 1)):
        for _ in range(10):
            rho, sigma = rng.uniform(0, 1, 1), rng.uniform(0, 1, 1)
            e = np.array([float(rng.integers(-2, 3))])
            base = corr.tilde_transform(v, rho, sigma, 1e-15)
            laws = max(laws, abs(corr.tilde_transform(v, rho + e, sigma, 1e-15) - base))
            shifted = corr.tilde_transform(v, rho, sigma + e, 1e-15)
            laws = max(laws, abs(shifted - np.exp(2j * math.pi * (rho @ e)) * base))
    res.add("section_laws", laws, 1e-12)
    v = theta_vector([[1j]])
    xs = np.concatenate([[0.3], rng.uniform(-2, 2, 9)])
    rt = max(abs(corr.reconstruct(v, [x], 16) - v.evaluate([[x]])[0]) for x in xs)
    res.add("roundtrip", rt, 1e-8)
    inter = 0.0
    ratios = []
    for alpha in (0, 1):
        inter = max(inter, corr.nabla_tilde_intertwining(alpha, v, [0.3], [0.2], 1e-4))
        coarse = corr.nabla_tilde_intertwining(alpha, v, [0.3], [0.2], 1e-2)
        fine = corr.nabla_tilde_intertwining(alpha, v, [0.3], [0.2], 5e-3)
        ratios.append(coarse / fine)
    res.add("intertwining_h1e-4", inter, 1e-6)
    res.add("convergence_order_deviation", max(abs(r - 4.0) for r in ratios), 0.5)
    res.info["halving_ratios"] = ratios
    return res


def covariance_generators() -> list:
    g = meta.MetaplecticGenerator
    return [
        g.linear([[-1]]),
        g.shear([[1]]),
        g.shear([[-1]]),
        g.shear([[2]]),
        g.shear([[-2]]),
        g.fourier(1),
    ]


def criterion_7(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(7, "metaplectic covariance of theta-vectors")
    gens = covariance_generators()
    max_len = 2 if quick else 3
    worst = 0.0
    count = 0
    for length in range(1, max_len + 1):
        for word in itertools.product(gens, repeat=length):
            for om in (1j, 2j, 0.5 + 1j):
                worst = max(worst, meta.check_theta_covariance(list(word), [[om]]))
                count += 1
    res.add("ray_residual", worst, 1e-9)
    res.info["checks"] = count
    return res


def criterion_8(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(8, "c_alpha phases and the theta-group criterion")
    rng = _rng(seed, 8)
    scans = [meta.gamma12_criterion_scan(1, 4), meta.gamma12_criterion_scan(2, 2 if quick else 3)]
    res.add("scan_counterexamples", sum(len(s["counterexamples"]) for s in scans), 0)
    res.info["scans"] = [{k: v for k, v in s.items() if k != "counterexamples"} for s in scans]
    transformed = 0.0
    v1 = theta_vector([[1j]])
    gammas1 = [np.eye(2, dtype=int), [[0, -1], [1, 0]], [[1, 1], [0, 1]], [[1, 2], [0, 1]], [[2, 1], [1, 1]]]
    for gm in gammas1:
        for theta in (ThetaMatrix.standard(1).theta, random_theta(rng, 1)):
            transformed = max(transformed, meta.check_transformed_generators(gm, theta, v1))
    v2 = theta_vector([[1j, 0.2], [0.2, 1.5j]])
    gen2 = meta.theta_group_generators(2) + meta.odd_shear_probes(2)
    for _ in range(4):
        word = [gen2[i] for i in rng.integers(0, len(gen2), 3)]
        gm = meta.word_gamma(word)
        for theta in (ThetaMatrix.standard(2).theta, random_theta(rng, 2)):
            transformed = max(transformed, meta.check_transformed_generators(gm, theta, v2))
    res.add("transformed_generators", transformed, 1e-11)
    without = meta.check_transformed_generators([[1, 1], [0, 1]], ThetaMatrix.standard(1), v1, include_phase=False)
    res.add("residual_without_phase", without, 1e-3, at_least=True)
    commute = max(
        meta.generators_commute_residual(ThetaMatrix.standard(g), random_vector(rng, g)) for g in (1, 2)
    )
    res.add("integer_theta_commuting", commute, 1e-11)
    bch = 0.0
    for n in range(1, 5):
        for g in (1, 2):
            ks = [rng.integers(-2, 3, 2 * g) for _ in range(n)]
            bch = max(bch, meta.bch_phase_check(ks))
    bch = max(bch, meta.bch_phase_check([[1, 0], [0, 1]]))
    res.add("bch", bch, 1e-11)
    return res


def random_sodd_word(rng: np.random.Generator, d: int, length: int) -> list:
    word = []
    unimodular = [np.array([[1, 1], [0, 1]]), np.array([[0, 1], [1, 0]]), np.array([[1, 0], [-1, 1]])]
    for _ in range(length):
        kind = rng.integers(0, 3)
        if kind == 0:
            a = np.eye(d, dtype=int)
            i = int(rng.integers(0, d - 1))
            a[i : i + 2, i : i + 2] = unimodular[rng.integers(0, 3)]
            word.append(dual.gl_generator(a))
        elif kind == 1:
            n = rng.integers(-1, 2, (d, d))
            word.append(dual.shear_generator(np.triu(n, 1) - np.triu(n, 1).T))
        else:
            word.append(dual.flip_generator(d, int(rng.integers(0, d))))
    return word


def criterion_9(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(9, "duality action, Grassmann algebra, Pfaffian")
    rng = _rng(seed, 9)
    worst = 0.0
    defined = 0
    attempts = 0
    while defined < 50 and attempts < 2000:
        attempts += 1
        d = int(rng.choice([2, 4]))
        word = random_sodd_word(rng, d, int(rng.integers(2, 5)))
        cut = int(rng.integers(1, len(word)))
        g_outer, g_inner = dual.word_product(word[:cut]), dual.word_product(word[cut:])
        theta = random_antisymmetric(rng, d)
        try:
            direct = dual.fractional_transform(g_outer @ g_inner, theta)
            staged = dual.fractional_transform(g_outer, dual.fractional_transform(g_inner, theta))
        except SingularityError:
            continue
        defined += 1
        scale = max(1.0, float(np.max(np.abs(direct.theta))))
        worst = max(worst, float(np.max(np.abs(direct.theta - staged.theta))) / scale)
    res.add("composition_law", worst, 1e-10)
    res.add("defined_words_missing", 50 - defined, 0)
    violations = 0
    G = dual.GrassmannElement
    for _ in range(30):
        d = 4
        a, b, c = (
            G(d, {int(m): int(x) for m, x in zip(rng.integers(0, 16, 5), rng.integers(-3, 4, 5))})
            for _ in range(3)
        )
        violations += (a * b) * c != a * (b * c)
    for i in range(4):
        ai = G.generator(4, i)
        violations += ai * ai != G(4)
        for j in range(4):
            aj = G.generator(4, j)
            violations += ai * aj != (aj * ai).scale(-1)
    res.add("grassmann_axiom_violations", violations, 0)
    mismatch = 0
    cases = 0
    for d in (2, 4):
        iu = np.triu_indices(d, 1)
        for entries in itertools.product(range(-2, 3), repeat=len(iu[0])):
            if quick and d == 4 and cases % 7:
                cases += 1
                continue
            n = np.zeros((d, d), dtype=int)
            n[iu] = entries
            n = n - n.T
            mismatch += dual.theta_vector_dimension([dual.shear_generator(n)]) != dual.pfaffian(n)
            cases += 1
    res.add("pfaffian_mismatches", mismatch, 0)
    res.info["pfaffian_cases"] = cases
    return res


def criterion_10(quick: bool = False, seed: int = 0) -> CriterionResult:
    res = CriterionResult(10, "dimension of the theta-vector space")
    samples = {
        "identity d=2": [dual.SODDMatrix.identity(2)],
        "shear N12=1 d=2": [dual.shear_generator([[0, 1], [-1, 0]])],
        "shear N12=N34=1 d=4": [
            dual.shear_generator([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
        ],
    }
    expected = {"identity d=2": 0, "shear N12=1 d=2": 1, "shear N12=N34=1 d=4": 1}
    values = {name: dual.theta_vector_dimension(word) for name, word in samples.items()}
    res.add("N_bookkeeping_mismatches", sum(values[k] != expected[k] for k in values), 0)
    res.info["N"] = values
    res.info["dimension_claim"] = "unverified"
    res.note = "dim H = N recorded as UNVERIFIED: no explicit bimodule construction"
    return res


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
]


def run_all(quick: bool = False, seed: int = 0) -> list[CriterionResult]:
    return [c(quick=quick, seed=seed) for c in CRITERIA]
