"""Seeded random instances used by the acceptance suite and the CLI."""

from __future__ import annotations

import numpy as np

from ._poly import Poly
from .nc_algebra import NcElement
from .schwartz_module import PolyGaussianTerm, PolyGaussianVector


def random_siegel(rng: np.random.Generator, g: int, min_eig: float = 0.6) -> np.ndarray:
    re = rng.uniform(-0.5, 0.5, (g, g))
    a = rng.uniform(-0.4, 0.4, (g, g))
    im = a @ a.T + min_eig * np.eye(g)
    return 0.5 * (re + re.T) + 1j * im


def random_antisymmetric(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.uniform(-scale, scale, (d, d))
    return np.triu(a, 1) - np.triu(a, 1).T


def random_theta(rng: np.random.Generator, g: int) -> np.ndarray:
    """Nondegenerate real antisymmetric ``2g x 2g``, a perturbation of the standard one."""
    eye = np.eye(g)
    zero = np.zeros((g, g))
    base = np.block([[zero, eye], [-eye, zero]])
    while True:
        t = base + random_antisymmetric(rng, 2 * g, 0.3)
        if np.linalg.cond(t) < 50:
            return t


def random_poly(rng: np.random.Generator, g: int, degree: int = 2, terms: int = 3) -> Poly:
    coeffs = {(0,) * g: 1.0}
    for _ in range(terms):
        k = [0] * g
        for _ in range(rng.integers(0, degree + 1)):
            k[rng.integers(0, g)] += 1
        coeffs[tuple(k)] = complex(rng.normal(), rng.normal()) * 0.5
    return Poly(g, coeffs)


def random_vector(rng: np.random.Generator, g: int, n_terms: int = 2, degree: int = 2) -> PolyGaussianVector:
    terms = []
    for _ in range(n_terms):
        q = random_siegel(rng, g, min_eig=0.8)
        b = rng.uniform(-0.3, 0.3, g) + 1j * rng.uniform(-0.1, 0.1, g)
        terms.append(PolyGaussianTerm(random_poly(rng, g, degree), q, b))
    return PolyGaussianVector(g, terms)


def random_nc_element(rng: np.random.Generator, d: int, support: int = 10, spread: int = 3) -> NcElement:
    coeffs = {}
    for _ in range(rng.integers(1, support + 1)):
        n = tuple(int(x) for x in rng.integers(-spread, spread + 1, d))
        coeffs[n] = complex(rng.normal(), rng.normal())
    return NcElement(d, coeffs)
