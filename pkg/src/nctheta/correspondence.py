"""Module vectors as sections of a line bundle on the torus ``[0,1)^{2g}``.

Only the standard symplectic ``theta`` is treated, where ``U_a`` (``a < g``)
shifts by ``e_a`` and ``U_{g+a}`` multiplies by ``exp(2 pi i x_a)``.  A vector
``f`` is sent to ``f~(rho, sigma) = sum_k exp(-2 pi i rho.k) f(sigma + k)``.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._lattice import ConcaveLogEnvelope, box_points, choose_radius
from .errors import AliasingError, DimensionError, PreconditionError
from .schwartz_module import PolyGaussianVector, apply_nabla, theta_vector
from .symplectic import as_siegel
from .theta_classical import theta


@dataclass(frozen=True)
class SectionSample:
    rho: tuple
    sigma: tuple
    value: complex


def _vec(x, g: int) -> np.ndarray:
    out = np.atleast_1d(np.asarray(x, dtype=float))
    if out.shape != (g,):
        raise DimensionError(f"expected a real {g}-vector")
    return out


def transform_radius(v: PolyGaussianVector, sigma, tol: float) -> tuple[int, float]:
    """Radius of the ``k`` box and a bound on the omitted part of the lattice sum.

    Each term is dominated by ``A (1 + |x|)^D exp(-pi lam |x|^2 + 2 pi |Im b| |x|)``
    with ``A`` the coefficient l1 norm, and ``|sigma + k| >= |k|_inf - |sigma|_inf``.
    """
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    sigma = _vec(sigma, v.g)
    envelopes = []
    for t in v.terms:
        lam = float(np.linalg.eigvalsh(t.Q.imag)[0])
        if lam <= 0:
            raise PreconditionError("term is not Schwartz class")
        envelopes.append(
            ConcaveLogEnvelope(
                t.poly.abs_coefficient_sum(), t.poly.degree(), lam, float(np.linalg.norm(t.b.imag))
            )
        )
    if not envelopes:
        return 0, 0.0
    return choose_radius(v.g, envelopes, tol, offset=float(np.max(np.abs(sigma))))


def tilde_transform_many(v: PolyGaussianVector, rhos, sigma, tol: float = 1e-12) -> np.ndarray:
    """``f~(rho, sigma)`` for several ``rho`` sharing one ``sigma``."""
    g = v.g
    sigma = _vec(sigma, g)
    rhos = np.atleast_2d(np.asarray(rhos, dtype=float))
    if rhos.shape[1] != g:
        raise DimensionError(f"rho must have length {g}")
    if v.is_zero():
        return np.zeros(rhos.shape[0], dtype=complex)
    radius, _ = transform_radius(v, sigma, tol)
    ks = box_points(g, radius)
    samples = v.evaluate(sigma + ks)
    phases = np.exp(-2j * math.pi * (rhos @ ks.T))
    return phases @ samples


def tilde_transform(v: PolyGaussianVector, rho, sigma, tol: float = 1e-12) -> complex:
    """``sum_k exp(-2 pi i rho.k) v(sigma + k)`` truncated with error at most ``tol``."""
    rho = _vec(rho, v.g)
    return complex(tilde_transform_many(v, rho[None, :], sigma, tol)[0])


def reconstruct(v: PolyGaussianVector, x, grid_n: int, tol: float = 1e-12) -> complex:
    """Recover ``v(x)`` from its transform.

    With ``sigma = frac(x)`` and ``m = floor(x)`` the inverse formula becomes
    ``(1/N^g) sum_j f~(j/N, sigma) exp(2 pi i (j/N).m)``: the ``rho`` integral is
    replaced by the equispaced rule, which is exact up to aliases ``k = m + N l``.
    The rule is rerun on ``2N`` points and disagreement raises
    :class:`AliasingError`.
    """
    g = v.g
    x = _vec(x, g)
    if grid_n < 2:
        raise PreconditionError("grid_n must be at least 2")
    m = np.floor(x)
    sigma = x - m

    def rule(n: int) -> complex:
        axis = np.arange(n) / n
        rhos = np.array(list(itertools.product(axis, repeat=g)))
        vals = tilde_transform_many(v, rhos, sigma, tol)
        return complex(np.sum(vals * np.exp(2j * math.pi * (rhos @ m))) / n**g)

    value = rule(grid_n)
    check = rule(2 * grid_n)
    if abs(value - check) > 1e-10 * max(1.0, abs(check)):
        raise AliasingError(f"grid_n={grid_n} aliases: {abs(value - check):.3e}")
    return value


def complex_coordinates(rho, sigma, omega) -> np.ndarray:
    """``z = Omega sigma - rho``."""
    om = as_siegel(omega)
    return om.omega @ _vec(sigma, om.g) - _vec(rho, om.g)


def uniform_grid(g: int, n: int) -> list:
    """All ``(rho, sigma)`` with coordinates in ``{0, 1/n, ..., (n-1)/n}``."""
    axis = [j / n for j in range(n)]
    out = []
    for pt in itertools.product(axis, repeat=2 * g):
        out.append((np.array(pt[:g]), np.array(pt[g:])))
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NCTHETA_THREADS", "1")))
    except ValueError:
        return 1


def correspondence_records(omega, grid, tol: float = 1e-12) -> list[dict]:
    """Per-point comparison of the transformed theta-vector with the classical series."""
    om = as_siegel(omega)
    vec = theta_vector(om.omega)

    def one(point):
        rho, sigma = (_vec(p, om.g) for p in point)
        lhs = tilde_transform(vec, rho, sigma, tol)
        z = complex_coordinates(rho, sigma, om)
        rhs = np.exp(1j * math.pi * (sigma @ om.omega @ sigma)) * theta(z, om, tol).value
        return {
            "rho": rho.tolist(),
            "sigma": sigma.tolist(),
            "lhs": [lhs.real, lhs.imag],
            "rhs": [float(rhs.real), float(rhs.imag)],
            "residual": float(abs(lhs - rhs)),
        }

    workers = _threads()
    if workers == 1:
        return [one(p) for p in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, grid))


def check_theta_correspondence(omega, grid, tol: float = 1e-12) -> float:
    """Max over the grid of ``|f~(rho, sigma) - e^{pi i sigma.Omega.sigma} theta(z, Omega)|``."""
    return max((r["residual"] for r in correspondence_records(omega, grid, tol)), default=0.0)


def nabla_tilde_intertwining(
    alpha: int, v: PolyGaussianVector, rho, sigma, h: float = 1e-4, tol: float = 1e-13
) -> float:
    """Compare the transform of ``nabla_alpha v`` with the induced operator on sections.

    Multiplication by ``2 pi i x_a`` becomes ``2 pi i sigma_a - d/d rho_a`` and
    ``d/dx_a`` becomes ``d/d sigma_a``; derivatives use central differences.
    """
    if not 1e-6 <= h <= 1e-2:
        raise PreconditionError("h must lie in [1e-6, 1e-2]")
    g = v.g
    if not 0 <= alpha < 2 * g:
        raise DimensionError(f"index {alpha} out of range")
    rho = _vec(rho, g)
    sigma = _vec(sigma, g)
    lhs = tilde_transform(apply_nabla(alpha, v), rho, sigma, tol)
    j = alpha % g
    e = np.eye(g)[j] * h
    if alpha < g:
        d_rho = (tilde_transform(v, rho + e, sigma, tol) - tilde_transform(v, rho - e, sigma, tol)) / (
            2 * h
        )
        rhs = 2j * math.pi * sigma[j] * tilde_transform(v, rho, sigma, tol) - d_rho
    else:
        rhs = (tilde_transform(v, rho, sigma + e, tol) - tilde_transform(v, rho, sigma - e, tol)) / (
            2 * h
        )
    return float(abs(lhs - rhs))
