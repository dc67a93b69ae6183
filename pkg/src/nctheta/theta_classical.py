"""The classical Riemann theta series with a certified truncation bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._lattice import ConcaveLogEnvelope, box_sum, choose_radius
from .errors import DimensionError, DomainError, NearZeroError, PositivityError, PreconditionError
from .symplectic import SiegelPoint, SymplecticIntMatrix, as_siegel, is_in_gamma12, mobius_action

MAX_GENUS = 4


@dataclass(frozen=True, eq=False)
class ThetaQuery:
    z: np.ndarray
    omega: SiegelPoint
    tol: float = 1e-12

    def __post_init__(self):
        omega = as_siegel(self.omega)
        z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        if z.shape != (omega.g,):
            raise DimensionError(f"z must have length {omega.g}")
        if not 0 < self.tol <= 1e-2:
            raise PreconditionError("tol must lie in (0, 1e-2]")
        if omega.g > MAX_GENUS:
            raise PreconditionError(f"genus above {MAX_GENUS} is not supported")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "z", z)

    @property
    def g(self) -> int:
        return self.omega.g


@dataclass(frozen=True)
class ThetaResult:
    value: complex
    radius: int
    tail_bound: float

    def to_json(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "radius": self.radius,
            "tail_bound": self.tail_bound,
        }


def truncation_radius(z, omega, tol: float) -> tuple[int, float]:
    """Radius ``R`` of the sup-norm box and the bound on the omitted terms."""
    omega = as_siegel(omega)
    lam = omega.min_imag_eigenvalue()
    if lam <= 0:
        raise PositivityError("imaginary part of omega is not positive definite")
    s = float(np.linalg.norm(np.imag(np.atleast_1d(z))))
    envelope = ConcaveLogEnvelope(1.0, 0, lam, s)
    return choose_radius(omega.g, [envelope], tol)


def theta_sum(z, omega: np.ndarray, radius: int) -> complex:
    """Plain lattice sum over ``|n|_inf <= radius`` (no error control)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    g = z.shape[0]

    def summand(n):
        quad = np.einsum("ki,ij,kj->k", n, omega, n)
        return np.exp(1j * math.pi * quad + 2j * math.pi * (n @ z))

    return box_sum(g, radius, summand)


def theta(z, omega, tol: float = 1e-12) -> ThetaResult:
    """Evaluate ``sum_n exp(pi i n.Omega.n + 2 pi i n.z)``.

    The box radius is the smallest one whose rigorous Gaussian tail bound
    (from the smallest eigenvalue of Im Omega and |Im z|) is below ``tol``.
    """
    q = ThetaQuery(z, omega, tol)
    radius, bound = truncation_radius(q.z, q.omega, q.tol)
    value = theta_sum(q.z, q.omega.omega, radius)
    return ThetaResult(value, radius, bound)


def _relative_tol(reference: float, tol: float) -> float:
    return min(1e-2, max(tol * reference, 1e-300))


def check_periodicity(z, omega, m, tol: float = 1e-13) -> float:
    """``|theta(z + m) - theta(z)|`` for an integer vector ``m``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    if not np.any(m):
        return 0.0
    base = theta(z, omega, tol).value
    shifted = theta(z + m, omega, tol).value
    return float(abs(shifted - base))


def check_quasi_periodicity(z, omega, m, tol: float = 1e-14) -> float:
    """Residual of ``theta(z + Omega m) = e^{-pi i m.Omega.m - 2 pi i m.z} theta(z)``.

    The exponential factor is divided out of the left side before comparing,
    and the difference is normalized by ``|theta(z)|``; the factor can reach
    ``1e10`` for moderate ``m``, which would otherwise swamp the comparison
    with rounding noise.  Raises :class:`NearZeroError` (carrying the
    unnormalized residual) when ``|theta(z)| < 1e-14``.
    """
    omega = as_siegel(omega)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    if not np.any(m):
        return 0.0
    base = theta(z, omega, tol).value
    om = omega.omega @ m
    factor = np.exp(-1j * math.pi * (m @ om) - 2j * math.pi * (m @ z))
    expected = factor * base
    shifted = theta(z + om, omega, _relative_tol(max(abs(expected), 1.0), tol)).value
    residual = abs(shifted / factor - base)
    if abs(base) < 1e-14:
        raise NearZeroError("theta(z, Omega) is numerically zero", unnormalized=float(residual))
    return float(residual / abs(base))


def modular_ratio(gamma, z, omega, samples, tol: float = 1e-13) -> tuple[complex, float]:
    """Estimate the eighth root of unity in the theta transformation law.

    For each offset ``z + s`` the ratio
    ``theta((C Omega + D)^{-T} z, gamma Omega) /
    [det(C Omega + D)^{1/2} exp(pi i z.(C Omega + D)^{-1} C z) theta(z, Omega)]``
    is formed with the principal square root.  Returns the mean ratio and the
    largest deviation from it.
    """
    if not isinstance(gamma, SymplecticIntMatrix):
        gamma = SymplecticIntMatrix(gamma)
    if not is_in_gamma12(gamma):
        raise DomainError("gamma is not in the theta group")
    omega = as_siegel(omega)
    a, b, c, d = gamma.blocks
    cd = c @ omega.omega + d
    cd_inv = np.linalg.inv(cd)
    sqrt_det = np.sqrt(complex(np.linalg.det(cd)))
    image = mobius_action(gamma, omega)
    z0 = np.atleast_1d(np.asarray(z, dtype=complex))
    ratios = []
    for offset in samples:
        zz = z0 + np.atleast_1d(np.asarray(offset, dtype=complex))
        base = theta(zz, omega, tol).value
        if abs(base) < 1e-10:
            raise NearZeroError("theta vanishes at a sample point")
        prefactor = sqrt_det * np.exp(1j * math.pi * (zz @ cd_inv @ c @ zz))
        denom = prefactor * base
        if abs(denom) < 1e-300:
            raise NearZeroError("zero denominator in the modular ratio")
        moved = np.linalg.solve(cd.T, zz)
        num = theta(moved, image, _relative_tol(max(abs(denom), 1.0), tol)).value
        ratios.append(num / denom)
    ratios = np.array(ratios)
    zeta = complex(np.mean(ratios))
    return zeta, float(np.max(np.abs(ratios - zeta)))
