"""Integer symplectic group, Siegel upper half-space and Lagrangian subspaces.

Conventions: the standard symplectic form is ``J = [[0, I], [-I, 0]]`` and a
matrix ``M`` is symplectic when ``M.T @ J @ M == J``.  Block views of a
``2g x 2g`` matrix are ``A, B, C, D`` (row-major quadrants).  Index subsets
are 0-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneracyError,
    DimensionError,
    PositivityError,
    PreconditionError,
    SingularityError,
)

SYMMETRY_TOL = 1e-12
SUBSPACE_TOL = 1e-10
COND_LIMIT = 1e12


def standard_form(g: int, dtype=np.int64) -> np.ndarray:
    """Return ``J = [[0, I], [-I, 0]]`` of size ``2g``."""
    eye = np.eye(g, dtype=dtype)
    zero = np.zeros((g, g), dtype=dtype)
    return np.block([[zero, eye], [-eye, zero]])


def blocks(m: np.ndarray):
    """Split a ``2g x 2g`` matrix into its ``(A, B, C, D)`` quadrants."""
    m = np.asarray(m)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n or n % 2:
        raise DimensionError(f"expected an even square matrix, got shape {m.shape}")
    g = n // 2
    return m[:g, :g], m[:g, g:], m[g:, :g], m[g:, g:]


def from_blocks(a, b, c, d) -> np.ndarray:
    return np.block([[np.asarray(a), np.asarray(b)], [np.asarray(c), np.asarray(d)]])


def _as_int_matrix(m) -> np.ndarray:
    arr = np.asarray(m)
    if arr.dtype.kind not in "iu":
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise PreconditionError("matrix must have integer entries")
        arr = rounded
    return arr.astype(np.int64)


def is_symplectic(m) -> bool:
    """Exact integer test of ``M.T J M == J``."""
    m = _as_int_matrix(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise DimensionError(f"expected an even square matrix, got shape {m.shape}")
    j = standard_form(m.shape[0] // 2)
    return bool(np.array_equal(m.T @ j @ m, j))


def symplectic_inverse(m) -> np.ndarray:
    """Inverse of an integer symplectic matrix, ``J^{-1} M^T J``."""
    m = _as_int_matrix(m)
    j = standard_form(m.shape[0] // 2)
    return -j @ m.T @ j


@dataclass(frozen=True, eq=False)
class SymplecticIntMatrix:
    """Element of Sp(2g, Z)."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_int_matrix(self.entries)
        if not is_symplectic(m):
            raise PreconditionError("matrix is not symplectic")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def g(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def blocks(self):
        return blocks(self.entries)

    def __matmul__(self, other: "SymplecticIntMatrix") -> "SymplecticIntMatrix":
        return SymplecticIntMatrix(self.entries @ other.entries)

    def inverse(self) -> "SymplecticIntMatrix":
        return SymplecticIntMatrix(symplectic_inverse(self.entries))

    def __eq__(self, other):
        return isinstance(other, SymplecticIntMatrix) and np.array_equal(
            self.entries, other.entries
        )

    def __hash__(self):
        return hash(self.entries.tobytes())


def _check_symmetric(omega: np.ndarray, tol: float = SYMMETRY_TOL):
    if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {omega.shape}")
    if np.max(np.abs(omega - omega.T), initial=0.0) > tol:
        raise PreconditionError("matrix is not symmetric")


def _is_positive_definite(sym: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        return False
    return True


def is_positive_lagrangian(omega) -> bool:
    """True iff the symmetric complex matrix has positive-definite imaginary part."""
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    _check_symmetric(omega)
    im = omega.imag
    return _is_positive_definite(0.5 * (im + im.T))


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    """A point of the Siegel upper half-space."""

    omega: np.ndarray

    def __post_init__(self):
        omega = np.atleast_2d(np.array(self.omega, dtype=complex))
        _check_symmetric(omega)
        if not is_positive_lagrangian(omega):
            raise PositivityError("imaginary part of omega is not positive definite")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)

    @property
    def g(self) -> int:
        return self.omega.shape[0]

    def min_imag_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.omega.imag)[0])


def as_siegel(omega) -> SiegelPoint:
    return omega if isinstance(omega, SiegelPoint) else SiegelPoint(omega)


def mobius_action(gamma, omega) -> SiegelPoint:
    """``(A Omega + B)(C Omega + D)^{-1}``."""
    if not isinstance(gamma, SymplecticIntMatrix):
        gamma = SymplecticIntMatrix(gamma)
    omega = as_siegel(omega)
    if gamma.g != omega.g:
        raise DimensionError("gamma and omega have different genus")
    a, b, c, d = gamma.blocks
    num = a @ omega.omega + b
    den = c @ omega.omega + d
    if np.linalg.cond(den) > COND_LIMIT:
        raise SingularityError("C Omega + D is numerically singular")
    # X Y^{-1} via a solve on the transposed system
    out = np.linalg.solve(den.T, num.T).T
    return SiegelPoint(0.5 * (out + out.T))


def is_in_gamma12(gamma) -> bool:
    """Membership in the theta group: diagonals of A B^T and C D^T are even."""
    if isinstance(gamma, SymplecticIntMatrix):
        m = gamma.entries
    else:
        m = _as_int_matrix(gamma)
        if not is_symplectic(m):
            raise PreconditionError("gamma is not symplectic")
    a, b, c, d = blocks(m)
    return bool(np.all(np.diag(a @ b.T) % 2 == 0) and np.all(np.diag(c @ d.T) % 2 == 0))


# ---------------------------------------------------------------------------
# Lagrangian subspaces


@dataclass(frozen=True, eq=False)
class LagrangianBasis:
    """Columns span a Lagrangian subspace of C^{2g} for the form J."""

    basis: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != 2 * basis.shape[1]:
            raise DimensionError(f"expected a 2g x g matrix, got shape {basis.shape}")
        g = basis.shape[1]
        j = standard_form(g)
        scale = max(1.0, np.max(np.abs(basis)) ** 2)
        if np.max(np.abs(basis.T @ j @ basis)) > SUBSPACE_TOL * scale:
            raise PreconditionError("columns are not symplectically orthogonal")
        if np.linalg.matrix_rank(basis, tol=SUBSPACE_TOL * np.sqrt(scale)) != g:
            raise PreconditionError("basis does not have rank g")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def g(self) -> int:
        return self.basis.shape[1]


def swap_coordinates(vectors: np.ndarray, swaps) -> np.ndarray:
    """Apply ``x~_a = p_a, p~_a = -x_a`` for each ``a`` in ``swaps`` (rows of vectors)."""
    out = np.array(vectors, copy=True)
    g = out.shape[0] // 2
    for a in swaps:
        x = out[a].copy()
        out[a] = out[g + a]
        out[g + a] = -x
    return out


def normalize_lagrangian(basis) -> tuple[np.ndarray, tuple[int, ...]]:
    """Write a Lagrangian subspace as a graph ``p + Omega x = 0``.

    Returns ``(Omega, swaps)`` where ``swaps`` is the (0-based) set of
    coordinate swaps applied before reading off the graph.  Every subset is
    scored by the smallest singular value of the x-block of an orthonormal
    basis; the first subset (by size, then lexicographically) within a factor
    two of the best score is used.
    """
    if not isinstance(basis, LagrangianBasis):
        basis = LagrangianBasis(basis)
    g = basis.g
    q, _ = np.linalg.qr(basis.basis)
    candidates = []
    for size in range(g + 1):
        for subset in itertools.combinations(range(g), size):
            swapped = swap_coordinates(q, subset)
            score = np.linalg.svd(swapped[:g], compute_uv=False)[-1]
            candidates.append((subset, score, swapped))
    best = max(c[1] for c in candidates)
    if best < SUBSPACE_TOL:
        raise DegeneracyError("no coordinate swap makes the x-projection invertible")
    subset, _, swapped = next(c for c in candidates if c[1] >= 0.5 * best)
    x, p = swapped[:g], swapped[g:]
    omega = -np.linalg.solve(x.T, p.T).T
    if np.max(np.abs(omega - omega.T)) > SUBSPACE_TOL * max(1.0, np.max(np.abs(omega))):
        raise DegeneracyError("graph matrix is not symmetric; input is not Lagrangian")
    return 0.5 * (omega + omega.T), tuple(subset)


def graph_residual(basis, omega, swaps) -> float:
    """Residual of ``p + Omega x = 0`` on the swapped basis vectors."""
    basis = np.asarray(basis, dtype=complex)
    g = basis.shape[1]
    swapped = swap_coordinates(basis, swaps)
    return float(np.max(np.abs(swapped[g:] + np.asarray(omega) @ swapped[:g])))


# ---------------------------------------------------------------------------
# Darboux


@dataclass(frozen=True, eq=False)
class AntisymmetricRealMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
        if np.max(np.abs(m + m.T), initial=0.0) > SYMMETRY_TOL:
            raise PreconditionError("matrix is not antisymmetric")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def d(self) -> int:
        return self.entries.shape[0]


def darboux_standardize(omega) -> np.ndarray:
    """Return ``T`` with ``T.T @ omega @ T == J`` (symplectic Gram-Schmidt).

    Pairs are chosen by the largest available value of the form, which keeps
    the normalisation divisions well conditioned.
    """
    if not isinstance(omega, AntisymmetricRealMatrix):
        omega = AntisymmetricRealMatrix(omega)
    w = omega.entries
    d = omega.d
    if d % 2:
        raise DimensionError("a nondegenerate antisymmetric form needs even size")
    g = d // 2
    scale = max(1.0, np.max(np.abs(w)))

    def form(u, v):
        return u @ w @ v

    remaining = [np.eye(d)[i] for i in range(d)]
    es, fs = [], []
    for _ in range(g):
        pairs = [
            (abs(form(remaining[i], remaining[j])), i, j)
            for i in range(len(remaining))
            for j in range(i + 1, len(remaining))
        ]
        value, i, j = max(pairs)
        if value < 1e-10 * scale:
            raise SingularityError("antisymmetric form is degenerate")
        e, f = remaining[i], remaining[j]
        f = f / form(e, f)
        rest = [v for k, v in enumerate(remaining) if k not in (i, j)]
        remaining = [v - form(v, f) * e + form(v, e) * f for v in rest]
        es.append(e)
        fs.append(f)
    t = np.column_stack(es + fs)
    j_std = standard_form(g, dtype=float)
    if np.max(np.abs(t.T @ w @ t - j_std)) > 1e-10:
        raise SingularityError("Darboux basis failed the post-check")
    return t
