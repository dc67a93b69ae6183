"""Lattice boxes and rigorous Gaussian tail bounds shared by the series code."""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError

MAX_RADIUS = 10_000
_CHUNK = 2_000_000


def shell_count(g: int, k: int) -> int:
    """Number of integer points with sup-norm exactly ``k`` in ``Z^g``."""
    if k == 0:
        return 1
    return (2 * k + 1) ** g - (2 * k - 1) ** g


class ConcaveLogEnvelope:
    """Envelope ``amp * (1 + r)^deg * exp(-pi lam r^2 + 2 pi s r)`` of a term.

    The logarithm is concave in ``r``, so the envelope is unimodal and the
    supremum over ``r >= r0`` is attained at ``max(r0, peak)``.
    """

    def __init__(self, amp: float, deg: int, lam: float, s: float):
        self.amp = amp
        self.deg = deg
        self.lam = lam
        self.s = s
        # derivative: deg/(1+r) - 2 pi lam r + 2 pi s = 0
        a = 2 * math.pi * lam
        b = 2 * math.pi * lam - 2 * math.pi * s
        c = -(2 * math.pi * s + deg)
        disc = b * b - 4 * a * c
        self.peak = max(0.0, (-b + math.sqrt(disc)) / (2 * a))

    def log_value(self, r: float) -> float:
        if self.amp == 0.0:
            return -math.inf
        return (
            math.log(self.amp)
            + self.deg * math.log1p(r)
            - math.pi * self.lam * r * r
            + 2 * math.pi * self.s * r
        )

    def log_sup_from(self, r0: float) -> float:
        return self.log_value(max(r0, self.peak))


def tail_bound(g: int, radius: int, envelope: ConcaveLogEnvelope, offset: float = 0.0) -> float:
    """Bound the mass of lattice points with sup-norm above ``radius``.

    A point ``n`` with ``|n|_inf = k`` has Euclidean distance at least
    ``k - offset`` from the term's centre, so each shell contributes at most
    ``shell_count * sup_{r >= k - offset} envelope``.  Once the envelope is
    decreasing the shell ratios decrease, and the remainder is closed with a
    geometric series.
    """
    if envelope.amp == 0.0:
        return 0.0
    total = 0.0
    k = radius + 1
    while True:
        r = max(0.0, k - offset)
        log_t = math.log(shell_count(g, k)) + envelope.log_sup_from(r)
        log_next = math.log(shell_count(g, k + 1)) + envelope.log_sup_from(r + 1)
        t = math.exp(log_t) if log_t < 700 else math.inf
        if math.isinf(t):
            return math.inf
        total += t
        if r >= envelope.peak:
            ratio = math.exp(log_next - log_t)
            if ratio < 0.5:
                return total + t * ratio / (1.0 - ratio)
        k += 1
        if k > radius + 10 * MAX_RADIUS:
            return math.inf


def choose_radius(g: int, envelopes, tol: float, offset: float = 0.0) -> tuple[int, float]:
    """Smallest radius whose summed tail bound is at most ``tol``."""
    lo = 1
    bound = sum(tail_bound(g, lo, e, offset) for e in envelopes)
    if bound <= tol:
        return lo, bound
    # doubling then bisection keeps the number of bound evaluations small
    hi = 2
    while True:
        bound = sum(tail_bound(g, hi, e, offset) for e in envelopes)
        if bound <= tol:
            break
        if hi > MAX_RADIUS:
            raise ConvergenceError(f"truncation radius above {MAX_RADIUS} required")
        lo, hi = hi, hi * 2
    best = (hi, bound)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        b = sum(tail_bound(g, mid, e, offset) for e in envelopes)
        if b <= tol:
            hi, best = mid, (mid, b)
        else:
            lo = mid
    if best[0] > MAX_RADIUS:
        raise ConvergenceError(f"truncation radius above {MAX_RADIUS} required")
    return best


def box_points(g: int, radius: int, first: slice | None = None) -> np.ndarray:
    """Integer points of ``[-R, R]^g`` in lexicographic order, shape ``(N, g)``."""
    axes = [np.arange(-radius, radius + 1)] * g
    if first is not None:
        axes[0] = axes[0][first]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([gr.ravel() for gr in grids], axis=1)


def box_sum(g: int, radius: int, summand) -> complex:
    """Deterministic sum of ``summand(points)`` over the box.

    numpy's reduction is pairwise; large boxes are split along the first axis
    and the per-slab sums are reduced the same way, so results are
    reproducible bit for bit.
    """
    side = 2 * radius + 1
    per_slab = side ** (g - 1)
    slab = max(1, _CHUNK // per_slab)
    if slab >= side:
        return complex(np.sum(summand(box_points(g, radius))))
    parts = []
    for start in range(0, side, slab):
        pts = box_points(g, radius, slice(start, start + slab))
        parts.append(np.sum(summand(pts)))
    return complex(np.sum(np.array(parts)))
