"""Gauss-Legendre rules with endpoint substitutions for square-root edges."""
from __future__ import annotations

import functools

import numpy as np

from .errors import QuadratureNonConvergence
from .precision import get_profile


@functools.lru_cache(maxsize=32)
def gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _gl(f, lo, hi, order):
    x, w = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    return half * np.dot(w, f(lo + half * (x + 1.0)))


def sqrt_edge_nodes(lo: float, hi: float, order: int):
    """Nodes/weights on [lo, hi] after s = lo + (hi - lo) sin^2(theta).

    The substitution absorbs square-root behaviour at both ends.
    """
    x, w = gauss_legendre(order)
    theta = 0.25 * np.pi * (x + 1.0)
    s = lo + (hi - lo) * np.sin(theta) ** 2
    ws = w * 0.25 * np.pi * (hi - lo) * np.sin(2.0 * theta)
    return s, ws


def integrate_sqrt_edges(f, lo: float, hi: float, tol: float | None = None, order: int = 48):
    """Integral of f over [lo, hi] where f may behave like sqrt at either end.

    The node count doubles until two successive rules agree within ``tol``
    relative to max(1, |I|).
    """
    prof = get_profile()
    tol = prof.quad_tolerance if tol is None else tol
    if hi == lo:
        return 0.0
    s, w = sqrt_edge_nodes(lo, hi, order)
    prev = np.dot(w, f(s))
    for _ in range(prof.quad_max_depth):
        order *= 2
        if order > 4096:
            break
        s, w = sqrt_edge_nodes(lo, hi, order)
        cur = np.dot(w, f(s))
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureNonConvergence(f"no convergence on [{lo}, {hi}] (last change {abs(cur - prev):.3g})")


def adaptive_gl(f, lo: float, hi: float, tol: float | None = None, order: int = 20, depth: int | None = None):
    """Adaptive bisection with an (order, 2*order) Gauss-Legendre pair per panel."""
    prof = get_profile()
    tol = prof.quad_tolerance if tol is None else tol
    depth = prof.quad_max_depth if depth is None else depth
    total = 0.0
    stack = [(lo, hi, 0)]
    while stack:
        a, b, d = stack.pop()
        coarse = _gl(f, a, b, order)
        fine = _gl(f, a, b, 2 * order)
        if abs(fine - coarse) <= tol * max(1.0, abs(fine)) or abs(b - a) < 1e-14:
            total += fine
            continue
        if d >= depth:
            raise QuadratureNonConvergence(f"depth {depth} exceeded on [{a}, {b}]")
        m = 0.5 * (a + b)
        stack.extend([(a, m, d + 1), (m, b, d + 1)])
    return total
