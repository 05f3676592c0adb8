"""Limiting eigenvalue density rho(x) = Im xi_1+(x) / pi on the three-interval support."""
from __future__ import annotations

import dataclasses

import numpy as np

from .curve import ModelParams, Side, SupportData, _edge_constant, boundary_values, branch_points
from .quadrature import integrate_sqrt_edges

__all__ = ["DensityCurve", "rho", "rho_with_flag", "masses", "cumulative", "bin_masses",
           "edge_constants", "density_curve"]


@dataclasses.dataclass(frozen=True)
class DensityCurve:
    support: SupportData
    samples: tuple  # ((x, rho), ...)
    masses: tuple  # (outer-left, center, outer-right)


def _support(params, support):
    params.require_three_cut()
    return branch_points(params) if support is None else support


def rho_with_flag(params: ModelParams, support: SupportData | None, x):
    """Density values and a boolean mask telling which points lie in the closed support."""
    sd = _support(params, support)
    x = np.asarray(x, dtype=float)
    inside = np.asarray(sd.contains(x))
    out = np.zeros(x.shape)
    if inside.any():
        xi1 = boundary_values(params, x[inside], Side.ABOVE)[..., 0]
        out[inside] = np.maximum(xi1.imag, 0.0) / np.pi
    return (out[()] if out.ndim == 0 else out), inside


def rho(params: ModelParams, support: SupportData | None, x):
    """rho(x); exactly 0 outside the closed support."""
    return rho_with_flag(params, support, x)[0]


def _interval_integral(params, sd, lo, hi):
    return float(integrate_sqrt_edges(lambda s: rho(params, sd, s), lo, hi, tol=1e-13))


def masses(params: ModelParams, support: SupportData | None = None):
    """Masses of (outer-left, center, outer-right) intervals."""
    sd = _support(params, support)
    return tuple(_interval_integral(params, sd, lo, hi) for lo, hi in sd.intervals)


def cumulative(params: ModelParams, support: SupportData | None, x):
    """Mass of the density on (-inf, x]."""
    sd = _support(params, support)
    full = masses(params, sd)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for k, xv in enumerate(xs):
        total = 0.0
        for (lo, hi), m in zip(sd.intervals, full):
            if xv >= hi:
                total += m
            elif xv > lo:
                # integrate from the nearer edge so the far endpoint stays smooth
                if xv - lo <= hi - xv:
                    total += _interval_integral(params, sd, lo, xv)
                else:
                    total += m - _interval_integral(params, sd, xv, hi)
        out[k] = total
    return out if np.ndim(x) else float(out[0])


def bin_masses(params: ModelParams, support: SupportData | None, edges):
    """Predicted probability mass in each bin delimited by ``edges``."""
    return np.diff(cumulative(params, support, np.asarray(edges, dtype=float)))


def edge_constants(params: ModelParams, support: SupportData | None = None):
    """sqrt(2 / |z''(xi_c)|) for every edge, keyed by edge label."""
    sd = _support(params, support)
    crit = {"z1": sd.p, "z2": sd.q, "z3": sd.r}
    out = {}
    for label in ("-z3", "-z2", "-z1", "z1", "z2", "z3"):
        xi_c = crit[label.lstrip("-")] * (-1.0 if label.startswith("-") else 1.0)
        out[label] = _edge_constant(params, xi_c)
    return out


def density_curve(params: ModelParams, xs) -> DensityCurve:
    sd = _support(params, None)
    xs = np.asarray(xs, dtype=float)
    vals = rho(params, sd, xs)
    return DensityCurve(sd, tuple(zip(xs.tolist(), np.atleast_1d(vals).tolist())), masses(params, sd))
