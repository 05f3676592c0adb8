"""Sine and Airy kernels and the finite-n scaling-limit comparisons."""
from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.special import airy

from .curve import ModelParams, branch_points
from .density import rho
from .lambdas import h_function
from .mop import FiniteSizeParams, engine

__all__ = [
    "LimitCheckReport",
    "sine_kernel",
    "airy_kernel",
    "bulk_limit_check",
    "edge_limit_check",
    "diagonal_density_check",
    "BULK_GRID",
    "EDGE_GRID",
]

BULK_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)
EDGE_GRID = (-2.0, -1.0, 0.0, 1.0)
_DIAG = 1e-8


def sine_kernel(u, v):
    d = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    out = np.sinc(d)  # sin(pi d) / (pi d), 1 at d = 0
    return out if out.ndim else float(out)


def airy_kernel(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    au, apu, _, _ = airy(u)
    av, apv, _, _ = airy(v)
    close = np.abs(u - v) < _DIAG
    with np.errstate(divide="ignore", invalid="ignore"):
        off = (au * apv - apu * av) / (u - v)
    diag = apu * apu - u * au * au
    out = np.where(close, diag, off)
    return out if out.ndim else float(out)


@dataclasses.dataclass
class LimitCheckReport:
    kind: str
    n_list: list
    point: float
    scale: list
    grid: list
    scaled: dict
    limit: list
    max_errors: list
    extra: dict = dataclasses.field(default_factory=dict)

    @property
    def decreasing(self) -> bool:
        e = self.max_errors
        return all(b < a for a, b in zip(e[:-1], e[1:]))

    def to_dict(self):
        return dataclasses.asdict(self)


def _fps(params, n_list):
    return [FiniteSizeParams.from_model(params, n) for n in n_list]


def _scaled_surface(params, fp, x0, step, grid, sign=1.0):
    """step * hatK(x0 + sign*u*step, x0 + sign*v*step) over the grid."""
    eng = engine(fp, fp.digits())
    pts = [x0 + sign * u * step for u in grid]
    h = h_function(params, None, pts)
    vals = np.empty((len(grid), len(grid)))
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            vals[i, j] = step * math.exp(fp.N * (h[i] - h[j])) * eng.kn(x, y)
    return vals


def bulk_limit_check(params: ModelParams, n_list=(12, 24, 48), x0: float | None = None, grid=BULK_GRID):
    """Scaled conjugated kernel against the sine kernel at an interior point x0."""
    sd = branch_points(params)
    if x0 is None:
        x0 = 0.5 * (sd.z2 + sd.z3)
    if not sd.contains(x0, closed=False):
        raise ValueError(f"x0 = {x0} is not interior to the support")
    r0 = float(rho(params, sd, x0))
    g = np.asarray(grid, dtype=float)
    limit = sine_kernel(g[:, None], g[None, :])
    scaled, errs, scales = {}, [], []
    for fp in _fps(params, n_list):
        step = 1.0 / (fp.N * r0)
        vals = _scaled_surface(params, fp, x0, step, g)
        scaled[fp.n] = vals.tolist()
        scales.append(step)
        errs.append(float(np.max(np.abs(vals - limit))))
    return LimitCheckReport("bulk", list(n_list), float(x0), scales, g.tolist(), scaled,
                            limit.tolist(), errs, {"rho": r0})


def edge_limit_check(params: ModelParams, n_list=(12, 24, 48), edge: str = "z3", grid=EDGE_GRID):
    """Scaled conjugated kernel against the Airy kernel at a support edge.

    Left edges use the reflected variable so that positive u always points
    away from the support.
    """
    sd = branch_points(params)
    x0 = sd.edge(edge)
    c = sd.rho_edge[edge]
    sign = 1.0 if sd.is_right_edge(edge) else -1.0
    g = np.asarray(grid, dtype=float)
    limit = airy_kernel(g[:, None], g[None, :])
    scaled, errs, scales = {}, [], []
    for fp in _fps(params, n_list):
        step = (c * fp.N) ** (-2.0 / 3.0)
        vals = _scaled_surface(params, fp, x0, step, g, sign)
        scaled[fp.n] = vals.tolist()
        scales.append(step)
        errs.append(float(np.max(np.abs(vals - limit))))
    return LimitCheckReport("edge", list(n_list), float(x0), scales, g.tolist(), scaled,
                            limit.tolist(), errs, {"edge": edge, "rho_edge": c, "orientation": sign})


def diagonal_density_check(params: ModelParams, n_list=(12, 24, 48), points=None,
                           exterior=None, edges=("z3", "z1")):
    """(1/n) K_n(x, x) against rho at interior points, decay outside, n^(-1/3) at edges."""
    sd = branch_points(params)
    if points is None:
        points = [-0.5 * (sd.z2 + sd.z3), 0.0, 0.5 * (sd.z2 + sd.z3)]
    if exterior is None:
        exterior = [sd.z3 + 0.2, sd.z3 + 0.5, -sd.z3 - 0.2]
    points = list(map(float, points))
    exterior = list(map(float, exterior))
    target = np.atleast_1d(rho(params, sd, points))
    interior, outside, at_edge, errs = {}, {}, {}, []
    for fp in _fps(params, n_list):
        eng = engine(fp, fp.digits())
        d = eng.diagonal(points) / fp.N
        interior[fp.n] = d.tolist()
        errs.append(np.abs(d - target).tolist())
        outside[fp.n] = (eng.diagonal(exterior) / fp.N).tolist()
        at_edge[fp.n] = {e: float(eng.kn(sd.edge(e), sd.edge(e)) / fp.N) for e in edges}
    errs_arr = np.array(errs)
    ratios = (errs_arr[1:] / errs_arr[:-1]).tolist()
    edge_ratios = {e: [at_edge[b][e] / at_edge[a][e] for a, b in zip(n_list[:-1], n_list[1:])] for e in edges}
    # Airy prediction of the edge value: (c n)^(2/3) Ai'(0)^2 / n
    aip0 = airy(0.0)[1] ** 2
    edge_prediction = {n: {e: (sd.rho_edge[e] * n) ** (2.0 / 3.0) * aip0 / n for e in edges} for n in n_list}
    return LimitCheckReport(
        "diagonal", list(n_list), float("nan"), [], points, {"interior": interior},
        target.tolist(), [float(max(r)) for r in errs],
        {
            "errors": errs,
            "error_ratios": ratios,
            "exterior_points": exterior,
            "exterior": outside,
            "edge_values": at_edge,
            "edge_ratios": edge_ratios,
            "edge_prediction": edge_prediction,
        },
    )
