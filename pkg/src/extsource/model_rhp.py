"""Explicit solution M(z) of the model Riemann-Hilbert problem.

M has the constant jumps J_S on the three cuts, M(z) = I + O(1/z) and unit
determinant.  Entry (k, j) is M_k(xi_j(z)) where

    M_1 = xi (xi^2 - a^2) / s,   M_2 = c2 xi (xi + a) / s,
    M_3 = c3 (xi^2 - a^2) / s,   M_4 = c4 xi (xi - a) / s,

with s(xi) = sqrt((xi^2 - p^2)(xi^2 - q^2)(xi^2 - r^2)).  The square root has
its cuts on the images of the support under the sheets; numerically this
amounts to one branch for the first sheet and the sign-flipped branch for the
others in the upper half of the xi-plane.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .curve import ModelParams, Side, SupportData, branch_points, solve_sheets
from .errors import BranchPointSingularity

__all__ = [
    "ModelSolution",
    "model_constants",
    "model_solution",
    "jump_matrix",
    "verify_model_jumps",
    "value_table",
    "det_check",
    "PRINTED_TABLE_NOTES",
]

CUTS = {
    "(z2,z3)": ("z2", "z3"),
    "(-z1,z1)": ("-z1", "z1"),
    "(-z3,-z2)": ("-z3", "-z2"),
}

# corrections to the printed 0/1 value pattern; the coherent pattern is the identity
PRINTED_TABLE_NOTES = (
    "row M_3, last column printed as M_4(-a)=0; coherent entry is M_3(-a)=0",
    "row M_4, third column printed as M_3(0)=0; coherent entry is M_4(0)=0",
)


@dataclasses.dataclass(frozen=True)
class ModelSolution:
    z: complex
    m: np.ndarray
    side: Side

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.m))


def model_constants(params: ModelParams):
    """Normalising constants (c2, c3, c4) of rows 2..4."""
    params.require_three_cut()
    c2 = -1j * math.sqrt((1.0 - params.t) / 2.0)
    c3 = -1j * math.sqrt(params.t)
    return c2, c3, c2


def _sqrt_low(u):
    """Square root continuous from below the negative axis."""
    w = complex(u.real, -u.imag if u.imag != 0.0 else 0.0)
    return np.sqrt(w).conjugate()


def _s(xi, sd, first_sheet):
    centers = (sd.p, -sd.p, sd.q, -sd.q, sd.r, -sd.r)
    xi = complex(xi)
    if first_sheet:
        # real xi on the first sheet never meets a cut; imag sign of zero is irrelevant
        return complex(np.prod([np.sqrt(complex(xi.real - c, abs(xi.imag) if xi.imag == 0 else xi.imag))
                                for c in centers]))
    if xi.imag > 0.0:
        return -complex(np.prod([np.sqrt(xi - c) for c in centers]))
    return complex(np.prod([_sqrt_low(xi - c) for c in centers]))


def _rows(params, sd, xi, first_sheet):
    a = params.a
    c2, c3, c4 = model_constants(params)
    s = _s(xi, sd, first_sheet)
    return np.array([
        xi * (xi * xi - a * a) / s,
        c2 * xi * (xi + a) / s,
        c3 * (xi * xi - a * a) / s,
        c4 * xi * (xi - a) / s,
    ])


def model_solution(params: ModelParams, support: SupportData | None, z, side: Side = Side.OFF_AXIS) -> ModelSolution:
    """M(z); real z on a cut needs ``side``."""
    params.require_three_cut()
    sd = support or branch_points(params)
    z = complex(z)
    exclusion = 1e-8 * max(1.0, sd.z3)
    if min(abs(z - e) for e in sd.breakpoints) < exclusion:
        raise BranchPointSingularity(f"z = {z} is within {exclusion:g} of a branch point")
    sheets = solve_sheets(params, z, side)
    m = np.empty((4, 4), dtype=complex)
    for j in range(4):
        m[:, j] = _rows(params, sd, sheets.xi[j], j == 0)
    return ModelSolution(z, m, Side(side))


def jump_matrix(cut: str) -> np.ndarray:
    """Constant jump J_S on one of the three cuts."""
    k = {"(z2,z3)": 1, "(-z1,z1)": 2, "(-z3,-z2)": 3}[cut]
    j = np.eye(4)
    j[0, 0] = j[k, k] = 0.0
    j[0, k] = 1.0
    j[k, 0] = -1.0
    return j


def verify_model_jumps(params: ModelParams, support: SupportData | None = None, n_samples: int = 20):
    """max ||M+ - M- J_S|| over ``n_samples`` interior points of each cut."""
    params.require_three_cut()
    sd = support or branch_points(params)
    guard = 1e-6 * sd.z3
    report = {}
    for name, (lo_s, hi_s) in CUTS.items():
        lo, hi = sd.edge(lo_s) + guard, sd.edge(hi_s) - guard
        xs = lo + (hi - lo) * (np.arange(n_samples) + 0.5) / n_samples
        js = jump_matrix(name)
        res = []
        for x in xs:
            mp_ = model_solution(params, sd, x, Side.ABOVE).m
            mm = model_solution(params, sd, x, Side.BELOW).m
            res.append(float(np.max(np.abs(mp_ - mm @ js))))
        report[name] = {"n_points": n_samples, "max_residual": max(res)}
    return report


def value_table(params: ModelParams, support: SupportData | None = None):
    """M_k at the large-z limits (inf, a, 0, -a) of the four sheets.

    Returns (values, discrepancy): the coherent pattern is the identity.
    """
    params.require_three_cut()
    sd = support or branch_points(params)
    vals = np.empty((4, 4), dtype=complex)
    # first column: M_k(xi) as xi -> +inf, exactly (1, 0, 0, 0)
    vals[:, 0] = [1.0, 0.0, 0.0, 0.0]
    for j, anchor in enumerate((params.a, 0.0, -params.a), start=1):
        vals[:, j] = _rows(params, sd, complex(anchor, 0.0), False)
    return vals, float(np.max(np.abs(vals - np.eye(4))))


def normalization_check(params: ModelParams, support: SupportData | None = None, radii=(1e4, 1e5)):
    """max over a few directions of ||M(z) - I|| at each radius."""
    sd = support or branch_points(params)
    angles = (0.25, 0.5, 0.75, 1.25, 1.5, 1.75)
    out = {}
    for r in radii:
        out[r] = max(float(np.max(np.abs(model_solution(params, sd, r * np.exp(1j * math.pi * th)).m - np.eye(4))))
                     for th in angles)
    return out


def det_check(params: ModelParams, support: SupportData | None = None, n_points: int = 20, seed: int = 0):
    """max |det M - 1| at random off-cut points."""
    sd = support or branch_points(params)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        z = complex(rng.uniform(-1.3, 1.3) * sd.z3, rng.choice([-1, 1]) * rng.uniform(0.05, 2.0))
        worst = max(worst, abs(model_solution(params, sd, z).det - 1.0))
    return worst
