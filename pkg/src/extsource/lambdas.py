"""Antiderivatives lambda_j of the sheets and the checks built on them.

lambda_1, lambda_2 vanish at z3 and are analytic off (-inf, z3];
lambda_3 is analytic off (-inf, z1] with lambda_3(z1) = lambda_1+(z1);
lambda_4 is analytic off (-inf, -z2] with lambda_4(-z2) = lambda_1+(-z2).

Values on the real axis are integrals of boundary values of the sheets from
the anchor point, which is the limit of an integral along a path hugging the
axis from the requested side.  Off the axis a vertical leg is added.
"""
from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np

from .curve import ModelParams, Side, SupportData, boundary_values, branch_points, vertical_sheets
from .errors import OutOfSupport, PathCrossesCut
from .quadrature import gauss_legendre, integrate_sqrt_edges

__all__ = [
    "LambdaValues",
    "lambda_real",
    "lambda_value",
    "lambdas_at",
    "integration_constants",
    "asymptotic_form",
    "check_jump_relations",
    "check_sheet_ordering",
    "h_function",
    "JUMP_RELATIONS",
]

_QUAD_TOL = 1e-13


@dataclasses.dataclass(frozen=True)
class LambdaValues:
    z: complex
    lam: np.ndarray
    l_const: np.ndarray
    side: Side


def _panels(lo, hi, sd):
    """Split [lo, hi] at branch points and geometrically beyond the support."""
    pts = {lo, hi}
    for b in sd.breakpoints:
        if lo < b < hi:
            pts.add(float(b))
    reach = sd.z3 + 1.0
    for sign in (1.0, -1.0):
        edge = reach
        while True:
            p = sign * edge
            if not (lo < p < hi):
                if edge > max(abs(lo), abs(hi)):
                    break
            else:
                pts.add(p)
            edge *= 2.0
    return sorted(pts)


def integrate_sheet(params, sd, j, lo, hi, side):
    """Integral of the boundary value of sheet j over [lo, hi] (lo <= hi)."""
    if hi == lo:
        return 0.0j
    pts = _panels(lo, hi, sd)
    f = lambda s: boundary_values(params, s, side)[..., j - 1]
    return complex(sum(integrate_sqrt_edges(f, a, b, tol=_QUAD_TOL) for a, b in zip(pts[:-1], pts[1:])))


def _integrate_from(params, sd, j, c, x, side):
    if x >= c:
        return integrate_sheet(params, sd, j, c, x, side)
    return -integrate_sheet(params, sd, j, x, c, side)


@functools.lru_cache(maxsize=64)
def _anchors(params: ModelParams):
    sd = branch_points(params)
    lam1_z1 = _integrate_from(params, sd, 1, sd.z3, sd.z1, Side.ABOVE)
    lam1_mz2 = _integrate_from(params, sd, 1, sd.z3, -sd.z2, Side.ABOVE)
    return {1: (sd.z3, 0j), 2: (sd.z3, 0j), 3: (sd.z1, lam1_z1), 4: (-sd.z2, lam1_mz2)}


def lambda_real(params: ModelParams, j: int, x: float, side: Side = Side.ABOVE) -> complex:
    """lambda_j at a real point, as the limit from ``side`` where lambda_j has a cut."""
    side = Side(side)
    params.require_three_cut()
    sd = branch_points(params)
    c, base = _anchors(params)[j]
    if x < c and side == Side.OFF_AXIS:
        raise PathCrossesCut(f"x = {x} lies on the cut of lambda_{j}; give a side")
    eff = Side.ABOVE if side == Side.OFF_AXIS else side
    return base + _integrate_from(params, sd, j, c, float(x), eff)


def _vertical_leg(params, x, height, order=40):
    """Integral of all four sheets along x -> x + i*height (height > 0), times i."""
    t, w = gauss_legendre(order)
    tau = 0.5 * height * (t + 1.0)
    xi = vertical_sheets(params, x, tau)
    return 1j * 0.5 * height * (w[:, None] * xi).sum(axis=0)


def lambdas_at(params: ModelParams, z, side: Side = Side.OFF_AXIS) -> np.ndarray:
    """All four lambda_j at z; on the real axis ``side`` selects the boundary value."""
    params.require_three_cut()
    z = complex(z)
    if z.imag == 0.0:
        return np.array([lambda_real(params, j, z.real, side) for j in range(1, 5)])
    up = z.imag > 0
    base = np.array([lambda_real(params, j, z.real, Side.ABOVE if up else Side.BELOW)
                     for j in range(1, 5)])
    height = abs(z.imag)
    coarse = _vertical_leg(params, z.real, height, 40)
    leg = _vertical_leg(params, z.real, height, 80)
    if np.max(np.abs(leg - coarse)) > 1e-10 * max(1.0, np.max(np.abs(leg))):
        leg = _vertical_leg(params, z.real, height, 160)
    if not up:
        # xi_j(conj w) = conj xi_j(w); dz = -i dtau
        leg = np.conj(leg)
    return base + leg


def lambda_value(params: ModelParams, support: SupportData | None, z, sheet: int,
                 side: Side = Side.OFF_AXIS) -> complex:
    return complex(lambdas_at(params, z, side)[sheet - 1])


# ---------------------------------------------------------------------------
# large-z normalisation constants


def _asymptote(params, j, s):
    """Leading large-s terms of lambda_j (without l_j)."""
    a, t, t1 = params.a, params.t, params.t1
    ln = np.log(s)
    return {1: 0.5 * s * s - ln, 2: a * s + t1 * ln, 3: t * ln, 4: -a * s + t1 * ln}[j]


def _tail_integrand(params, j, s):
    """xi_j(s) minus its first two asymptotic terms, free of cancellation."""
    b, t, a, t1 = params.b, params.t, params.a, params.t1
    xi = boundary_values(params, s, Side.ABOVE)[..., j - 1].real
    num = xi**4 + (1.0 - b) * xi**2 - t * b
    if j == 1:
        return (-(1.0 - b) * xi**2 - b * s * xi + t * b) / xi**3 + 1.0 / s
    if j == 2:
        return num / (s * xi * (xi + a)) - t1 / s
    if j == 3:
        return num / (s * (xi * xi - b)) - t / s
    return num / (s * xi * (xi - a)) - t1 / s


@functools.lru_cache(maxsize=64)
def _l_constants(params: ModelParams):
    sd = branch_points(params)
    x0 = 2.0 * sd.z3 + 1.0
    out = []
    for j in range(1, 5):
        lam_x0 = lambda_real(params, j, x0, Side.ABOVE)
        # tail over (x0, inf) with s = x0 / w
        g = lambda w: _tail_integrand(params, j, x0 / w) * x0 / w**2
        tail = integrate_sqrt_edges(g, 0.0, 1.0, tol=_QUAD_TOL)
        out.append(lam_x0 - _asymptote(params, j, x0) + tail)
    return np.array(out, dtype=complex)


def integration_constants(params: ModelParams, support: SupportData | None = None) -> np.ndarray:
    """Constants l_1..l_4 in the large-z expansions of lambda_1..lambda_4."""
    params.require_three_cut()
    return _l_constants(params).copy()


def asymptotic_form(params: ModelParams, j: int, z) -> complex:
    """Large-z expansion of lambda_j including l_j (principal logarithm)."""
    a, t, t1 = params.a, params.t, params.t1
    z = complex(z)
    ln = np.log(z)
    lead = {1: 0.5 * z * z - ln, 2: a * z + t1 * ln, 3: t * ln, 4: -a * z + t1 * ln}[j]
    return lead + integration_constants(params)[j - 1]


# ---------------------------------------------------------------------------
# jump relations


@dataclasses.dataclass(frozen=True)
class JumpRelation:
    name: str
    interval: tuple  # edge expressions evaluated against SupportData
    lhs: tuple  # ((sheet, side), (sheet, side)) meaning lhs[0] - lhs[1]
    constant: str  # multiple of pi*i as a function of t


JUMP_RELATIONS = (
    JumpRelation("lam1+ = lam2- on [z2,z3]", ("z2", "z3"), ((1, "above"), (2, "below")), "0"),
    JumpRelation("lam1- = lam2+ on [z2,z3]", ("z2", "z3"), ((1, "below"), (2, "above")), "0"),
    JumpRelation("lam2+ - lam2- = (1-t)pi i on (-inf,z2]", ("-inf", "z2"), ((2, "above"), (2, "below")), "1-t"),
    JumpRelation("lam1+ - lam1- = -(1-t)pi i on [z1,z2]", ("z1", "z2"), ((1, "above"), (1, "below")), "-(1-t)"),
    JumpRelation("lam1+ = lam3- on [-z1,z1]", ("-z1", "z1"), ((1, "above"), (3, "below")), "0"),
    JumpRelation("lam1- - lam3+ = (1-t)pi i on [-z1,z1]", ("-z1", "z1"), ((1, "below"), (3, "above")), "1-t"),
    JumpRelation("lam1+ - lam1- = -(1+t)pi i on [-z2,-z1]", ("-z2", "-z1"), ((1, "above"), (1, "below")), "-(1+t)"),
    JumpRelation("lam3+ - lam3- = 2t pi i on [-z2,-z1]", ("-z2", "-z1"), ((3, "above"), (3, "below")), "2t"),
    JumpRelation("lam1+ = lam4- on [-z3,-z2]", ("-z3", "-z2"), ((1, "above"), (4, "below")), "0"),
    JumpRelation("lam1- - lam4+ = (1+t)pi i on [-z3,-z2]", ("-z3", "-z2"), ((1, "below"), (4, "above")), "1+t"),
    JumpRelation("lam1+ - lam1- = -2pi i on (-inf,-z3]", ("-inf", "-z3"), ((1, "above"), (1, "below")), "-2"),
    JumpRelation("lam4+ - lam4- = (1-t)pi i on (-inf,-z3]", ("-inf", "-z3"), ((4, "above"), (4, "below")), "1-t"),
)

# the seven printed lines, each grouping one or two of the relations above
RELATION_GROUPS = ((0, 1), (2,), (3,), (4, 5), (6, 7), (8, 9), (10, 11))

_CONSTANTS = {
    "0": lambda t: 0.0,
    "1-t": lambda t: 1.0 - t,
    "-(1-t)": lambda t: -(1.0 - t),
    "-(1+t)": lambda t: -(1.0 + t),
    "2t": lambda t: 2.0 * t,
    "1+t": lambda t: 1.0 + t,
    "-2": lambda t: -2.0,
}


def _interval_points(sd, interval, n_samples):
    lo_s, hi_s = interval
    hi = sd.edge(hi_s)
    lo = hi - (sd.z3 + 1.0) if lo_s == "-inf" else sd.edge(lo_s)
    k = np.arange(n_samples)
    return lo, hi, lo + (hi - lo) * (k + 0.5) / n_samples


def relation_residuals(params, relation, xs):
    sd = branch_points(params)
    lo_s, hi_s = relation.interval
    hi = sd.edge(hi_s)
    lo = -math.inf if lo_s == "-inf" else sd.edge(lo_s)
    const = _CONSTANTS[relation.constant](params.t) * math.pi * 1j
    (j1, s1), (j2, s2) = relation.lhs
    res = []
    for x in xs:
        if not (lo <= x <= hi):
            continue
        val = lambda_real(params, j1, x, s1) - lambda_real(params, j2, x, s2)
        res.append(abs(val - const))
    return res


def check_jump_relations(params: ModelParams, support: SupportData | None = None, n_samples: int = 20):
    """Residuals of every jump relation at ``n_samples`` interior points of its interval."""
    params.require_three_cut()
    sd = branch_points(params)
    report = []
    for group, members in enumerate(RELATION_GROUPS, start=1):
        for idx in members:
            rel = JUMP_RELATIONS[idx]
            _, _, xs = _interval_points(sd, rel.interval, n_samples)
            res = relation_residuals(params, rel, xs)
            report.append({
                "line": group,
                "relation": rel.name,
                "n_points": len(res),
                "max_residual": float(max(res)) if res else 0.0,
            })
    return report


# ---------------------------------------------------------------------------
# real-part ordering near the cuts


_DOMINANT = {1: ("z2", "z3", 2), 2: ("-z1", "z1", 3), 3: ("-z3", "-z2", 4)}


def check_sheet_ordering(params: ModelParams, support: SupportData | None, interval: int,
                         offset: float, n_points: int = 20):
    """Check that Re lambda_k is the largest at x +- i*offset over the open interval.

    ``interval`` is 1 for (z2,z3), 2 for (-z1,z1), 3 for (-z3,-z2); the
    dominant sheet is then 2, 3 or 4 respectively.
    """
    params.require_three_cut()
    sd = branch_points(params)
    lo_s, hi_s, k = _DOMINANT[interval]
    lo, hi = sd.edge(lo_s), sd.edge(hi_s)
    if not (0.0 < offset <= 0.05 * (sd.z3 - sd.z2) + 1e-15):
        raise ValueError(f"offset must lie in (0, 0.05*(z3-z2)], got {offset}")
    xs = lo + (hi - lo) * (np.arange(n_points) + 0.5) / n_points
    margins, violations = [], []
    for x in xs:
        for sign in (1.0, -1.0):
            z = complex(x, sign * offset)
            re = lambdas_at(params, z).real
            others = np.delete(re, k - 1)
            margin = float(re[k - 1] - others.max())
            margins.append(margin)
            if margin <= 0.0:
                violations.append({"z": [z.real, z.imag], "margin": margin})
    return {
        "interval": interval,
        "dominant_sheet": k,
        "offset": offset,
        "min_margin": float(min(margins)),
        "max_margin": float(max(margins)),
        "margins": margins,
        "violations": violations,
        "holds": not violations,
    }


# ---------------------------------------------------------------------------
# h(x) for the conjugated kernel


def h_function(params: ModelParams, support: SupportData | None, x, strict: bool = False):
    """-x^2/4 + Re int_{z1}^x xi_1+(s) ds.

    Independent of the l_j normalisation.  With ``strict`` the point must lie
    in the open support; otherwise any real x is accepted (edge scalings
    sample just outside the support).
    """
    params.require_three_cut()
    sd = branch_points(params)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if strict and not np.all(sd.contains(xs, closed=False)):
        raise OutOfSupport("h is defined on the open support")
    out = np.array([-0.25 * xv * xv + _integrate_from(params, sd, 1, sd.z1, xv, Side.ABOVE).real
                    for xv in xs])
    return out if np.ndim(x) else float(out[0])
