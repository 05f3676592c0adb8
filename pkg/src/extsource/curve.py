"""Spectral curve xi^4 - z xi^3 + (1-a^2) xi^2 + a^2 z xi - t a^2 = 0.

Sheets are the four inverse branches of the rational map

    z(xi) = (xi^4 + (1-a^2) xi^2 - t a^2) / (xi^3 - a^2 xi),

labeled by their behaviour at infinity: xi_1 ~ z, xi_2 ~ a, xi_3 ~ 0 and
xi_4 ~ -a.  Roots are computed as companion-matrix eigenvalues and labeled by
continuation from a real anchor point far to the right.
"""
from __future__ import annotations

import dataclasses
import enum
import functools
import itertools
import math

import numpy as np

from .errors import (
    ContinuationFailure,
    DegenerateEdge,
    OrderingViolation,
    PhaseError,
    PoleAtXi,
)
from .precision import get_profile

__all__ = [
    "ModelParams",
    "Side",
    "Phase",
    "PhaseReport",
    "SheetValues",
    "SupportData",
    "evaluate_z_of_xi",
    "z_second_derivative",
    "quartic",
    "quartic_roots",
    "discriminants",
    "delta_c",
    "delta_q",
    "classify_phase",
    "critical_points",
    "branch_points",
    "solve_sheets",
    "boundary_values",
    "vertical_sheets",
    "track_path",
    "EDGE_LABELS",
]


class Side(str, enum.Enum):
    ABOVE = "above"
    BELOW = "below"
    OFF_AXIS = "off-axis"


class Phase(str, enum.Enum):
    THREE_CUT = "ThreeCut"
    BOUNDARY = "Boundary"
    UNSUPPORTED = "Unsupported"


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """Limit parameters: source magnitude ``a`` and middle fraction ``t = n2/n``."""

    a: float
    t: float

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise ValueError(f"t must lie strictly inside (0, 1), got {self.t}")
        if not self.a > 0.0:
            raise ValueError(f"a must be positive, got {self.a}")

    @classmethod
    def three_cut(cls, a: float, t: float) -> "ModelParams":
        params = cls(float(a), float(t))
        if params.b <= 3.0:
            raise PhaseError(f"b = a^2 = {params.b} <= 3 is not in the three-cut regime")
        return params

    @property
    def b(self) -> float:
        return self.a * self.a

    @property
    def t1(self) -> float:
        return (1.0 - self.t) / 2.0

    @property
    def t3(self) -> float:
        return (1.0 - self.t) / 2.0

    @property
    def anchor(self) -> float:
        """Real continuation anchor where the sheets are fixed by their asymptotics."""
        return 10.0 * (1.0 + self.a)

    def require_three_cut(self) -> None:
        if self.b <= 3.0:
            raise PhaseError(f"b = a^2 = {self.b} <= 3 is not in the three-cut regime")


# ---------------------------------------------------------------------------
# the rational map z(xi) and the quartic


def _numerator(params, xi):
    x2 = xi * xi
    return x2 * x2 + (1.0 - params.b) * x2 - params.t * params.b


def _denominator(params, xi):
    return xi * (xi * xi - params.b)


def evaluate_z_of_xi(params: ModelParams, xi):
    """Return z(xi); raises PoleAtXi within relative tolerance of 0, +a, -a."""
    xi = np.asarray(xi)
    tol = get_profile().pole_tolerance * max(1.0, params.a)
    near = np.minimum(np.minimum(np.abs(xi), np.abs(xi - params.a)), np.abs(xi + params.a))
    if np.any(near <= tol):
        raise PoleAtXi(f"z(xi) has a pole at xi in {{0, +-{params.a}}}")
    out = _numerator(params, xi) / _denominator(params, xi)
    return out[()] if out.ndim == 0 else out


def z_derivatives(params: ModelParams, xi):
    """First and second derivative of z(xi)."""
    b, t = params.b, params.t
    num = np.polynomial.Polynomial([-t * b, 0.0, 1.0 - b, 0.0, 1.0])
    den = np.polynomial.Polynomial([0.0, -b, 0.0, 1.0])
    n0, n1, n2 = num(xi), num.deriv(1)(xi), num.deriv(2)(xi)
    d0, d1, d2 = den(xi), den.deriv(1)(xi), den.deriv(2)(xi)
    w = n1 * d0 - n0 * d1
    first = w / d0**2
    # (w/d^2)' with w' = n'' d - n d''
    second = ((n2 * d0 - n0 * d2) * d0 - 2.0 * d1 * w) / d0**3
    return first, second


def z_second_derivative(params: ModelParams, xi):
    return z_derivatives(params, xi)[1]


def quartic(params: ModelParams, xi, z):
    """Left-hand side of the curve equation."""
    b = params.b
    return (((xi - z) * xi + (1.0 - b)) * xi + b * z) * xi - params.t * b


def _quartic_prime(params, xi, z):
    b = params.b
    return ((4.0 * xi - 3.0 * z) * xi + 2.0 * (1.0 - b)) * xi + b * z


def _pairwise_separation(roots):
    diff = np.abs(roots[..., :, None] - roots[..., None, :])
    diff[..., np.arange(4), np.arange(4)] = np.inf
    return diff.min(axis=-1)


def quartic_roots(params: ModelParams, z, polish: int = 2):
    """Roots of the curve quartic at each z, shape ``z.shape + (4,)``, unlabeled.

    Eigenvalues of the companion matrix followed by guarded Newton steps.
    """
    z = np.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    b, t = params.b, params.t
    comp = np.zeros((flat.size, 4, 4), dtype=complex)
    comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
    comp[:, 0, 3] = t * b
    comp[:, 1, 3] = -b * flat
    comp[:, 2, 3] = -(1.0 - b)
    comp[:, 3, 3] = flat
    roots = np.linalg.eigvals(comp)
    zz = flat[:, None]
    for _ in range(polish):
        f = quartic(params, roots, zz)
        fp = _quartic_prime(params, roots, zz)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = f / fp
        sep = _pairwise_separation(roots)
        ok = np.isfinite(step) & (np.abs(step) < 0.25 * sep)
        roots = np.where(ok, roots - step, roots)
    return roots.reshape(z.shape + (4,))


# ---------------------------------------------------------------------------
# discriminants and phase


@dataclasses.dataclass(frozen=True)
class PhaseReport:
    b: float
    t: float
    delta: float
    delta_c: float
    delta_q: float
    phase: Phase

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["phase"] = self.phase.value
        return d


def delta_c(b, t):
    """Reduced discriminant; the full one is (1 - t) b^2 delta_c."""
    return 108.0 * b * t * t + (-9.0 * b * b - 90.0 * b - 9.0) * t + 8.0 * b**3 - 15.0 * b * b + 6.0 * b + 1.0


def delta_q(b):
    """Sign of the discriminant of delta_c as a quadratic in t.

    Uses the customary normalisation; the plain discriminant B^2 - 4AC is 9x this.
    """
    return -3.0 * (b - 3.0) * (5.0 * b + 1.0) ** 3


def discriminants(params: ModelParams) -> PhaseReport:
    b, t = params.b, params.t
    dc = delta_c(b, t)
    return PhaseReport(b, t, (1.0 - t) * b * b * dc, dc, delta_q(b), _phase_of(b))


def _phase_of(b):
    if abs(b - 3.0) <= 1e-12:
        return Phase.BOUNDARY
    return Phase.THREE_CUT if b > 3.0 else Phase.UNSUPPORTED


def classify_phase(params: ModelParams) -> PhaseReport:
    return discriminants(params)


# ---------------------------------------------------------------------------
# critical points, branch points, support


EDGE_LABELS = ("-z3", "-z2", "-z1", "z1", "z2", "z3")


@dataclasses.dataclass(frozen=True)
class SupportData:
    """Critical points of z(xi) and the three-interval support they generate."""

    y_roots: tuple
    p: float
    q: float
    r: float
    z1: float = math.nan
    z2: float = math.nan
    z3: float = math.nan
    rho_edge: dict = dataclasses.field(default_factory=dict)

    @property
    def breakpoints(self):
        return np.array([-self.z3, -self.z2, -self.z1, self.z1, self.z2, self.z3])

    @property
    def intervals(self):
        """Support intervals ordered left to right: outer-left, center, outer-right."""
        return ((-self.z3, -self.z2), (-self.z1, self.z1), (self.z2, self.z3))

    def edge(self, label: str) -> float:
        return dict(zip(EDGE_LABELS, self.breakpoints))[label]

    def is_right_edge(self, label: str) -> bool:
        return label in ("-z2", "z1", "z3")

    def region(self, x):
        """Real-axis region index 0..6; odd indices are the closed cuts."""
        x = np.asarray(x, dtype=float)
        bp = self.breakpoints
        idx = np.searchsorted(bp, x, side="left")
        # closed cuts: a left endpoint belongs to its cut
        on_left_end = np.isin(x, bp[[0, 2, 4]])
        idx = np.where(on_left_end, idx + 1, idx)
        return idx

    def contains(self, x, closed: bool = True):
        x = np.asarray(x, dtype=float)
        if closed:
            return (self.region(x) % 2) == 1
        return np.any([(x > lo) & (x < hi) for lo, hi in self.intervals], axis=0)

    def to_dict(self):
        return {
            "y_roots": list(self.y_roots),
            "p": self.p,
            "q": self.q,
            "r": self.r,
            "z1": self.z1,
            "z2": self.z2,
            "z3": self.z3,
            "rho_edge": dict(self.rho_edge),
        }


def _cubic_coefficients(params):
    b, t = params.b, params.t
    return (1.0, -(1.0 + 2.0 * b), b * b + (3.0 * t - 1.0) * b, -t * b * b)


def critical_points(params: ModelParams) -> SupportData:
    """Three positive roots y1<y2<y3 of the critical-point cubic, via the trigonometric method."""
    if params.b <= 3.0:
        raise PhaseError("three positive critical values are only guaranteed for b > 3")
    _, B, C, D = _cubic_coefficients(params)
    # depressed cubic x^3 + P x + Q with y = x - B/3
    P = C - B * B / 3.0
    Q = 2.0 * B**3 / 27.0 - B * C / 3.0 + D
    m = 2.0 * math.sqrt(-P / 3.0)
    arg = 3.0 * Q / (P * m)
    theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
    ys = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - B / 3.0 for k in range(3)]
    polished = []
    for y in ys:
        for _ in range(3):
            f = ((y + B) * y + C) * y + D
            fp = (3.0 * y + 2.0 * B) * y + C
            if fp != 0.0:
                y -= f / fp
        polished.append(y)
    y1, y2, y3 = sorted(polished)
    if not (0.0 < y1 < y2 < y3):
        raise PhaseError(f"critical cubic roots not positive and distinct: {(y1, y2, y3)}")
    return SupportData((y1, y2, y3), math.sqrt(y1), math.sqrt(y2), math.sqrt(y3))


def _edge_constant(params, xi_c):
    second = float(np.real(z_second_derivative(params, xi_c)))
    if abs(second) < 1e-10:
        raise DegenerateEdge(f"z''({xi_c}) = {second} vanishes")
    return math.sqrt(2.0 / abs(second))


@functools.lru_cache(maxsize=64)
def branch_points(params: ModelParams) -> SupportData:
    """Branch points z_j = z(critical point) and the square-root edge constants."""
    cp = critical_points(params)
    z1, z2, z3 = (float(evaluate_z_of_xi(params, c)) for c in (cp.p, cp.q, cp.r))
    if not (0.0 < z1 < z2 < z3):
        raise OrderingViolation(f"branch points not increasing: {(z1, z2, z3)}")
    rho = {}
    for label, xi_c in (("z1", cp.p), ("z2", cp.q), ("z3", cp.r)):
        rho[label] = _edge_constant(params, xi_c)
        rho["-" + label] = _edge_constant(params, -xi_c)
    rho = {k: rho[k] for k in EDGE_LABELS}
    return dataclasses.replace(cp, z1=z1, z2=z2, z3=z3, rho_edge=rho)


# ---------------------------------------------------------------------------
# sheet labeling


@dataclasses.dataclass(frozen=True)
class SheetValues:
    z: complex
    xi: np.ndarray
    side: Side

    def __getitem__(self, label: int) -> complex:
        """Sheet value by its 1-based label."""
        return complex(self.xi[label - 1])


_PERMS = np.array(list(itertools.permutations(range(4))))


def _match(prev, new):
    cost = np.abs(new[_PERMS] - prev[None, :]).max(axis=1)
    k = int(np.argmin(cost))
    return new[_PERMS[k]], float(cost[k])


def track_path(params: ModelParams, path, start):
    """Continue labeled roots ``start`` (at ``path[0]``) through the points of ``path``.

    Steps are subdivided until nearest-neighbour matching is unambiguous.
    Returns an array ``(len(path), 4)``.
    """
    prof = get_profile()
    path = np.asarray(path, dtype=complex)
    cur = np.asarray(start, dtype=complex).copy()
    out = np.empty((path.size, 4), dtype=complex)
    out[0] = cur
    for k in range(1, path.size):
        za, zb = path[k - 1], path[k]
        s, ds = 0.0, 1.0
        while s < 1.0:
            sep = _pairwise_separation(cur).min()
            if sep < prof.collision_distance:
                raise ContinuationFailure(
                    f"sheets within {sep:.3g} near z = {za + s * (zb - za)}")
            trial = min(1.0, s + ds)
            zt = za + trial * (zb - za)
            new = quartic_roots(params, zt)
            matched, dist = _match(cur, new)
            if dist < 0.3 * sep:
                cur, s = matched, trial
                ds = min(1.0, 2.0 * ds)
            else:
                ds *= 0.5
                if ds < 1e-13:
                    raise ContinuationFailure(f"step underflow tracking toward z = {zb}")
        out[k] = cur
    return out


def _anchor_sheets(params):
    z0 = params.anchor
    roots = quartic_roots(params, z0)
    return z0, roots[np.argsort(-roots.real)]


def _track_to(params, z, elevation):
    z0, start = _anchor_sheets(params)
    h = max(z.imag, elevation)
    path = [z0, complex(z0, h), complex(z.real, h), z]
    return track_path(params, path, start)[-1]


def _asymptotic_labels(params, z):
    """Label roots by their limits z, a, 0, -a; valid for |z| beyond the anchor radius."""
    roots = quartic_roots(params, z)
    first = int(np.argmax(np.abs(roots)))
    rest = sorted((k for k in range(4) if k != first), key=lambda k: -roots[k].real)
    return roots[[first] + rest]


def _upper_sheets(params, z):
    """Labeled sheets at z with Im z > 0."""
    if abs(z) >= params.anchor:
        return _asymptotic_labels(params, z)
    elevation = 1.0 + params.a
    try:
        return _track_to(params, z, elevation)
    except ContinuationFailure:
        return _track_to(params, z, 1.7 * elevation + 0.3)


@functools.lru_cache(maxsize=64)
def _region_labels(params: ModelParams):
    """Per real-axis region, how labels map onto sorted roots.

    Off the cuts all four roots are real and keep their order; on a cut one
    conjugate pair appears.  The table is read off from continued values
    slightly above each region.
    """
    sd = branch_points(params)
    bp = sd.breakpoints
    reps = [bp[0] - 1.0, 0.5 * (bp[0] + bp[1]), 0.5 * (bp[1] + bp[2]), 0.0,
            0.5 * (bp[3] + bp[4]), 0.5 * (bp[4] + bp[5]), bp[5] + 1.0]
    eps = 1e-7 * (1.0 + sd.z3)
    table = []
    for k, x in enumerate(reps):
        xi = _upper_sheets(params, complex(x, eps))
        if k % 2 == 0:
            table.append(("off", tuple(int(i) for i in np.argsort(xi.real))))
        else:
            order = np.argsort(-np.abs(xi.imag))
            pair, real = order[:2], order[2:]
            up = int(pair[0] if xi[pair[0]].imag > 0 else pair[1])
            dn = int(pair[1] if up == pair[0] else pair[0])
            lo, hi = (int(i) for i in real[np.argsort(xi[real].real)])
            table.append(("cut", (up, dn, lo, hi)))
    return tuple(table)


def boundary_values(params: ModelParams, x, side: Side = Side.ABOVE):
    """Labeled sheet values at real points, as limits from ``side``.

    Vectorised; returns ``x.shape + (4,)``.  Off the cuts the side is ignored.
    """
    side = Side(side)
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    sd = branch_points(params)
    table = _region_labels(params)
    roots = quartic_roots(params, flat.astype(complex))
    regions = sd.region(flat)
    out = np.empty((flat.size, 4), dtype=complex)
    for k, (kind, labels) in enumerate(table):
        mask = regions == k
        if not mask.any():
            continue
        rk = roots[mask]
        if kind == "off":
            srt = np.sort(rk.real, axis=1)
            vals = np.empty_like(rk)
            for pos, lab in enumerate(labels):
                vals[:, lab] = srt[:, pos]
        else:
            if side == Side.OFF_AXIS:
                raise ValueError("a side (above/below) is required for points on a cut")
            up, dn, lo, hi = labels
            order = np.argsort(-np.abs(rk.imag), axis=1)
            rows = np.arange(rk.shape[0])[:, None]
            pair = rk[rows, order[:, :2]]
            real = np.sort(rk[rows, order[:, 2:]].real, axis=1)
            re = pair.real.mean(axis=1)
            im = np.abs(pair.imag).mean(axis=1)
            sign = 1.0 if side == Side.ABOVE else -1.0
            vals = np.empty_like(rk)
            vals[:, up] = re + 1j * sign * im
            vals[:, dn] = re - 1j * sign * im
            vals[:, lo] = real[:, 0]
            vals[:, hi] = real[:, 1]
        out[mask] = vals
    return out.reshape(x.shape + (4,))


def solve_sheets(params: ModelParams, z, side: Side = Side.OFF_AXIS) -> SheetValues:
    """Four labeled roots of the curve at z.

    Real z on a cut needs ``side`` above or below; the boundary value is the
    limit from that half-plane.
    """
    params.require_three_cut()
    z = complex(z)
    side = Side(side)
    sd = branch_points(params)
    if abs(z.imag) <= get_profile().boundary_tolerance * (1.0 + sd.z3):
        eff = Side.ABOVE if side == Side.OFF_AXIS else side
        if side == Side.OFF_AXIS and bool(sd.contains(z.real)):
            raise ValueError(f"z = {z.real} lies on a cut; specify side above or below")
        xi = boundary_values(params, np.array([z.real]), eff)[0]
        return SheetValues(z, xi, side)
    if z.imag > 0:
        xi = _upper_sheets(params, z)
    else:
        xi = np.conj(_upper_sheets(params, z.conjugate()))
    return SheetValues(z, xi, Side.OFF_AXIS)


def vertical_sheets(params: ModelParams, x: float, heights):
    """Labeled sheets at ``x + i*h`` for increasing positive heights.

    Starts from the upper boundary value at the real point x and tracks
    upward, so the result is continuous with the "+" side of any cut at x.
    """
    heights = np.asarray(heights, dtype=float)
    order = np.argsort(heights)
    start = boundary_values(params, np.array([x]), Side.ABOVE)[0]
    path = np.concatenate([[complex(x, 0.0)], x + 1j * heights[order]])
    tracked = track_path(params, path, start)[1:]
    out = np.empty_like(tracked)
    out[order] = tracked
    return out
