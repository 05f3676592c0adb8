"""Multiple Hermite polynomials, the 4x4 matrix Y and the correlation kernel.

Everything here runs in mpmath.  The weights are n-scaled,
w_j(x) = exp(-n (x^2/2 - a_j x)) with (a_1, a_2, a_3) = (a, 0, -a), and the
working precision grows linearly with n because both the moment solve and
the upward recursion for Cauchy transforms cancel about 2n digits.
"""
from __future__ import annotations

import dataclasses
import functools
import math
import threading

import mpmath as mp
import numpy as np

from .curve import ModelParams, Side
from .errors import IllConditioned, PrecisionLoss
from .precision import get_profile

__all__ = [
    "FiniteSizeParams",
    "MopFamily",
    "YMatrix",
    "KernelEval",
    "MopEngine",
    "split_counts",
    "moments",
    "mop_build",
    "cauchy_transform",
    "assemble_Y",
    "kernel_Kn",
    "hat_kernel",
    "verify_ode",
    "verify_recurrence",
    "jump_residual",
    "trace_check",
]


def split_counts(n: int, t: float):
    """(n1, n2, n3) with n1 = n3 and n2 closest to t n; ties go to the smaller n2."""
    if n < 1:
        raise ValueError("n must be positive")
    best = None
    for n2 in range(n % 2, n + 1, 2):
        key = (abs(n2 - t * n), n2)
        if best is None or key < best[0]:
            best = (key, n2)
    n2 = best[1]
    n1 = (n - n2) // 2
    return n1, n2, n1


@dataclasses.dataclass(frozen=True)
class FiniteSizeParams:
    n: int
    n1: int
    n2: int
    n3: int
    a: float

    def __post_init__(self):
        if self.n1 != self.n3 or self.n1 + self.n2 + self.n3 != self.n:
            raise ValueError(f"inconsistent counts {(self.n1, self.n2, self.n3)} for n = {self.n}")
        if min(self.n1, self.n2, self.n3) < 0:
            raise ValueError("counts must be nonnegative")

    @classmethod
    def from_model(cls, params: ModelParams, n: int) -> "FiniteSizeParams":
        n1, n2, n3 = split_counts(n, params.t)
        return cls(n, n1, n2, n3, params.a)

    @property
    def N(self) -> int:
        return self.n

    @property
    def index(self):
        return (self.n1, self.n2, self.n3)

    @property
    def shifts(self):
        return (self.a, 0.0, -self.a)

    def digits(self) -> int:
        return get_profile().working_digits(self.n, 3.0 + self.a)


# ---------------------------------------------------------------------------
# small dense linear algebra in mpmath (no singularity heuristics)


def _lu(rows):
    """In-place partial-pivot LU on a list of lists; returns (lu, perm, sign)."""
    a = [list(r) for r in rows]
    m = len(a)
    perm = list(range(m))
    sign = 1
    for k in range(m):
        p = max(range(k, m), key=lambda i: abs(a[i][k]))
        if a[p][k] == 0:
            raise IllConditioned("exactly singular matrix", math.inf)
        if p != k:
            a[k], a[p] = a[p], a[k]
            perm[k], perm[p] = perm[p], perm[k]
            sign = -sign
        piv = a[k][k]
        for i in range(k + 1, m):
            f = a[i][k] / piv
            if f:
                a[i][k] = f
                row_i, row_k = a[i], a[k]
                for j in range(k + 1, m):
                    row_i[j] -= f * row_k[j]
            else:
                a[i][k] = f
    return a, perm, sign


def _lu_solve(lu, perm, b):
    m = len(lu)
    y = [b[perm[i]] for i in range(m)]
    for i in range(m):
        s = y[i]
        for j in range(i):
            s -= lu[i][j] * y[j]
        y[i] = s
    for i in reversed(range(m)):
        s = y[i]
        for j in range(i + 1, m):
            s -= lu[i][j] * y[j]
        y[i] = s / lu[i][i]
    return y


def solve(rows, b):
    lu, perm, _ = _lu(rows)
    return _lu_solve(lu, perm, b)


def det(rows):
    lu, _, sign = _lu(rows)
    d = mp.mpf(sign)
    for i in range(len(lu)):
        d *= lu[i][i]
    return d


def _cond1(rows):
    """1-norm condition number through an explicit inverse."""
    m = len(rows)
    lu, perm, _ = _lu(rows)
    inv_cols = [_lu_solve(lu, perm, [mp.mpf(int(i == k)) for i in range(m)]) for k in range(m)]
    norm_a = max(sum(abs(rows[i][j]) for i in range(m)) for j in range(m))
    norm_inv = max(sum(abs(c[i]) for i in range(m)) for c in inv_cols)
    return norm_a * norm_inv


# ---------------------------------------------------------------------------
# moments and families


def _moment_table(a_j, N, kmax):
    """m_k = int s^k exp(-N (s^2/2 - a_j s)) ds for k = 0..kmax."""
    mu = mp.mpf(a_j)
    var = 1 / mp.mpf(N)
    raw = [mp.mpf(1), mu]
    for k in range(2, kmax + 1):
        raw.append(mu * raw[-1] + (k - 1) * var * raw[-2])
    pref = mp.exp(N * mu * mu / 2) * mp.sqrt(2 * mp.pi / N)
    return [pref * r for r in raw[: kmax + 1]]


def moments(fp: FiniteSizeParams, j: int, k: int):
    """k-th moment of the j-th weight (j = 1, 2, 3), as an mpf."""
    with mp.workdps(fp.digits()):
        return +_moment_table(fp.shifts[j - 1], fp.N, k)[k]


@dataclasses.dataclass(frozen=True)
class MopFamily:
    index: tuple
    coeffs: tuple  # ascending, monic
    norms: tuple  # h^(j) = int P x^{n_j} w_j
    q_norms: tuple  # q^(j) = int P x^{n_j + 1} w_j
    c_consts: tuple  # -2 pi i / h^(j) of the family lowered in direction j (None if n_j = 0)
    sub_leading: object
    condition: float
    orthogonality_residual: float
    digits: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


_cache: dict = {}
_cache_lock = threading.Lock()


def _build_raw(a, N, index, dps):
    """Monic coefficients, condition estimate and scaled orthogonality residual."""
    n = sum(index)
    shifts = (a, 0.0, -a)
    tables = [_moment_table(shifts[j], N, n + max(index) + 2) for j in range(3)]
    if n == 0:
        return (mp.mpf(1),), 1.0, 0.0, tables
    rows, rhs = [], []
    for j in range(3):
        for i in range(index[j]):
            row = [tables[j][i + k] for k in range(n)]
            scale = max(abs(v) for v in row + [tables[j][i + n]])
            rows.append([v / scale for v in row])
            rhs.append(-tables[j][i + n] / scale)
    cond = _cond1(rows)
    if mp.log10(cond) > dps - 12:
        raise IllConditioned(f"moment matrix for index {index} at N = {N}", float(cond))
    coeffs = solve(rows, rhs) + [mp.mpf(1)]
    worst = mp.mpf(0)
    for j in range(3):
        for i in range(index[j]):
            terms = [coeffs[k] * tables[j][i + k] for k in range(n + 1)]
            big = max(abs(v) for v in terms)
            if big:
                worst = max(worst, abs(mp.fsum(terms)) / big)
    return tuple(coeffs), float(cond), float(worst), tables


def _norm(coeffs, table, shift):
    return mp.fsum(c * table[k + shift] for k, c in enumerate(coeffs))


def mop_build(fp: FiniteSizeParams, index=None) -> MopFamily:
    """Monic multiple Hermite polynomial P_index with its norms; cached per precision."""
    index = tuple(fp.index if index is None else index)
    if min(index) < 0:
        raise ValueError(f"negative index {index}")
    dps = fp.digits()
    key = (fp.a, fp.N, index, dps)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    with mp.workdps(dps):
        coeffs, cond, resid, tables = _build_raw(fp.a, fp.N, index, dps)
        norms = tuple(_norm(coeffs, tables[j], index[j]) for j in range(3))
        q_norms = tuple(_norm(coeffs, tables[j], index[j] + 1) for j in range(3))
        c_consts = []
        for j in range(3):
            if index[j] == 0:
                c_consts.append(None)
                continue
            low = list(index)
            low[j] -= 1
            lc, _, _, lt = _build_raw(fp.a, fp.N, tuple(low), dps)
            c_consts.append(-2j * mp.pi / _norm(lc, lt[j], low[j]))
        fam = MopFamily(index, coeffs, norms, q_norms, tuple(c_consts),
                        coeffs[-2] if len(coeffs) > 1 else mp.mpf(0), cond, resid, dps)
    with _cache_lock:
        _cache[key] = fam
    return fam


# ---------------------------------------------------------------------------
# Cauchy transforms


def _upper(z, side):
    if mp.im(z) != 0:
        return mp.im(z) > 0
    if side not in (Side.ABOVE, Side.BELOW, "above", "below"):
        raise ValueError("real z needs side above or below")
    return Side(side) == Side.ABOVE


def _cauchy_table(fp, j, z, kmax, side, with_derivative=False):
    """I_k = C(s^k w_j)(z) for k = 0..kmax (and derivatives), plus a cancellation estimate."""
    N = mp.mpf(fp.N)
    mu = mp.mpf(fp.shifts[j - 1])
    w = mp.sqrt(N / 2) * (z - mu)
    om = mp.exp(-N * (z * z / 2 - mu * z))
    if _upper(z, side):
        i0 = om * mp.erfc(-1j * w) / 2
    else:
        i0 = -om * mp.erfc(1j * w) / 2
    table = _moment_table(fp.shifts[j - 1], fp.N, kmax)
    tpi = 2j * mp.pi
    vals = [i0]
    growth = abs(i0)
    for k in range(1, kmax + 1):
        term = table[k - 1] / tpi
        vals.append(term + z * vals[-1])
        growth = max(growth, abs(term))
    if not with_derivative:
        return vals, growth
    ders = [-N * (table[0] / tpi + (z - mu) * i0)]
    for k in range(1, kmax + 1):
        ders.append(vals[k - 1] + z * ders[-1])
    return vals, growth, ders


def _check_loss(value, scale, dps, what):
    if value == 0 or scale == 0:
        return
    lost = mp.log10(scale / abs(value))
    if lost > dps - 16:
        raise PrecisionLoss(f"{what}: about {float(lost):.0f} digits cancelled at {dps} digits")


def cauchy_transform(fp: FiniteSizeParams, fam: MopFamily, j: int, z, side=Side.OFF_AXIS):
    """C(P w_j)(z); real z takes the boundary value from ``side``."""
    dps = fp.digits()
    with mp.workdps(dps):
        z = mp.mpc(z)
        vals, growth = _cauchy_table(fp, j, z, fam.degree, side)
        terms = [c * vals[k] for k, c in enumerate(fam.coeffs)]
        out = mp.fsum(terms)
        _check_loss(out, max(abs(v) for v in terms) if terms else 0, dps, "Cauchy transform")
        return out


# ---------------------------------------------------------------------------
# Y, Psi and the kernel


@dataclasses.dataclass(frozen=True)
class YMatrix:
    x: complex
    side: Side
    y: mp.matrix
    det_residual: float

    def as_numpy(self) -> np.ndarray:
        return np.array([[complex(self.y[i, j]) for j in range(4)] for i in range(4)])


@dataclasses.dataclass(frozen=True)
class KernelEval:
    x: float
    y: float
    kn: float
    hat_kn: float
    n: int


def _families(fp, index):
    if min(index) < 1:
        raise ValueError(f"Y needs every count >= 1, got {index}")
    top = mop_build(fp, index)
    rows = [(top, mp.mpf(1))]
    for j in range(3):
        low = list(index)
        low[j] -= 1
        rows.append((mop_build(fp, tuple(low)), top.c_consts[j]))
    return top, rows


def _poly(coeffs, z):
    acc = mp.mpc(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _poly_der(coeffs, z):
    acc = mp.mpc(0)
    for k in range(len(coeffs) - 1, 0, -1):
        acc = acc * z + k * coeffs[k]
    return acc


def _y_entries(fp, index, z, side, derivative=False):
    """Rows of Y (and Y') at z for the given top index, at the current mp precision."""
    top, rows = _families(fp, index)
    deg = top.degree
    tabs = [_cauchy_table(fp, j, z, deg, side, with_derivative=derivative) for j in (1, 2, 3)]
    dps = mp.mp.dps
    Y = mp.matrix(4, 4)
    D = mp.matrix(4, 4) if derivative else None
    for r, (fam, c) in enumerate(rows):
        Y[r, 0] = c * _poly(fam.coeffs, z)
        if derivative:
            D[r, 0] = c * _poly_der(fam.coeffs, z)
        for j in range(3):
            vals = tabs[j][0]
            terms = [cf * vals[k] for k, cf in enumerate(fam.coeffs)]
            s = mp.fsum(terms)
            _check_loss(s, max(abs(v) for v in terms), dps, "Y entry")
            Y[r, j + 1] = c * s
            if derivative:
                ders = tabs[j][2]
                D[r, j + 1] = c * mp.fsum(cf * ders[k] for k, cf in enumerate(fam.coeffs))
    return (Y, D) if derivative else Y


def _rows_of(m):
    return [[m[i, j] for j in range(m.cols)] for i in range(m.rows)]


def assemble_Y(fp: FiniteSizeParams, x, side=Side.OFF_AXIS, index=None) -> YMatrix:
    """Y at x (complex, or real with a side)."""
    index = tuple(fp.index if index is None else index)
    with mp.workdps(fp.digits()):
        z = mp.mpc(x)
        Y = _y_entries(fp, index, z, side)
        d = det(_rows_of(Y))
        return YMatrix(complex(z), Side(side), Y, float(abs(d - 1)))


def jump_residual(fp: FiniteSizeParams, x: float) -> float:
    """||Y+ - Y- J|| / ||Y+|| at real x with J the weight jump."""
    with mp.workdps(fp.digits()):
        yp = assemble_Y(fp, x, Side.ABOVE).y
        ym = assemble_Y(fp, x, Side.BELOW).y
        xm = mp.mpf(x)
        J = mp.eye(4)
        for j, mu in enumerate(fp.shifts, start=1):
            J[0, j] = mp.exp(-fp.N * (xm * xm / 2 - mp.mpf(mu) * xm))
        diff = yp - ym * J
        return float(mp.mnorm(diff, 1) / mp.mnorm(yp, 1))


def _psi_parts(fp, index, z):
    """Psi and Psi' at complex z with the n-scaled exponential factors."""
    Y, dY = _y_entries(fp, index, z, Side.OFF_AXIS, derivative=True)
    top, rows = _families(fp, index)
    N = mp.mpf(fp.N)
    expo = [-N * z * z / 2] + [-N * mp.mpf(mu) * z for mu in fp.shifts]
    rates = [-N * z] + [-N * mp.mpf(mu) for mu in fp.shifts]
    scale = [mp.mpf(1)] + [1 / c for _, c in rows[1:]]
    psi, dpsi = mp.matrix(4, 4), mp.matrix(4, 4)
    for i in range(4):
        for j in range(4):
            e = mp.exp(expo[j])
            psi[i, j] = scale[i] * Y[i, j] * e
            dpsi[i, j] = scale[i] * (dY[i, j] + Y[i, j] * rates[j]) * e
    return psi, dpsi


def ode_matrix(fp: FiniteSizeParams, z, index=None):
    """N A(z) with A the coefficient matrix of Psi' = N A Psi."""
    n1, n2, n3 = fp.index if index is None else index
    N = mp.mpf(fp.N)
    A = mp.matrix([[-z, n1 / N, n2 / N, n3 / N],
                   [-1, -mp.mpf(fp.shifts[0]), 0, 0],
                   [-1, 0, -mp.mpf(fp.shifts[1]), 0],
                   [-1, 0, 0, -mp.mpf(fp.shifts[2])]])
    return N * A


def verify_ode(fp: FiniteSizeParams, z, index=None) -> float:
    """||Psi' - N A Psi|| / ||N A Psi|| at complex z."""
    index = tuple(fp.index if index is None else index)
    with mp.workdps(fp.digits()):
        z = mp.mpc(z)
        if mp.im(z) == 0:
            raise ValueError("verify_ode needs z off the real axis")
        psi, dpsi = _psi_parts(fp, index, z)
        rhs = ode_matrix(fp, z, index) * psi
        return float(mp.mnorm(dpsi - rhs, 1) / mp.mnorm(rhs, 1))


def recurrence_matrix(fp: FiniteSizeParams, z, index):
    n1, n2, n3 = index
    N = mp.mpf(fp.N)
    a1, a2, a3 = (mp.mpf(s) for s in fp.shifts)
    return mp.matrix([[z - a1, -n1 / N, -n2 / N, -n3 / N],
                      [1, 0, 0, 0],
                      [1, 0, a2 - a1, 0],
                      [1, 0, 0, a3 - a1]])


def verify_recurrence(fp: FiniteSizeParams, index, z) -> float:
    """||Psi_{index+e1} - U Psi_index|| / ||Psi_{index+e1}||."""
    index = tuple(index)
    up = (index[0] + 1, index[1], index[2])
    with mp.workdps(fp.digits()):
        z = mp.mpc(z)
        lhs, _ = _psi_parts(fp, up, z)
        psi, _ = _psi_parts(fp, index, z)
        diff = lhs - recurrence_matrix(fp, z, index) * psi
        return float(mp.mnorm(diff, 1) / mp.mnorm(lhs, 1))


class MopEngine:
    """Kernel evaluation with the families, Y(x) e1 and the left row cached per point."""

    def __init__(self, fp: FiniteSizeParams):
        self.fp = fp
        self.dps = fp.digits()
        self._col = {}
        self._row = {}
        with mp.workdps(self.dps):
            _families(fp, fp.index)

    def _column(self, x):
        """(Y(x) e1, Y'(x) e1); polynomials only, so no side is needed."""
        hit = self._col.get(x)
        if hit is None:
            _, rows = _families(self.fp, self.fp.index)
            z = mp.mpf(x)
            col = [c * _poly(f.coeffs, z) for f, c in rows]
            der = [c * _poly_der(f.coeffs, z) for f, c in rows]
            hit = self._col[x] = (col, der)
        return hit

    def _left(self, y):
        """(0, e^{n a_j y}) Y^{-1}(y), independent of the side."""
        hit = self._row.get(y)
        if hit is None:
            Y = _y_entries(self.fp, self.fp.index, mp.mpc(y), Side.ABOVE)
            ym = mp.mpf(y)
            r = [mp.mpf(0)] + [mp.exp(self.fp.N * mp.mpf(mu) * ym) for mu in self.fp.shifts]
            # solve Y^T u = r
            yt = [[Y[j, i] for j in range(4)] for i in range(4)]
            hit = self._row[y] = solve(yt, r)
        return hit

    def kn(self, x: float, y: float) -> float:
        x, y = float(x), float(y)
        with mp.workdps(self.dps):
            N = self.fp.N
            left = self._left(y)
            col, der = self._column(x)
            tpi = 2j * mp.pi
            if abs(x - y) < 1e-8:
                val = mp.fsum(left[i] * der[i] for i in range(4)) / tpi
                pref = mp.exp(-N * mp.mpf(x) ** 2 / 2)
                return float(mp.re(pref * val))
            val = mp.fsum(left[i] * col[i] for i in range(4)) / (tpi * (mp.mpf(x) - mp.mpf(y)))
            pref = mp.exp(-N * (mp.mpf(x) ** 2 + mp.mpf(y) ** 2) / 4)
            return float(mp.re(pref * val))

    def diagonal(self, xs):
        return np.array([self.kn(x, x) for x in np.atleast_1d(xs)])


@functools.lru_cache(maxsize=16)
def engine(fp: FiniteSizeParams, dps: int | None = None) -> MopEngine:
    return MopEngine(fp)


def _engine(fp):
    return engine(fp, fp.digits())


def kernel_Kn(fp: FiniteSizeParams, x: float, y: float, params: ModelParams | None = None) -> KernelEval:
    """K_n(x, y); the conjugated value is filled when model parameters are given."""
    kn = _engine(fp).kn(x, y)
    hat = kn
    if params is not None:
        from .lambdas import h_function

        hx, hy = h_function(params, None, [x, y])
        hat = math.exp(fp.N * (hx - hy)) * kn
    return KernelEval(float(x), float(y), kn, hat, fp.n)


def hat_kernel(fp: FiniteSizeParams, params: ModelParams, x: float, y: float, strict: bool = True) -> float:
    """exp(n (h(x) - h(y))) K_n(x, y) for x, y in the support."""
    from .lambdas import h_function

    hx, hy = h_function(params, None, [x, y], strict=strict)
    return math.exp(fp.N * (hx - hy)) * _engine(fp).kn(x, y)


def trace_check(fp: FiniteSizeParams, params: ModelParams | None = None, tol: float = 1e-9):
    """Integral of K_n(x, x) over the real line, which should equal n."""
    from .quadrature import adaptive_gl

    eng = _engine(fp)
    reach = fp.a + 1.0 + 2.0 * math.sqrt(fp.a * fp.a + 1.0) + 9.0 / math.sqrt(fp.n)
    f = lambda xs: eng.diagonal(xs)
    pieces = np.linspace(-reach, reach, 9)
    total = sum(adaptive_gl(f, lo, hi, tol=tol, order=16) for lo, hi in zip(pieces[:-1], pieces[1:]))
    return {"n": fp.n, "integral": float(total), "relative_error": abs(total - fp.n) / fp.n, "reach": reach}
