"""Global precision profile.

A single mutable profile holds the numerical tolerances and the working
precision used for the finite-n computations. ``use_profile`` swaps it for the
duration of a ``with`` block.
"""
from __future__ import annotations

import contextlib
import dataclasses
import threading


@dataclasses.dataclass(frozen=True)
class PrecisionProfile:
    name: str = "double"
    # spectral curve
    root_residual: float = 1e-10
    collision_distance: float = 1e-8
    pole_tolerance: float = 1e-14
    boundary_tolerance: float = 1e-12
    # quadrature
    quad_tolerance: float = 1e-12
    quad_max_depth: int = 30
    # finite-n arithmetic: decimal digits on top of the cancellation guard
    base_digits: int = 20
    # n up to which the base profile is used before switching to extended
    double_max_n: int = 24

    def working_digits(self, n: int, z_abs: float = 0.0) -> int:
        """Decimal digits for the moment solve and Cauchy recursions at size n.

        Shifted-Gaussian moment matrices and the upward Cauchy recursion lose
        roughly ``2 n`` digits; evaluation far from the origin loses another
        ``n log10 |z|``.
        """
        import math

        guard = 2 * n + int(n * math.log10(max(z_abs, 1.0)))
        extra = 0 if (self.name == "double" and n <= self.double_max_n) else self.base_digits
        return self.base_digits + extra + guard


DOUBLE = PrecisionProfile()
EXTENDED = PrecisionProfile(name="extended", base_digits=32)

PROFILES = {"double": DOUBLE, "extended": EXTENDED}

_lock = threading.Lock()
_current = DOUBLE


def get_profile() -> PrecisionProfile:
    return _current


def set_profile(profile: PrecisionProfile | str) -> None:
    global _current
    if isinstance(profile, str):
        profile = PROFILES[profile]
    with _lock:
        _current = profile


@contextlib.contextmanager
def use_profile(profile: PrecisionProfile | str):
    previous = get_profile()
    set_profile(profile)
    try:
        yield get_profile()
    finally:
        set_profile(previous)
