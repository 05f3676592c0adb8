import math

import numpy as np
import pytest
from scipy.special import airy

from extsource.asymptotics import airy_kernel, bulk_limit_check, edge_limit_check, sine_kernel
from extsource.curve import ModelParams


def test_sine_kernel_values():
    assert sine_kernel(0.3, 0.3) == 1.0
    assert sine_kernel(1.0, 0.0) == pytest.approx(0.0, abs=1e-16)
    assert sine_kernel(0.5, 0.0) == pytest.approx(2 / math.pi)
    assert sine_kernel(0.2, 0.9) == sine_kernel(0.9, 0.2)


def test_airy_ode():
    # y'' = x y on [-5, 5]: differentiate Ai' with a fourth-order stencil
    x = np.linspace(-5, 5, 201)
    h = 1e-3
    aip = lambda s: airy(s)[1]
    d = (-aip(x + 2 * h) + 8 * aip(x + h) - 8 * aip(x - h) + aip(x - 2 * h)) / (12 * h)
    assert np.max(np.abs(d - x * airy(x)[0])) <= 1e-8


def test_airy_kernel_diagonal():
    aip0 = airy(0.0)[1]
    assert airy_kernel(0.0, 0.0) == pytest.approx(aip0**2)
    # off-diagonal limit, Richardson on two separations
    k1, k2 = airy_kernel(0.0, 1e-4), airy_kernel(0.0, 5e-5)
    assert 2 * k2 - k1 == pytest.approx(aip0**2, rel=1e-8)


def test_airy_kernel_symmetric():
    u, v = np.meshgrid(np.linspace(-2, 1, 7), np.linspace(-2, 1, 7))
    assert np.allclose(airy_kernel(u, v), airy_kernel(v, u))


def test_bulk_small_n():
    rep = bulk_limit_check(ModelParams(2.0, 0.5), n_list=(6, 12), x0=0.0)
    assert rep.max_errors[1] < rep.max_errors[0]
    assert rep.scaled[12][2][2] == pytest.approx(1.0, abs=0.1)


def test_edge_mirror():
    p = ModelParams(2.0, 0.5)
    right = edge_limit_check(p, (6,), "z3")
    left = edge_limit_check(p, (6,), "-z3")
    assert np.allclose(right.scaled[6], left.scaled[6], atol=1e-8)
    assert left.extra["orientation"] == -1.0
