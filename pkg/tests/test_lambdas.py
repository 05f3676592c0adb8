import cmath

import numpy as np
import pytest

from extsource.curve import Side, branch_points, solve_sheets
from extsource.errors import OutOfSupport, PathCrossesCut
from extsource.lambdas import (
    asymptotic_form,
    check_jump_relations,
    check_sheet_ordering,
    h_function,
    integration_constants,
    lambda_real,
    lambdas_at,
)


def test_anchors(params):
    sd = branch_points(params)
    assert lambda_real(params, 1, sd.z3) == 0
    assert lambda_real(params, 2, sd.z3) == 0
    assert lambda_real(params, 3, sd.z1) == pytest.approx(lambda_real(params, 1, sd.z1, Side.ABOVE))
    assert lambda_real(params, 4, -sd.z2) == pytest.approx(lambda_real(params, 1, -sd.z2, Side.ABOVE))


def test_cut_requires_side(params):
    with pytest.raises(PathCrossesCut):
        lambda_real(params, 1, 0.0, Side.OFF_AXIS)


def test_jump_relations(params):
    report = check_jump_relations(params, n_samples=6)
    assert {r["line"] for r in report} == set(range(1, 8))
    assert max(r["max_residual"] for r in report) <= 1e-8


@pytest.mark.parametrize("z", [0.7 + 0.4j, 2.1 - 0.3j, -1.9 + 0.05j, 4.0 + 1.0j])
def test_derivative_is_sheet(params, z):
    h = 1e-4
    d = (lambdas_at(params, z + h) - lambdas_at(params, z - h)) / (2 * h)
    assert np.allclose(d, solve_sheets(params, z).xi, atol=1e-6)


def test_conjugation_right_of_support(params):
    # lambda_1 and lambda_2 are real on (z3, inf), so they commute with conjugation there
    w = 5.0 + 0.6j
    up, dn = lambdas_at(params, w), lambdas_at(params, w.conjugate())
    assert dn[:2] == pytest.approx(np.conj(up[:2]))


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_large_z_constants(params, j):
    err = [abs(lambda_real(params, j, x) - asymptotic_form(params, j, x)) for x in (1e2, 1e3)]
    # next term is O(1/z)
    assert err[1] < 0.15 * err[0]
    assert err[1] < 1e-3


def test_large_z_complex(params):
    z = 200.0 * cmath.exp(0.3j)
    for j in (1, 2, 3, 4):
        assert abs(lambdas_at(params, z)[j - 1] - asymptotic_form(params, j, z)) < 5e-2


def test_l_constants_shape(params):
    l = integration_constants(params)
    assert l.shape == (4,)
    # lambda_1 and lambda_2 are real right of z3, so l_1, l_2 are real
    assert abs(l[0].imag) < 1e-12 and abs(l[1].imag) < 1e-12


@pytest.mark.parametrize("interval", [1, 2, 3])
def test_sheet_ordering(params, interval):
    sd = branch_points(params)
    rep = check_sheet_ordering(params, sd, interval, 1e-2 * (sd.z3 - sd.z2), n_points=6)
    assert rep["holds"]
    assert rep["min_margin"] > 0


def test_sheet_ordering_offset_validated(params):
    with pytest.raises(ValueError):
        check_sheet_ordering(params, None, 1, 1.0)


def test_h_function(params):
    sd = branch_points(params)
    assert h_function(params, sd, sd.z1) == pytest.approx(-sd.z1**2 / 4)
    xs = np.array([0.2, 0.4])
    hx = h_function(params, sd, xs)
    assert hx.shape == (2,)
    with pytest.raises(OutOfSupport):
        h_function(params, sd, [sd.z3 + 1], strict=True)
