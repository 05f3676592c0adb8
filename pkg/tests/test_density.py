import numpy as np
import pytest

from extsource.curve import ModelParams, branch_points
from extsource.density import bin_masses, cumulative, density_curve, edge_constants, masses, rho, rho_with_flag


@pytest.mark.parametrize("a", [2.0, 2.5, 3.0])
@pytest.mark.parametrize("t", [0.2, 0.5, 0.8])
def test_mass_identities(a, t):
    m = masses(ModelParams(a, t))
    assert m == pytest.approx(((1 - t) / 2, t, (1 - t) / 2), abs=1e-8)


def test_density_vanishes_off_support(params):
    sd = branch_points(params)
    vals, inside = rho_with_flag(params, sd, [sd.z3 + 0.1, 0.5 * (sd.z1 + sd.z2), -sd.z3 - 1])
    assert not inside.any()
    assert np.all(vals == 0.0)


def test_density_positive_inside(params):
    sd = branch_points(params)
    xs = np.concatenate([np.linspace(lo, hi, 25)[1:-1] for lo, hi in sd.intervals])
    assert np.all(rho(params, sd, xs) > 0)


def test_density_even(params):
    xs = np.linspace(0.05, 3.2, 30)
    assert np.allclose(rho(params, None, xs), rho(params, None, -xs), atol=1e-13)


def test_center_value(params):
    assert rho(params, None, 0.0) == pytest.approx(0.2385, abs=1e-4)


def test_edge_constants_are_the_support_constants(params):
    assert edge_constants(params) == pytest.approx(branch_points(params).rho_edge)


def test_cumulative_and_bins(params):
    sd = branch_points(params)
    assert cumulative(params, sd, sd.z3 + 1) == pytest.approx(1.0, abs=1e-10)
    assert cumulative(params, sd, 0.0) == pytest.approx(0.5, abs=1e-10)
    edges = np.arange(-4.0, 4.01, 0.1)
    bm = bin_masses(params, sd, edges)
    assert bm.sum() == pytest.approx(1.0, abs=1e-8)
    assert np.all(bm >= -1e-14)


def test_density_curve(params):
    dc = density_curve(params, [0.0, 2.0])
    assert len(dc.samples) == 2
    assert sum(dc.masses) == pytest.approx(1.0)
