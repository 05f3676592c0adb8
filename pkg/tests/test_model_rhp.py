import math

import numpy as np
import pytest

from extsource.curve import ModelParams, branch_points
from extsource.errors import BranchPointSingularity
from extsource.model_rhp import (
    PRINTED_TABLE_NOTES,
    det_check,
    jump_matrix,
    model_constants,
    model_solution,
    normalization_check,
    value_table,
    verify_model_jumps,
)


def test_constants():
    c2, c3, c4 = model_constants(ModelParams(2.0, 0.5))
    assert c2 == pytest.approx(-0.5j)
    assert c3 == pytest.approx(-1j / math.sqrt(2))
    assert c2 == c4


def test_jumps(params):
    rep = verify_model_jumps(params, n_samples=20)
    assert set(rep) == {"(z2,z3)", "(-z1,z1)", "(-z3,-z2)"}
    assert all(r["max_residual"] <= 1e-9 for r in rep.values())


@pytest.mark.parametrize("a,t", [(2.5, 0.2), (3.0, 0.8)])
def test_jumps_other_parameters(a, t):
    rep = verify_model_jumps(ModelParams(a, t), n_samples=8)
    assert all(r["max_residual"] <= 1e-9 for r in rep.values())


def test_jump_matrices_unimodular():
    for cut in ("(z2,z3)", "(-z1,z1)", "(-z3,-z2)"):
        assert np.linalg.det(jump_matrix(cut)) == pytest.approx(1.0)
    assert np.array_equal(jump_matrix("(z2,z3)")[:2, :2], [[0, 1], [-1, 0]])


def test_normalization(params):
    norm = normalization_check(params)
    assert norm[1e4] <= 1e-3
    assert norm[1e5] <= 1e-4


def test_value_table(params):
    values, err = value_table(params)
    assert err <= 1e-8
    assert len(PRINTED_TABLE_NOTES) == 2


def test_det(params):
    assert det_check(params) <= 1e-8


def test_gap_structure_and_continuity(params):
    sd = branch_points(params)
    x = 0.5 * (sd.z1 + sd.z2)
    m = model_solution(params, sd, x).m
    # real up to conjugation by diag(1, i, i, i)
    d = np.diag([1, 1j, 1j, 1j])
    r = np.linalg.inv(d) @ m @ d
    assert np.max(np.abs(r.imag)) < 1e-12
    up = model_solution(params, sd, x + 1e-9j).m
    dn = model_solution(params, sd, x - 1e-9j).m
    assert np.max(np.abs(up - dn)) <= 1e-6


def test_branch_point_excluded(params):
    sd = branch_points(params)
    with pytest.raises(BranchPointSingularity):
        model_solution(params, sd, sd.z3)
