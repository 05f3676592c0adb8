import numpy as np
import pytest

from extsource.curve import ModelParams
from extsource.ensemble import (
    EnsembleConfig,
    edge_statistics,
    empirical_density,
    sample_all,
    sample_eigenvalues,
    sample_matrix,
)
from extsource.mop import FiniteSizeParams


def test_matrix_hermitian_with_source():
    cfg = EnsembleConfig.from_model(ModelParams(2.0, 0.5), 12, seed=3, draws=1)
    m = sample_matrix(cfg, np.random.default_rng(0))
    assert np.array_equal(m, m.conj().T)
    assert list(cfg.source()) == [2.0] * 3 + [0.0] * 6 + [-2.0] * 3


def test_determinism_across_threads():
    cfg = EnsembleConfig.from_model(ModelParams(2.0, 0.5), 40, seed=11, draws=12)
    a = sample_all(cfg, threads=1)
    b = sample_all(cfg, threads=4)
    assert np.array_equal(a, b)
    s = list(sample_eigenvalues(cfg))
    assert [x.draw_index for x in s] == list(range(12))
    assert all(np.all(np.diff(x.eigenvalues) >= 0) for x in s)


def test_semicircle_without_source():
    # a = 0 is outside the model's parameter range, so build the counts directly
    cfg = EnsembleConfig(FiniteSizeParams(400, 100, 200, 100, 0.0), seed=5, draws=50)
    eigs = sample_all(cfg, threads=4)
    assert np.mean(np.abs(eigs) > 2.1) < 0.01


def test_trace_mean_zero():
    cfg = EnsembleConfig.from_model(ModelParams(2.0, 1 / 3), 60, seed=2, draws=200)
    sums = sample_all(cfg).sum(axis=1)
    assert abs(sums.mean()) < 4 * sums.std() / np.sqrt(len(sums))


def test_histogram_and_edges():
    p = ModelParams(2.0, 1 / 3)
    cfg = EnsembleConfig.from_model(p, 150, seed=9, draws=20)
    eigs = sample_all(cfg, threads=2)
    hist = empirical_density(p, eigs)
    assert hist.empirical.sum() == pytest.approx(1.0, abs=1e-12)
    assert hist.predicted.sum() == pytest.approx(1.0, abs=1e-8)
    assert 0.0 <= hist.outside_fraction <= 0.01
    stats = edge_statistics(p, eigs, "z3")
    assert stats["mean"] < 0 and abs(stats["mean"]) < 5
    inner = edge_statistics(p, eigs, "z1")
    assert len(inner["values"]) == 20
