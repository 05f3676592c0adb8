"""Direct sampling of the external-source ensemble.

With V(M) = M^2/2 the density exp(-n Tr(V(M) - A M)) is a GUE shifted by A:
M = A + X with X Hermitian, diagonal entries N(0, 1/n) and off-diagonal real
and imaginary parts N(0, 1/(2n)).  Each draw gets its own generator seeded by
(master seed, draw index), so results do not depend on scheduling.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses

import numpy as np

from .curve import ModelParams, branch_points
from .density import bin_masses
from .errors import EigenSolverFailure
from .mop import FiniteSizeParams

__all__ = [
    "EnsembleConfig",
    "EigenSample",
    "HistogramComparison",
    "sample_matrix",
    "sample_eigenvalues",
    "sample_all",
    "empirical_density",
    "interval_masses",
    "edge_statistics",
]


@dataclasses.dataclass(frozen=True)
class EnsembleConfig:
    fp: FiniteSizeParams
    seed: int = 0
    draws: int = 100

    @property
    def n(self) -> int:
        return self.fp.n

    @classmethod
    def from_model(cls, params: ModelParams, n: int, seed: int = 0, draws: int = 100):
        return cls(FiniteSizeParams.from_model(params, n), seed, draws)

    def source(self) -> np.ndarray:
        fp = self.fp
        return np.concatenate([np.full(fp.n1, fp.a), np.zeros(fp.n2), np.full(fp.n3, -fp.a)])


@dataclasses.dataclass(frozen=True)
class EigenSample:
    eigenvalues: np.ndarray
    draw_index: int
    seed_used: tuple
    retried: bool = False


@dataclasses.dataclass
class HistogramComparison:
    edges: np.ndarray
    empirical: np.ndarray
    predicted: np.ndarray
    max_deviation: float
    outside_fraction: float
    interval_masses: tuple

    def to_dict(self):
        return {
            "edges": self.edges.tolist(),
            "empirical": self.empirical.tolist(),
            "predicted": self.predicted.tolist(),
            "max_deviation": self.max_deviation,
            "outside_fraction": self.outside_fraction,
            "interval_masses": list(self.interval_masses),
        }


def sample_matrix(cfg: EnsembleConfig, rng: np.random.Generator) -> np.ndarray:
    n = cfg.n
    scale = np.sqrt(1.0 / (2.0 * n))
    upper = np.triu(rng.normal(0.0, scale, (n, n)) + 1j * rng.normal(0.0, scale, (n, n)), 1)
    x = upper + upper.conj().T
    x[np.diag_indices(n)] = rng.normal(0.0, np.sqrt(1.0 / n), n)
    x[np.diag_indices(n)] += cfg.source()
    return x


def _draw(cfg: EnsembleConfig, k: int) -> EigenSample:
    seed = (cfg.seed, k)
    for attempt in range(2):
        rng = np.random.default_rng(np.random.SeedSequence(list(seed)))
        try:
            ev = np.linalg.eigvalsh(sample_matrix(cfg, rng))
            return EigenSample(np.sort(ev), k, seed, attempt > 0)
        except np.linalg.LinAlgError:
            seed = (cfg.seed, k, 1)
    raise EigenSolverFailure(f"draw {k} failed twice")


def sample_eigenvalues(cfg: EnsembleConfig, threads: int = 1):
    """Yield EigenSample for draws 0..draws-1 in order."""
    if threads <= 1:
        for k in range(cfg.draws):
            yield _draw(cfg, k)
        return
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(lambda k: _draw(cfg, k), range(cfg.draws))


def sample_all(cfg: EnsembleConfig, threads: int = 1) -> np.ndarray:
    """Eigenvalues as an array of shape (draws, n)."""
    return np.stack([s.eigenvalues for s in sample_eigenvalues(cfg, threads)])


def interval_masses(params: ModelParams, eigs: np.ndarray):
    """Fractions of eigenvalues nearest to each support interval (split at gap midpoints)."""
    sd = branch_points(params)
    cut_l = -0.5 * (sd.z1 + sd.z2)
    cut_r = 0.5 * (sd.z1 + sd.z2)
    flat = np.ravel(eigs)
    left = np.mean(flat < cut_l)
    right = np.mean(flat > cut_r)
    return float(left), float(1.0 - left - right), float(right)


def empirical_density(params: ModelParams, eigs: np.ndarray, bin_width: float = 0.1,
                      margin: float | None = None) -> HistogramComparison:
    """Pooled histogram of bin masses against the integral of rho over each bin."""
    sd = branch_points(params)
    flat = np.ravel(eigs)
    reach = max(sd.z3 + 1.0, float(np.max(np.abs(flat))) + bin_width)
    k = int(np.ceil(reach / bin_width))
    edges = bin_width * np.arange(-k, k + 1)
    counts, _ = np.histogram(flat, bins=edges)
    empirical = counts / flat.size
    predicted = bin_masses(params, sd, edges)
    margin = 0.05 * sd.z3 if margin is None else margin
    near = np.zeros(flat.size, dtype=bool)
    for lo, hi in sd.intervals:
        near |= (flat >= lo - margin) & (flat <= hi + margin)
    return HistogramComparison(
        edges, empirical, predicted,
        float(np.max(np.abs(empirical - predicted))),
        float(np.mean(~near)),
        interval_masses(params, flat),
    )


def edge_statistics(params: ModelParams, eigs: np.ndarray, edge: str = "z3"):
    """Rescaled extreme eigenvalues at an edge, restricted to the adjacent interval."""
    sd = branch_points(params)
    x0 = sd.edge(edge)
    c = sd.rho_edge[edge]
    n = eigs.shape[1]
    lo, hi = next(iv for iv in sd.intervals if x0 in iv)
    bounds = list(sd.breakpoints)
    # the interval owned by this edge, extended to the neighbouring gap midpoints
    left = -np.inf if lo == bounds[0] else 0.5 * (lo + bounds[bounds.index(lo) - 1])
    right = np.inf if hi == bounds[-1] else 0.5 * (hi + bounds[bounds.index(hi) + 1])
    scale = (c * n) ** (2.0 / 3.0)
    out = []
    for row in eigs:
        sel = row[(row > left) & (row < right)]
        if sel.size == 0:
            continue
        if sd.is_right_edge(edge):
            out.append((sel.max() - x0) * scale)
        else:
            out.append((x0 - sel.min()) * scale)
    out = np.array(out)
    return {"edge": edge, "values": out.tolist(), "mean": float(out.mean()), "variance": float(out.var())}
