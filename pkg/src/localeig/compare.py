"""Reference centralities and tools for comparing centrality vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .exceptions import InputError, ModeError, NumericalError
from .graph import Graph, SquareMatrix, build_adjacency, induced_subgraph
from .spectral import CentralityVector, eigenvector_centrality

DEFAULT_DAMPING = 0.85
DEFAULT_GRID = tuple(np.round(np.arange(1, 21) * 0.05, 2).tolist())
MAD_MODES = ("center_scale", "scale_only", "none")
_TIE_RTOL = 1e-12
_MAD_RTOL = 1e-12


def _values(x) -> np.ndarray:
    if isinstance(x, CentralityVector):
        return np.asarray(x.values)
    return np.asarray(x, dtype=float).ravel()


def _mad_mode(mode: str) -> str:
    mode = mode.replace("-", "_")
    if mode.startswith("mad_"):
        mode = mode[4:]
    if mode not in MAD_MODES:
        raise InputError(f"unknown MAD mode {mode!r}; expected one of {MAD_MODES}")
    return mode


def _check_pair(x, y):
    xv, yv = _values(x), _values(y)
    if xv.shape != yv.shape:
        raise InputError(f"length mismatch: {xv.size} vs {yv.size}")
    xi = getattr(x, "node_ids", None)
    yi = getattr(y, "node_ids", None)
    if xi is not None and yi is not None and tuple(xi) != tuple(yi):
        diff = sorted(set(xi) ^ set(yi))
        raise InputError(f"node sets or orderings differ (e.g. {diff[:5]})")
    return xv, yv


def pagerank(m: SquareMatrix, damping: float = DEFAULT_DAMPING, tol: float = 1e-12,
             max_iter: int = 1000) -> CentralityVector:
    """Weighted PageRank by power iteration.

    Steps follow edges with probability proportional to their weight; nodes
    without out-weight jump uniformly. With ``damping=1`` the lazy walk
    ``(I + P) / 2`` is iterated instead, which has the same stationary vector
    but also converges on periodic graphs. With ``damping < 1`` a run that
    reaches ``max_iter`` is finished by a direct sparse solve.
    """
    if not isinstance(m, SquareMatrix) or m.mode != "adjacency":
        raise ModeError("pagerank needs an adjacency matrix")
    if not 0.0 <= damping <= 1.0:
        raise InputError(f"damping must lie in [0, 1], got {damping}")
    a = scipy.sparse.csr_matrix(m.entries)
    n = m.n
    out = np.asarray(a.sum(axis=1)).ravel()
    dangling = out == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / out[~dangling]
    pt = (scipy.sparse.diags(inv) @ a).T.tocsr()
    teleport = (1.0 - damping) / n
    lazy = damping == 1.0
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        new = damping * (pt @ x) + damping * x[dangling].sum() / n + teleport
        if lazy:
            new = 0.5 * (new + x)
        new /= new.sum()
        delta = np.abs(new - x).sum()
        x = new
        if delta <= tol:
            break
    else:
        if lazy:
            raise NumericalError(f"pagerank did not converge in {max_iter} iterations "
                                 "(periodic or slowly mixing graph; try damping < 1)")
        x = _pagerank_solve(pt, dangling, damping)
    x = x / x.sum()
    return CentralityVector(x, "pagerank", "adjacency", None, "unit_sum", m.node_ids)


def _pagerank_solve(pt, dangling: np.ndarray, damping: float) -> np.ndarray:
    """Stationary vector from the linear system, for damping close to 1.

    Power iteration contracts only by ``damping`` per step, so near 1 it can
    run out of iterations on periodic graphs. For ``damping < 1`` the system
    ``(I - d P^T - d/n 1 dangling^T) x = (1 - d)/n`` is nonsingular; the
    rank-one dangling term is handled with Sherman-Morrison.
    """
    n = pt.shape[0]
    lu = scipy.sparse.linalg.splu((scipy.sparse.identity(n, format="csc") - damping * pt).tocsc())
    base = lu.solve(np.full(n, (1.0 - damping) / n))
    if dangling.any():
        u = lu.solve(np.full(n, damping / n))
        base = base + u * base[dangling].sum() / (1.0 - u[dangling].sum())
    return np.maximum(base, 0.0)


def community_eigenvector_centrality(g: Graph, exclude: Sequence[str] = ()) -> CentralityVector:
    """Eigenvector centrality of each community's induced subgraph.

    Each block has unit 2-norm on its own. Nodes in communities without
    internal edges, in ``exclude``d communities, or without a label get 0.
    """
    if g.communities is None:
        raise InputError("graph has no community labels")
    values = np.zeros(g.n)
    index = g.index()
    skip = {str(label) for label in exclude}
    for label in sorted(set(g.communities.values()) - skip):
        sub = induced_subgraph(g, label)
        if not any(w > 0 for _, _, w in sub.edges):
            continue
        ec = eigenvector_centrality(build_adjacency(sub))
        for node, val in zip(sub.node_ids, ec.values):
            values[index[node]] = val
    return CentralityVector(values, "community_eigenvector", "adjacency", 1,
                            "blockwise_unit_2_norm", g.node_ids)


@dataclass(frozen=True)
class MadNormalized:
    values: np.ndarray
    median: float
    scale: float
    mode: str
    degenerate: bool = False
    fallback: bool = False

    def params(self) -> dict:
        return {"median": self.median, "scale": self.scale, "mode": self.mode,
                "degenerate": self.degenerate, "mean_abs_fallback": self.fallback}


def mad_normalize(x, mode: str = "center_scale") -> MadNormalized:
    """Robust normalisation by the median absolute deviation.

    When the MAD is zero the mean absolute deviation from the median is used;
    if that is zero too the result is all zeros and ``degenerate`` is set.
    """
    mode = _mad_mode(mode)
    v = _values(x)
    if v.size < 2:
        raise InputError("MAD normalisation needs at least two values")
    med = float(np.median(v))
    dev = np.abs(v - med)
    scale = float(np.median(dev))
    fallback = False
    if mode == "none":
        return MadNormalized(v.copy(), med, 1.0, mode)
    # a MAD at rounding level (ties that differ in the last bit) counts as zero,
    # otherwise rescaling x could flip between the two branches
    if scale <= _MAD_RTOL * dev.max():
        fallback = True
        scale = float(np.mean(dev))
    if scale == 0:
        return MadNormalized(np.zeros_like(v), med, 0.0, mode, True, fallback)
    out = (v - med) / scale if mode == "center_scale" else v / scale
    return MadNormalized(out, med, scale, mode, False, fallback)


def distance(x, y, mode: str = "center_scale") -> float:
    """Euclidean distance between the independently MAD-normalised vectors."""
    xv, yv = _check_pair(x, y)
    return float(np.linalg.norm(mad_normalize(xv, mode).values - mad_normalize(yv, mode).values))


def rescale(x, p: float) -> np.ndarray:
    """Hadamard power ``x**p`` normalised to unit sum."""
    v = _values(x)
    if p <= 0:
        raise InputError(f"power must be positive, got {p}")
    if np.any(v < 0) or not np.any(v > 0):
        raise InputError("rescaling needs nonnegative values with at least one positive entry")
    # dividing by the maximum first keeps large x with p > 1 finite and makes
    # the result independent of positive rescaling of x up to rounding
    powered = np.power(v / v.max(), p)
    return powered / math.fsum(powered)


def fit_power(x, ref, grid: Optional[Sequence[float]] = None,
              mode: str = "center_scale") -> tuple[float, float]:
    """Grid power minimising ``distance(rescale(x, p), ref)``; ties go to the smaller p."""
    _check_pair(x, ref)
    grid = sorted(DEFAULT_GRID if grid is None else grid)
    if not grid:
        raise InputError("empty power grid")
    best_p, best_d = None, np.inf
    for p in grid:
        d = distance(rescale(x, p), _values(ref), mode)
        if best_p is None or d < best_d - _TIE_RTOL * abs(best_d):
            best_p, best_d = float(p), d
    return best_p, best_d


@dataclass(frozen=True)
class ComparisonReport:
    """Per-node differences of ``y`` against ``x`` in MAD units.

    Rows of ``per_node_diff`` are ``(node_id, x, y, y_norm - x_norm)``,
    ordered by ``x`` descending.
    """

    per_node_diff: tuple
    distance: float
    normalization: str
    sort_order: tuple
    quartiles: dict
    fraction_within_one_mad: float
    x_params: dict
    y_params: dict
    fitted_p: Optional[float] = None


def difference_report(x, y, mode: str = "center_scale", node_ids=None,
                      fitted_p: Optional[float] = None) -> ComparisonReport:
    xv, yv = _check_pair(x, y)
    mode = _mad_mode(mode)
    ids = node_ids or getattr(x, "node_ids", None) or getattr(y, "node_ids", None)
    ids = tuple(ids) if ids is not None else tuple(str(i) for i in range(xv.size))
    if len(ids) != xv.size:
        raise InputError("node_ids length does not match the vectors")
    nx_, ny_ = mad_normalize(xv, mode), mad_normalize(yv, mode)
    diff = ny_.values - nx_.values
    order = np.argsort(-xv, kind="stable")
    rows = tuple((ids[i], float(xv[i]), float(yv[i]), float(diff[i])) for i in order)
    q = np.percentile(diff, [0, 25, 50, 75, 100])
    quartiles = dict(zip(("min", "q1", "median", "q3", "max"), (float(v) for v in q)))
    label = "none" if mode == "none" else f"mad_{mode}"
    return ComparisonReport(rows, float(np.linalg.norm(diff)), label,
                            tuple(ids[i] for i in order), quartiles,
                            float(np.mean(np.abs(diff) <= 1.0)),
                            nx_.params(), ny_.params(), fitted_p)
