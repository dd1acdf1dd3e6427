"""Graph data model, matrix construction and synthetic generators."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .exceptions import InputError, ModeError

MODES = ("adjacency", "laplacian", "normalized_laplacian")

_ROWSUM_RTOL = 1e-10


@dataclass(frozen=True)
class Graph:
    """Node-labelled weighted graph.

    ``edges`` holds ``(source_index, target_index, weight)`` triples. For an
    undirected graph each unordered pair is listed once and mirrored when the
    adjacency matrix is built. Parallel edges are allowed and are summed.
    """

    node_ids: tuple
    edges: tuple = ()
    directed: bool = False
    communities: Optional[Mapping[str, str]] = None
    coords: Optional[Mapping[str, tuple]] = None

    def __post_init__(self):
        ids = tuple(str(v) for v in self.node_ids)
        if len(set(ids)) != len(ids):
            seen, dupes = set(), []
            for v in ids:
                if v in seen:
                    dupes.append(v)
                seen.add(v)
            raise InputError(f"duplicate node ids: {sorted(set(dupes))}")
        n = len(ids)
        edges = []
        for e in self.edges:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= i < n and 0 <= j < n):
                raise InputError(f"edge ({i}, {j}) references a node outside 0..{n - 1}")
            if not math.isfinite(w) or w < 0:
                raise InputError(f"edge ({i}, {j}) has invalid weight {w!r}")
            edges.append((i, j, w))
        object.__setattr__(self, "node_ids", ids)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "directed", bool(self.directed))
        known = set(ids)
        for name in ("communities", "coords"):
            mapping = getattr(self, name)
            if mapping is None:
                continue
            mapping = {str(k): v for k, v in mapping.items()}
            unknown = set(mapping) - known
            if unknown:
                raise InputError(f"{name} refer to unknown nodes: {sorted(unknown)[:5]}")
            if name == "communities":
                mapping = {k: str(v) for k, v in mapping.items()}
            else:
                mapping = {k: (float(v[0]), float(v[1])) for k, v in mapping.items()}
            object.__setattr__(self, name, mapping)

    @property
    def n(self) -> int:
        return len(self.node_ids)

    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.node_ids)}

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence], directed=False, node_ids=None,
                   communities=None, coords=None) -> "Graph":
        """Build a graph from ``(u, v[, weight])`` tuples keyed by node id.

        Without ``node_ids`` the nodes are taken in order of first appearance.
        """
        edges = list(edges)
        if node_ids is None:
            order = {}
            for e in edges:
                order.setdefault(str(e[0]), None)
                order.setdefault(str(e[1]), None)
            node_ids = list(order)
        index = {str(v): i for i, v in enumerate(node_ids)}
        triples = []
        for e in edges:
            u, v = str(e[0]), str(e[1])
            if u not in index or v not in index:
                raise InputError(f"edge ({u}, {v}) references an unknown node")
            w = float(e[2]) if len(e) > 2 else 1.0
            triples.append((index[u], index[v], w))
        return cls(tuple(node_ids), tuple(triples), directed, communities, coords)


@dataclass(frozen=True)
class SquareMatrix:
    """Dense real ``n x n`` graph matrix tagged with its mode."""

    entries: np.ndarray
    mode: str = "adjacency"
    node_ids: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] == 0:
            raise InputError("matrix must have at least one row")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix contains non-finite entries")
        if self.mode not in MODES:
            raise ModeError(f"unknown matrix mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "adjacency" and np.any(a < 0):
            raise InputError("adjacency entries must be nonnegative")
        if self.mode == "laplacian":
            scale = np.max(np.abs(a))
            if np.any(np.abs(a.sum(axis=1)) > _ROWSUM_RTOL * max(scale, 1.0)):
                raise InputError("laplacian rows must sum to zero")
        if self.node_ids is not None:
            ids = tuple(str(v) for v in self.node_ids)
            if len(ids) != a.shape[0]:
                raise InputError("node_ids length does not match matrix size")
            object.__setattr__(self, "node_ids", ids)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def build_adjacency(g: Graph) -> SquareMatrix:
    """Dense adjacency matrix with parallel edges summed.

    Undirected edges are mirrored; a self-loop lands once on the diagonal.
    """
    if not isinstance(g, Graph):
        raise InputError(f"expected a Graph, got {type(g).__name__}")
    if g.n == 0:
        raise InputError("cannot build a matrix for an empty graph")
    cells = defaultdict(list)
    for i, j, w in g.edges:
        cells[(i, j)].append(w)
        if not g.directed and i != j:
            cells[(j, i)].append(w)
    a = np.zeros((g.n, g.n))
    for (i, j), ws in cells.items():
        # fsum keeps the total independent of edge order
        a[i, j] = math.fsum(ws)
    return SquareMatrix(a, "adjacency", g.node_ids)


def _require_adjacency(a: SquareMatrix):
    if not isinstance(a, SquareMatrix) or a.mode != "adjacency":
        got = getattr(a, "mode", type(a).__name__)
        raise ModeError(f"expected an adjacency matrix, got {got}")


def laplacian(a: SquareMatrix) -> SquareMatrix:
    """``D - A`` with ``D`` the diagonal of row sums (out-degree)."""
    _require_adjacency(a)
    # self-loops cancel between D and A, so only off-diagonal weight enters
    off = a.entries - np.diag(np.diag(a.entries))
    lap = np.diag(off.sum(axis=1)) - off
    return SquareMatrix(lap, "laplacian", a.node_ids)


def normalized_laplacian(a: SquareMatrix) -> SquareMatrix:
    """``I - D^-1/2 A D^-1/2``; zero-degree nodes get an all-zero row and column."""
    _require_adjacency(a)
    adj = a.entries
    deg = adj.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    eye = np.diag(nz.astype(float))
    lap = eye - inv_sqrt[:, None] * adj * inv_sqrt[None, :]
    return SquareMatrix(lap, "normalized_laplacian", a.node_ids)


def to_mode(a: SquareMatrix, mode: str) -> SquareMatrix:
    """Convert an adjacency matrix into the requested mode."""
    mode = mode.replace("-", "_")
    if mode not in MODES:
        raise ModeError(f"unknown matrix mode {mode!r}")
    if a.mode == mode:
        return a
    _require_adjacency(a)
    if mode == "laplacian":
        return laplacian(a)
    return normalized_laplacian(a)


def induced_subgraph(g: Graph, label) -> Graph:
    """Subgraph on the nodes carrying community ``label``, internal edges only."""
    if g.communities is None:
        raise InputError("graph has no community labels")
    label = str(label)
    members = [i for i, v in enumerate(g.node_ids) if g.communities.get(v) == label]
    if not members:
        raise InputError(f"unknown community label {label!r}")
    remap = {old: new for new, old in enumerate(members)}
    edges = tuple((remap[i], remap[j], w) for i, j, w in g.edges if i in remap and j in remap)
    ids = tuple(g.node_ids[i] for i in members)
    coords = None
    if g.coords is not None:
        coords = {v: g.coords[v] for v in ids if v in g.coords}
    return Graph(ids, edges, g.directed, {v: label for v in ids}, coords)


def planted_partition(c: int, m: int, p_in: float, p_out: float, seed: int = 0) -> Graph:
    """Undirected unit-weight planted-partition random graph.

    Nodes ``0 .. c*m - 1`` are grouped into ``c`` consecutive blocks of ``m``.
    The same ``seed`` always yields the same graph.
    """
    if c < 1 or m < 1:
        raise InputError("community count and size must be positive")
    if not (0.0 <= p_out <= p_in <= 1.0):
        raise InputError("require 0 <= p_out <= p_in <= 1")
    n = c * m
    rng = np.random.default_rng(seed)
    block = np.repeat(np.arange(c), m)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(block[iu] == block[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    width = len(str(n - 1))
    ids = tuple(f"{i:0{width}d}" for i in range(n))
    edges = tuple((int(i), int(j), 1.0) for i, j in zip(iu[keep], ju[keep]))
    communities = {ids[i]: str(block[i]) for i in range(n)}
    return Graph(ids, edges, False, communities)
