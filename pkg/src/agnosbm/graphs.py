"""Graph representation, block-model sampling, edge splitting and BFS shells.

Graphs are immutable once built: adjacency is stored in CSR form (an
``indptr`` offset array plus a flat, per-vertex-sorted ``indices`` array),
which keeps neighbourhood queries allocation-free and makes every read
operation safe to call concurrently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParameterError
from .rng import derived_rng


class Regime(Enum):
    """Edge-probability scaling: ``Q/n`` versus ``ln(n) * Q / n``."""

    CONSTANT = "constant"
    LOGARITHMIC = "logarithmic"


@dataclass(frozen=True)
class SbmParams:
    """Block-model parameters: community prior ``p`` and kernel ``Q``.

    ``scale`` multiplies ``Q`` before the regime scaling is applied, which
    is how amplified-kernel experiments are expressed.
    """

    p: np.ndarray
    Q: np.ndarray
    regime: Regime = Regime.CONSTANT
    scale: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "Q", Q)
        if p.ndim != 1 or p.size == 0:
            raise ParameterError("p must be a non-empty vector")
        if np.any(p <= 0):
            raise ParameterError("all entries of p must be positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ParameterError(f"p must sum to 1, got {p.sum()!r}")
        if Q.shape != (p.size, p.size):
            raise ParameterError("Q must be k x k with k = len(p)")
        if not np.array_equal(Q, Q.T):
            raise ParameterError("Q must be exactly symmetric")
        if np.any(Q < 0):
            raise ParameterError("Q entries must be nonnegative")
        if self.scale <= 0:
            raise ParameterError("scale must be positive")
        for i in range(p.size):
            for j in range(i + 1, p.size):
                if np.array_equal(Q[i], Q[j]):
                    warnings.warn(
                        f"rows {i} and {j} of Q are equal; the communities "
                        "they index are indistinguishable",
                        stacklevel=2,
                    )

    @property
    def k(self) -> int:
        return self.p.size

    def edge_probabilities(self, n: int) -> np.ndarray:
        """Per-community-pair edge probability matrix, clamped to [0, 1]."""
        probs = self.scale * self.Q / n
        if self.regime is Regime.LOGARITHMIC:
            probs = probs * math.log(n)
        if np.any(probs > 1.0):
            warnings.warn(
                "edge probabilities exceed 1 after scaling; clamping",
                stacklevel=2,
            )
            probs = np.minimum(probs, 1.0)
        return probs

    def scaled_kernel(self) -> np.ndarray:
        """``scale * Q``, the kernel whose spectrum drives recovery."""
        return self.scale * self.Q


@dataclass(frozen=True)
class CommunityLabels:
    """Per-vertex community assignment over the alphabet ``[0, k)``."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ParameterError("labels must be a flat sequence")
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ParameterError("labels must lie in [0, k)")

    def __len__(self) -> int:
        return self.labels.size

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def _build_csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """CSR arrays from a canonical (u < v) edge array."""
    if edges.size == 0:
        return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64)
    tails = np.concatenate([edges[:, 0], edges[:, 1]])
    heads = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((heads, tails))
    tails, heads = tails[order], heads[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, tails + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, heads


class Graph:
    """Immutable undirected simple graph with sorted adjacency lists."""

    __slots__ = ("n", "indptr", "indices", "edges", "edge_count")

    def __init__(self, n: int, edges: np.ndarray):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n < 1:
            raise ParameterError("graph needs at least one vertex")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ParameterError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ParameterError("self loops are not allowed")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.stack([lo, hi], axis=1)
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            dup = np.all(edges[1:] == edges[:-1], axis=1)
            if np.any(dup):
                u, v = edges[1:][dup][0]
                raise ParameterError(f"duplicate edge ({u}, {v})")
        self.n = int(n)
        self.edges = edges
        self.edge_count = edges.shape[0]
        self.indptr, self.indices = _build_csr(self.n, edges)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]: self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class EdgeSubset:
    """A subset of a parent graph's edges, queryable as its own adjacency."""

    n: int
    edges: np.ndarray
    parent_edge_count: int
    indptr: np.ndarray = field(repr=False, default=None)
    indices: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", edges)
        indptr, indices = _build_csr(self.n, edges)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]: self.indptr[v + 1]]

    def __len__(self) -> int:
        return self.edges.shape[0]

    def contains(self, u: int, v: int) -> bool:
        lo, hi = (u, v) if u < v else (v, u)
        codes = self.edges[:, 0] * self.n + self.edges[:, 1]
        idx = np.searchsorted(codes, lo * self.n + hi)
        return bool(idx < codes.size and codes[idx] == lo * self.n + hi)


def _decode_triangular(t: np.ndarray, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Map flat indices in [0, s*(s-1)/2) to (i, j) pairs with i < j."""
    # Float solve of the triangular-number inverse, then an integer fixup
    # pass so the decode is exact for s up to ~10^9.
    tf = t.astype(np.float64)
    i = np.floor((2 * s - 1 - np.sqrt((2 * s - 1) ** 2 - 8 * tf)) / 2).astype(np.int64)
    i = np.clip(i, 0, s - 2)

    def row_start(row):
        return row * (2 * s - row - 1) // 2

    too_big = row_start(i) > t
    while np.any(too_big):
        i[too_big] -= 1
        too_big = row_start(i) > t
    too_small = row_start(i + 1) <= t
    while np.any(too_small):
        i[too_small] += 1
        too_small = row_start(i + 1) <= t
    j = t - row_start(i) + i + 1
    return i, j


def _sample_distinct(rng: np.random.Generator, total: int, count: int) -> np.ndarray:
    """``count`` distinct integers in [0, total) without materializing the range."""
    if count > total:
        raise ParameterError("cannot sample more pairs than exist")
    picked = np.unique(rng.integers(0, total, size=count))
    while picked.size < count:
        extra = rng.integers(0, total, size=count - picked.size)
        picked = np.unique(np.concatenate([picked, extra]))
    return picked


def sample_sbm(params: SbmParams, n: int, seed: int) -> tuple[Graph, CommunityLabels]:
    """Draw a graph and its hidden labels from the block model.

    Labels are i.i.d. from ``params.p``; each unordered pair is an edge
    independently with the community-pair probability.  Sampling works
    block-by-block (a binomial edge count per community pair, then distinct
    pair indices), so it is O(n + edges) rather than O(n^2).
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    label_rng = derived_rng(seed, "sbm-labels")
    edge_rng = derived_rng(seed, "sbm-edges")
    labels = label_rng.choice(params.k, size=n, p=params.p)
    probs = params.edge_probabilities(n)

    members = [np.flatnonzero(labels == c) for c in range(params.k)]
    chunks: list[np.ndarray] = []
    for a in range(params.k):
        for b in range(a, params.k):
            prob = probs[a, b]
            na, nb = members[a].size, members[b].size
            if a == b:
                total = na * (na - 1) // 2
            else:
                total = na * nb
            if total == 0 or prob <= 0.0:
                continue
            m_ab = int(edge_rng.binomial(total, prob))
            if m_ab == 0:
                continue
            flat = _sample_distinct(edge_rng, total, m_ab)
            if a == b:
                i, j = _decode_triangular(flat, na)
                us, vs = members[a][i], members[a][j]
            else:
                us = members[a][flat // nb]
                vs = members[b][flat % nb]
            chunks.append(np.stack([us, vs], axis=1))
    edges = np.concatenate(chunks, axis=0) if chunks else np.empty((0, 2), dtype=np.int64)
    return Graph(n, edges), CommunityLabels(labels, params.k)


def split_edges(g: Graph, c: float, seed: int) -> tuple[EdgeSubset, Graph]:
    """Assign each edge independently to the subset with probability ``c``.

    Returns the selected subset and the residual graph; together they
    partition the original edge set exactly.
    """
    if not 0.0 <= c <= 1.0:
        raise ParameterError("split probability must be in [0, 1]")
    rng = derived_rng(seed, "edge-split")
    coins = rng.random(g.edge_count) < c
    subset = EdgeSubset(g.n, g.edges[coins], g.edge_count)
    residual = Graph(g.n, g.edges[~coins])
    return subset, residual


def _gather_neighbors(indptr: np.ndarray, indices: np.ndarray,
                      frontier: np.ndarray) -> np.ndarray:
    """All neighbours of ``frontier`` concatenated, duplicates included."""
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=indices.dtype)
    offsets = np.repeat(starts - np.concatenate(([0], counts[:-1])).cumsum(), counts)
    return indices[offsets + np.arange(total)]


class WorkBudgetExceeded(Exception):
    """Raised internally when a BFS exceeds its visited-edge budget."""


def neighborhood_shells(g: Graph, v: int, r_max: int,
                        edge_budget: int | None = None,
                        _budget_state: list | None = None) -> list[np.ndarray]:
    """BFS shells ``N_0(v) .. N_{r_max}(v)`` as disjoint vertex arrays.

    ``N_r`` holds the vertices at distance exactly ``r``; exhausted shells
    are empty arrays.  Runs in time linear in the edges incident to the
    visited ball.  ``edge_budget`` caps the number of adjacency entries
    scanned (shared across calls via ``_budget_state``).
    """
    if v < 0 or v >= g.n:
        raise ParameterError("vertex out of range")
    if r_max < 0:
        raise ParameterError("r_max must be >= 0")
    visited = np.zeros(g.n, dtype=bool)
    visited[v] = True
    shells = [np.array([v], dtype=np.int64)]
    frontier = shells[0]
    state = _budget_state if _budget_state is not None else [0]
    for _ in range(r_max):
        if frontier.size == 0:
            shells.append(np.empty(0, dtype=np.int64))
            continue
        neigh = _gather_neighbors(g.indptr, g.indices, frontier)
        state[0] += neigh.size
        if edge_budget is not None and state[0] > edge_budget:
            raise WorkBudgetExceeded
        fresh = neigh[~visited[neigh]]
        frontier = np.unique(fresh)
        visited[frontier] = True
        shells.append(frontier)
    return shells


def cross_count_from_shells(shell_a: np.ndarray, shell_b: np.ndarray,
                            subset: EdgeSubset, n: int) -> int:
    """Ordered pairs (x in shell_a, y in shell_b) joined by a subset edge.

    Iterates the subset adjacency of the smaller shell and membership-tests
    against the other, so empty shells cost nothing and return 0.
    """
    if shell_a.size == 0 or shell_b.size == 0 or len(subset) == 0:
        return 0
    if shell_a.size <= shell_b.size:
        small, big = shell_a, shell_b
    else:
        small, big = shell_b, shell_a
    mask = np.zeros(n, dtype=bool)
    mask[big] = True
    neigh = _gather_neighbors(subset.indptr, subset.indices, small)
    return int(mask[neigh].sum())


def cross_count(g_minus_e: Graph, subset: EdgeSubset, v: int, v_prime: int,
                r: int, r_prime: int) -> int:
    """Subset edges joining the depth-``r`` shell of ``v`` to the
    depth-``r_prime`` shell of ``v_prime``, both taken in the residual graph."""
    shell_v = neighborhood_shells(g_minus_e, v, r)[r]
    shell_vp = neighborhood_shells(g_minus_e, v_prime, r_prime)[r_prime]
    return cross_count_from_shells(shell_v, shell_vp, subset, g_minus_e.n)


def connected_component(g: Graph, v: int) -> np.ndarray:
    """Vertices reachable from ``v`` (including ``v``), sorted."""
    visited = np.zeros(g.n, dtype=bool)
    visited[v] = True
    frontier = np.array([v], dtype=np.int64)
    while frontier.size:
        neigh = _gather_neighbors(g.indptr, g.indices, frontier)
        fresh = np.unique(neigh[~visited[neigh]])
        visited[fresh] = True
        frontier = fresh
    return np.flatnonzero(visited)


def largest_component(g: Graph) -> np.ndarray:
    """Vertex set of the largest connected component, sorted."""
    remaining = np.ones(g.n, dtype=bool)
    best = np.empty(0, dtype=np.int64)
    while remaining.any():
        start = int(np.flatnonzero(remaining)[0])
        comp = connected_component(g, start)
        remaining[comp] = False
        if comp.size > best.size:
            best = comp
    return best


def induced_subgraph(g: Graph, vertices: np.ndarray) -> tuple[Graph, np.ndarray]:
    """Subgraph on ``vertices`` with relabelled ids; returns (graph, old ids)."""
    vertices = np.asarray(vertices, dtype=np.int64)
    position = -np.ones(g.n, dtype=np.int64)
    position[vertices] = np.arange(vertices.size)
    if g.edge_count:
        keep = (position[g.edges[:, 0]] >= 0) & (position[g.edges[:, 1]] >= 0)
        edges = position[g.edges[keep]]
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    return Graph(vertices.size, edges), vertices
