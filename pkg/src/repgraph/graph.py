"""Directed graph and node scores: distance, diagonal, degree, closeness,
betweenness and PageRank.

Used for both the user graph (accounts, friend -> follower edges) and the tweet
tree (tweets, original -> retweet edges). Vertices are opaque, sortable ids;
internally they are mapped to dense integer indices in sorted-id order so every
iteration order is deterministic regardless of how the graph was assembled.
"""

from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Hashable, Iterable, Iterator, NamedTuple

import numpy as np

from .config import ScoringConfig
from .errors import EmptyGraph, InvalidConfig, NonConvergence, SelfLoopError, UnknownVertex

logger = logging.getLogger(__name__)

VertexId = Hashable

# Sources per betweenness batch. Fixed so the floating-point reduction order
# never depends on the worker count.
_BETWEENNESS_BATCH = 256


class DirectedGraph:
    """Immutable simple directed graph stored as sorted successor lists.

    Edge endpoints missing from ``vertices`` are added automatically. Duplicate
    edges are merged; self-loops raise :class:`SelfLoopError`.
    """

    __slots__ = ("_ids", "_index", "_succ", "_pred", "_edge_count")

    def __init__(
        self,
        vertices: Iterable[VertexId] = (),
        edges: Iterable[tuple[VertexId, VertexId]] = (),
    ):
        edge_set: set[tuple[VertexId, VertexId]] = set()
        vertex_set = set(vertices)
        for u, v in edges:
            if u == v:
                raise SelfLoopError(f"self-loop on vertex {u!r}")
            edge_set.add((u, v))
            vertex_set.add(u)
            vertex_set.add(v)

        self._ids: tuple[VertexId, ...] = tuple(sorted(vertex_set))
        self._index: dict[VertexId, int] = {v: i for i, v in enumerate(self._ids)}
        succ: list[list[int]] = [[] for _ in self._ids]
        pred: list[list[int]] = [[] for _ in self._ids]
        for u, v in edge_set:
            iu, iv = self._index[u], self._index[v]
            succ[iu].append(iv)
            pred[iv].append(iu)
        self._succ = tuple(tuple(sorted(s)) for s in succ)
        self._pred = tuple(tuple(sorted(p)) for p in pred)
        self._edge_count = len(edge_set)

    # -- container protocol -------------------------------------------------

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, v: object) -> bool:
        return v in self._index

    def __iter__(self) -> Iterator[VertexId]:
        return iter(self._ids)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self._ids == other._ids and self._succ == other._succ

    def __hash__(self) -> int:
        return hash((self._ids, self._succ))

    def __repr__(self) -> str:
        return f"DirectedGraph(n={len(self)}, m={self._edge_count})"

    # -- accessors ------------------------------------------------------------

    @property
    def vertices(self) -> tuple[VertexId, ...]:
        return self._ids

    @property
    def n(self) -> int:
        return len(self._ids)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def index(self, v: VertexId) -> int:
        try:
            return self._index[v]
        except (KeyError, TypeError):
            raise UnknownVertex(f"vertex {v!r} is not in the graph") from None

    def successors(self, v: VertexId) -> tuple[VertexId, ...]:
        return tuple(self._ids[j] for j in self._succ[self.index(v)])

    def predecessors(self, v: VertexId) -> tuple[VertexId, ...]:
        return tuple(self._ids[j] for j in self._pred[self.index(v)])

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        if u not in self._index or v not in self._index:
            return False
        iv = self._index[v]
        return iv in self._succ[self._index[u]]

    def edges(self) -> Iterator[tuple[VertexId, VertexId]]:
        """All edges, sorted by (source, target)."""
        for i, succ in enumerate(self._succ):
            for j in succ:
                yield self._ids[i], self._ids[j]

    def adjacency_matrix(self) -> np.ndarray:
        """Dense 0/1 matrix with ``A[u, v] = 1`` iff ``u -> v``, rows in vertex order."""
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for i, succ in enumerate(self._succ):
            a[i, list(succ)] = 1
        return a

    def subgraph(self, keep: Iterable[VertexId]) -> DirectedGraph:
        keep = set(keep)
        return DirectedGraph(
            (v for v in self._ids if v in keep),
            ((u, v) for u, v in self.edges() if u in keep and v in keep),
        )


@dataclass(frozen=True)
class PathResult:
    """Shortest-path length from ``source`` to ``target``; ``hops`` is ``None`` when unreachable."""

    source: VertexId
    target: VertexId
    hops: int | None

    @property
    def reachable(self) -> bool:
        return self.hops is not None


class Degree(NamedTuple):
    in_degree: int
    out_degree: int
    degree: int


@dataclass(frozen=True)
class NodeScore:
    in_degree: int
    out_degree: int
    degree: int
    closeness: float
    betweenness: float
    pagerank: float


NODE_SCORE_FIELDS = ("in_degree", "out_degree", "degree", "closeness", "betweenness", "pagerank")


# -- shortest paths -----------------------------------------------------------


def _bfs(g: DirectedGraph, s: int) -> list[int]:
    """Hop distances from index ``s``; -1 marks unreachable."""
    dist = [-1] * g.n
    dist[s] = 0
    queue = deque([s])
    succ = g._succ
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for w in succ[v]:
            if dist[w] < 0:
                dist[w] = dv
                queue.append(w)
    return dist


def distance(g: DirectedGraph, u: VertexId, v: VertexId) -> PathResult:
    """Length of a shortest directed path ``u -> v`` (breadth-first search)."""
    iu, iv = g.index(u), g.index(v)
    d = _bfs(g, iu)[iv]
    return PathResult(u, v, d if d >= 0 else None)


def all_pairs_distances(g: DirectedGraph) -> dict[VertexId, dict[VertexId, int]]:
    """Reachable hop distances keyed ``[source][target]``; unreachable pairs are absent."""
    out: dict[VertexId, dict[VertexId, int]] = {}
    for i, s in enumerate(g.vertices):
        dist = _bfs(g, i)
        out[s] = {g.vertices[j]: d for j, d in enumerate(dist) if d >= 0}
    return out


def diagonal(g: DirectedGraph) -> int:
    """Largest finite distance over ordered pairs of distinct vertices.

    Unreachable pairs are ignored, so a graph without any reachable distinct
    pair has diagonal 0.
    """
    if g.n == 0:
        raise EmptyGraph("diagonal of an empty graph is undefined")
    return max(max(_bfs(g, i)) for i in range(g.n))


# -- degree / closeness -------------------------------------------------------


def degrees(g: DirectedGraph) -> dict[VertexId, Degree]:
    out = {}
    for i, v in enumerate(g.vertices):
        d_in, d_out = len(g._pred[i]), len(g._succ[i])
        out[v] = Degree(d_in, d_out, d_in + d_out)
    return out


def _closeness_index(g: DirectedGraph, i: int) -> float:
    # sorted() fixes the summation order
    return sum(1.0 / d for d in sorted(_bfs(g, i)) if d > 0)


def closeness(g: DirectedGraph, v: VertexId) -> float:
    """Harmonic closeness: sum of ``1/d(v, w)`` over reachable ``w != v``."""
    return _closeness_index(g, g.index(v))


def closeness_all(g: DirectedGraph) -> dict[VertexId, float]:
    return {v: _closeness_index(g, i) for i, v in enumerate(g.vertices)}


# -- betweenness ---------------------------------------------------------------


def _source_dependencies(g: DirectedGraph, s: int) -> list[float]:
    """Brandes single-source pass: dependency of ``s`` on every vertex."""
    n = g.n
    succ = g._succ
    sigma = [0] * n
    dist = [-1] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    sigma[s] = 1
    dist[s] = 0
    order = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in succ[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = [0.0] * n
    for w in reversed(order):
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in preds[w]:
            delta[v] += sigma[v] * coeff
    delta[s] = 0.0
    return delta


def betweenness_centrality(g: DirectedGraph, workers: int = 1) -> dict[VertexId, float]:
    """Unnormalized betweenness of every vertex over ordered endpoint pairs.

    A vertex only counts as an interior point of a shortest path; pairs with no
    path contribute nothing. ``workers > 1`` runs the per-source passes on a
    thread pool; per-source dependencies are always summed in source order, so
    the result is bit-identical for any worker count.
    """
    n = g.n
    total = [0.0] * n
    if n == 0:
        return {}
    sources = range(n)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for start in range(0, n, _BETWEENNESS_BATCH):
            batch = sources[start:start + _BETWEENNESS_BATCH]
            if pool is None:
                results: Iterable[list[float]] = (_source_dependencies(g, s) for s in batch)
            else:
                results = pool.map(lambda s: _source_dependencies(g, s), batch)
            for delta in results:
                for i, d in enumerate(delta):
                    if d:
                        total[i] += d
    finally:
        if pool is not None:
            pool.shutdown()
    return dict(zip(g.vertices, total))


def betweenness(g: DirectedGraph, v: VertexId) -> float:
    i = g.index(v)
    return betweenness_centrality(g)[g.vertices[i]]


# -- PageRank ------------------------------------------------------------------


def transition_matrix(g: DirectedGraph) -> np.ndarray:
    """Column-stochastic matrix with ``M[v, w] = A[w, v] / out(w)``.

    Columns of dangling vertices (out-degree 0) are uniform ``1/n``.
    """
    n = g.n
    m = np.zeros((n, n))
    for w in range(n):
        succ = g._succ[w]
        if succ:
            m[list(succ), w] = 1.0 / len(succ)
        else:
            m[:, w] = 1.0 / n
    return m


def pagerank(
    g: DirectedGraph,
    alpha: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> dict[VertexId, float]:
    """Fixed point of ``PR = (1 - alpha)/n + alpha * M @ PR`` by power iteration.

    Iteration stops once the L1 change drops below ``tol``; raises
    :class:`NonConvergence` if that never happens within ``max_iter`` steps.
    """
    if not (0.0 < alpha < 1.0):
        raise InvalidConfig(f"alpha={alpha!r} must lie in (0, 1)")
    if not tol > 0:
        raise InvalidConfig(f"tol={tol!r} must be positive")
    if max_iter < 1:
        raise InvalidConfig(f"max_iter={max_iter!r} must be >= 1")
    n = g.n
    if n == 0:
        raise EmptyGraph("PageRank of an empty graph is undefined")

    src = np.fromiter((i for i, s in enumerate(g._succ) for _ in s), dtype=np.int64, count=g.edge_count)
    dst = np.fromiter((j for s in g._succ for j in s), dtype=np.int64, count=g.edge_count)
    out_deg = np.array([len(s) for s in g._succ], dtype=float)
    dangling = out_deg == 0
    inv_out = np.divide(1.0, out_deg, out=np.zeros(n), where=~dangling)

    pr = np.full(n, 1.0 / n)
    teleport = (1.0 - alpha) / n
    residual = np.inf
    for it in range(1, max_iter + 1):
        spread = np.bincount(dst, weights=(pr * inv_out)[src], minlength=n)
        new = alpha * (spread + pr[dangling].sum() / n) + teleport
        residual = float(np.abs(new - pr).sum())
        pr = new
        if residual < tol:
            logger.debug("pagerank converged after %d iterations (residual %.3e)", it, residual)
            break
    else:
        raise NonConvergence(max_iter, residual, tol)
    pr /= pr.sum()
    return dict(zip(g.vertices, pr.tolist()))


# -- bundle ----------------------------------------------------------------------


def all_node_scores(
    g: DirectedGraph,
    config: ScoringConfig | None = None,
    workers: int = 1,
) -> dict[VertexId, NodeScore]:
    """Every node score for every vertex in one call."""
    config = config or ScoringConfig()
    if g.n == 0:
        return {}
    deg = degrees(g)
    clo = closeness_all(g)
    btw = betweenness_centrality(g, workers=workers)
    pr = pagerank(g, config.alpha, config.tol, config.max_iter)
    return {
        v: NodeScore(deg[v].in_degree, deg[v].out_degree, deg[v].degree, clo[v], btw[v], pr[v])
        for v in g.vertices
    }
