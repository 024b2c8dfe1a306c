"""Local detour centrality and the five baseline centrality measures.

Every measure is a pure function of an immutable :class:`WeightedDigraph`.
Per-vertex detour contexts are independent work units, so the detour score
can be evaluated for many vertices in parallel with results identical to a
sequential pass.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Mapping, Optional, Sequence

from .errors import EmptyGraph, NoConvergence
from .graph import WeightedDigraph, _dijkstra, _inflated_adjacency

_INF = math.inf

#: Measure tags in canonical output order.
MEASURES = (
    "ldc",
    "in_degree",
    "out_degree",
    "closeness",
    "triangles",
    "pagerank",
    "betweenness",
)


@dataclass(frozen=True)
class PageRankParams:
    """Damping, stopping tolerance, and iteration budget for pagerank."""

    alpha: float = 0.85
    tolerance: float = 1e-10
    max_iterations: int = 1000

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class CentralityVector:
    """One measure's score for every vertex of one graph."""

    measure: str
    scores: Mapping[str, float]


@dataclass(frozen=True)
class NeighborhoodContext:
    """Per-vertex bundle backing the detour computation.

    ``with_matrix[i][j]`` is the shortest-path length from ``members[i]`` to
    ``members[j]`` on the original graph, where routing through the center is
    allowed at original cost. ``without_matrix`` holds the same lengths on
    the reweighted graph in which every arc touching the center costs the
    graph's maximum arc weight. Entries are None when the target is
    unreachable.
    """

    center: str
    r: float
    members: tuple[str, ...]
    with_matrix: tuple[tuple[Optional[float], ...], ...]
    without_matrix: tuple[tuple[Optional[float], ...], ...]
    max_weight: float


def build_context(graph: WeightedDigraph, vertex: str, r: float) -> NeighborhoodContext:
    """Assemble the neighborhood matrices used by the detour score.

    The neighborhood contains every other vertex within threshold ``r`` of
    ``vertex`` in either direction. Both matrices are computed over full
    graph paths (not paths confined to the neighborhood); the second one
    runs on the reweighted graph where arcs into or out of ``vertex`` are
    inflated to the maximum arc weight.
    """
    center = graph._vertex_index(vertex)
    members = sorted(graph._vertex_index(u) for u in graph.local_neighborhood(vertex, r))
    names = graph.vertices

    apsp = graph._apsp_raw()
    with_rows = tuple(
        tuple((None if apsp[i][j] == _INF else apsp[i][j]) for j in members) for i in members
    )

    inflated = _inflated_adjacency(graph._adj, center, graph.max_arc_weight)
    n = graph.vertex_count
    without_rows = []
    for i in members:
        dist = _dijkstra(inflated, n, i)
        without_rows.append(tuple((None if dist[j] == _INF else dist[j]) for j in members))

    return NeighborhoodContext(
        center=vertex,
        r=r,
        members=tuple(names[i] for i in members),
        with_matrix=with_rows,
        without_matrix=tuple(without_rows),
        max_weight=graph.max_arc_weight,
    )


def ldc_from_context(ctx: NeighborhoodContext) -> float:
    """Detour score from a prepared context.

    Sums, over all ordered neighbor pairs, the excess of the center-inflated
    distance over the unrestricted distance, divided by the neighborhood
    size. Pairs unreachable in both matrices contribute 0; a pair finite in
    the unrestricted matrix but unreachable under inflation contributes the
    capped surrogate ``max_weight * |members| - with_distance`` (inflation
    never deletes arcs, so this branch is defensive).
    """
    k = len(ctx.members)
    if k == 0:
        return 0.0
    total = 0.0
    cap = ctx.max_weight * k
    for i in range(k):
        with_row = ctx.with_matrix[i]
        without_row = ctx.without_matrix[i]
        for j in range(k):
            if i == j:
                continue
            w_dist = with_row[j]
            wo_dist = without_row[j]
            if w_dist is None:
                continue
            if wo_dist is None:
                total += cap - w_dist
            else:
                total += wo_dist - w_dist
    return total / k


def ldc(graph: WeightedDigraph, vertex: str, r: Optional[float] = None) -> float:
    """Local detour centrality of one vertex.

    When ``r`` is omitted it defaults to the graph's mean pairwise distance.
    """
    if r is None:
        r = graph.mean_pairwise_distance()
    return ldc_from_context(build_context(graph, vertex, r))


def _ldc_scores_for(args: tuple[WeightedDigraph, float, Sequence[str]]) -> list[float]:
    graph, r, names = args
    return [ldc_from_context(build_context(graph, v, r)) for v in names]


def ldc_vector(
    graph: WeightedDigraph, r: Optional[float] = None, jobs: int = 1
) -> CentralityVector:
    """Detour score for every vertex; parallel evaluation matches sequential."""
    if graph.vertex_count == 0:
        raise EmptyGraph("graph has no vertices")
    if r is None:
        r = graph.mean_pairwise_distance()
    names = graph.vertices
    if jobs <= 1 or len(names) < 2:
        scores = _ldc_scores_for((graph, r, names))
    else:
        chunk = max(1, math.ceil(len(names) / jobs))
        pieces = [names[i : i + chunk] for i in range(0, len(names), chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_ldc_scores_for, [(graph, r, piece) for piece in pieces]))
        scores = [s for part in parts for s in part]
    return CentralityVector("ldc", dict(zip(names, scores)))


def degree(graph: WeightedDigraph, direction: str) -> CentralityVector:
    """Arc counts per vertex; ``direction`` is "in" or "out"."""
    if direction == "in":
        rows = graph._radj
    elif direction == "out":
        rows = graph._adj
    else:
        raise ValueError(f"direction must be 'in' or 'out', got {direction!r}")
    scores = {name: float(len(rows[i])) for i, name in enumerate(graph.vertices)}
    return CentralityVector(f"{direction}_degree", scores)


def closeness(graph: WeightedDigraph) -> CentralityVector:
    """Reachable-set closeness: (reachable count - 1) / sum of distances.

    The count includes the vertex itself and the sum runs over the vertices
    it can reach. A vertex reaching nothing scores 0, as does the degenerate
    case of a zero distance sum, so scores stay finite.
    """
    if graph.vertex_count < 2:
        raise EmptyGraph("closeness needs at least 2 vertices")
    scores: dict[str, float] = {}
    for i, name in enumerate(graph.vertices):
        row = graph._apsp_raw()[i]
        reachable = [d for d in row if d != _INF]
        total = sum(reachable)
        scores[name] = (len(reachable) - 1) / total if total > 0.0 else 0.0
    return CentralityVector("closeness", scores)


def triangles(graph: WeightedDigraph) -> CentralityVector:
    """Number of undirected 3-cliques through each vertex.

    The graph is symmetrized first: two vertices are adjacent when an arc
    exists in either direction.
    """
    n = graph.vertex_count
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        for j, _ in graph._adj[i]:
            nbrs[i].add(j)
            nbrs[j].add(i)
    scores: dict[str, float] = {}
    for i, name in enumerate(graph.vertices):
        count = 0
        for a in nbrs[i]:
            count += len(nbrs[i] & nbrs[a])
        scores[name] = count / 2.0  # each closing pair counted from both endpoints
    return CentralityVector("triangles", scores)


def _pagerank_iterate(
    graph: WeightedDigraph, params: PageRankParams
) -> tuple[list[float], list[float], int]:
    """Normalized power iteration of the pagerank update.

    The raw update adds (1 - alpha) of teleport mass per sweep, so it has no
    unnormalized fixed point; each iterate is rescaled to sum to 1 and the
    stopping rule applies to the rescaled vectors. Returns (normalized
    vector, last raw update, iterations used).
    """
    n = graph.vertex_count
    if n == 0:
        raise EmptyGraph("pagerank needs at least 1 vertex")
    alpha = params.alpha
    out_deg = [len(row) for row in graph._adj]
    radj = graph._radj
    x = [1.0 / n] * n
    teleport = (1.0 - alpha) / n
    for iteration in range(1, params.max_iterations + 1):
        dangling = sum(x[u] for u in range(n) if out_deg[u] == 0)
        base = teleport + dangling / n
        raw = [base + sum(x[u] / out_deg[u] for u, _ in radj[v]) for v in range(n)]
        total = sum(raw)
        new = [value / total for value in raw]
        diff = max(abs(new[v] - x[v]) for v in range(n))
        x = new
        if diff < params.tolerance:
            return x, raw, iteration
    raise NoConvergence(f"pagerank did not converge within {params.max_iterations} iterations")


def pagerank(graph: WeightedDigraph, params: Optional[PageRankParams] = None) -> CentralityVector:
    """Feedback centrality; dangling vertices spread their mass uniformly."""
    vector, _, _ = _pagerank_iterate(graph, params or PageRankParams())
    return CentralityVector("pagerank", dict(zip(graph.vertices, vector)))


def pagerank_with_raw(
    graph: WeightedDigraph, params: Optional[PageRankParams] = None
) -> tuple[CentralityVector, dict[str, float], int]:
    """Pagerank plus the raw (pre-normalization) update and iteration count."""
    vector, raw, iterations = _pagerank_iterate(graph, params or PageRankParams())
    names = graph.vertices
    return (
        CentralityVector("pagerank", dict(zip(names, vector))),
        dict(zip(names, raw)),
        iterations,
    )


def betweenness(graph: WeightedDigraph) -> CentralityVector:
    """Shortest-path betweenness over weighted directed paths.

    Accumulates, for every ordered pair (i, j) with i != v != j, the
    fraction of shortest i->j paths passing through v, via Brandes-style
    dependency accumulation on a Dijkstra traversal per source.
    """
    n = graph.vertex_count
    if n < 3:
        raise EmptyGraph("betweenness needs at least 3 vertices")
    adj = graph._adj
    bc = [0.0] * n
    for s in range(n):
        dist = [_INF] * n
        sigma = [0.0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        dist[s] = 0.0
        sigma[s] = 1.0
        settled: list[int] = []
        seen = [False] * n
        heap = [(0.0, s)]
        while heap:
            d, u = heappop(heap)
            if seen[u]:
                continue
            seen[u] = True
            settled.append(u)
            for v, w in adj[u]:
                nd = d + w
                if nd < dist[v]:
                    dist[v] = nd
                    sigma[v] = sigma[u]
                    preds[v] = [u]
                    heappush(heap, (nd, v))
                elif nd == dist[v] and not seen[v]:
                    sigma[v] += sigma[u]
                    preds[v].append(u)
        delta = [0.0] * n
        for w_idx in reversed(settled):
            for u in preds[w_idx]:
                delta[u] += sigma[u] / sigma[w_idx] * (1.0 + delta[w_idx])
            if w_idx != s:
                bc[w_idx] += delta[w_idx]
    return CentralityVector("betweenness", dict(zip(graph.vertices, bc)))


def compute_all(
    graph: WeightedDigraph,
    pagerank_params: Optional[PageRankParams] = None,
    jobs: int = 1,
) -> dict[str, CentralityVector]:
    """All seven measures in one pass, sharing the cached all-pairs table.

    Identical to calling each measure alone; errors from individual measures
    propagate.
    """
    if graph.vertex_count == 0:
        raise EmptyGraph("graph has no vertices")
    r = graph.mean_pairwise_distance()
    table = {
        "ldc": ldc_vector(graph, r, jobs=jobs),
        "in_degree": degree(graph, "in"),
        "out_degree": degree(graph, "out"),
        "closeness": closeness(graph),
        "triangles": triangles(graph),
        "pagerank": pagerank(graph, pagerank_params),
        "betweenness": betweenness(graph),
    }
    return table


def write_centrality_csv(table: Mapping[str, CentralityVector], dest, layout: str = "wide") -> None:
    """Export centrality vectors as CSV, rows in vertex-index order.

    ``layout`` is "wide" (one column per measure) or "long"
    (word,measure,value rows).
    """
    present = [m for m in MEASURES if m in table]
    if not present:
        raise ValueError("no measures to write")
    words = sorted(table[present[0]].scores)
    if hasattr(dest, "write"):
        _write_centrality(table, dest, layout, present, words)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            _write_centrality(table, fh, layout, present, words)


def _write_centrality(table, fh, layout, present, words) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    if layout == "wide":
        writer.writerow(["word"] + present)
        for word in words:
            writer.writerow(
                [word] + [format(table[m].scores[word], ".12g") for m in present]
            )
    elif layout == "long":
        writer.writerow(("word", "measure", "value"))
        for word in words:
            for m in present:
                writer.writerow((word, m, format(table[m].scores[word], ".12g")))
    else:
        raise ValueError(f"layout must be 'wide' or 'long', got {layout!r}")
