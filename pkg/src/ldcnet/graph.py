"""Weighted directed graph with deterministic shortest-path machinery.

The graph is immutable after construction: every operation below is a pure
read, so a single instance can be shared freely across worker processes.
Vertex labels are interned strings; each vertex receives a stable integer
index (its lexicographic rank at construction time) and all internal tables
are indexed by that integer. Ties in the shortest-path priority queue break
on the vertex index, which makes every result independent of arc insertion
order.
"""

from __future__ import annotations

import csv
import math
import os
import sys
from heapq import heappop, heappush
from typing import IO, Iterable, Iterator, Optional, Union

from .errors import EmptyGraph, MalformedLine, UnknownVertex

Arc = tuple[str, str, float]
PathOrFile = Union[str, os.PathLike, IO[str]]

GRAPH_CSV_HEADER = ("source", "target", "weight")

_INF = math.inf


def _dijkstra(adj: list[tuple[tuple[int, float], ...]], n: int, src: int) -> list[float]:
    """Single-source shortest paths over an integer adjacency list.

    Returns a dense distance list with ``math.inf`` for unreachable targets.
    Heap entries are (distance, vertex index), so equal distances settle in
    index order.
    """
    dist = [_INF] * n
    dist[src] = 0.0
    heap = [(0.0, src)]
    pop, push = heappop, heappush
    while heap:
        d, u = pop(heap)
        if d > dist[u]:
            continue  # stale entry
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                push(heap, (nd, v))
    return dist


def _inflated_adjacency(
    adj: list[tuple[tuple[int, float], ...]], center: int, weight: float
) -> list[tuple[tuple[int, float], ...]]:
    """Copy of ``adj`` where every arc into or out of ``center`` costs ``weight``."""
    out = []
    for i, row in enumerate(adj):
        if i == center:
            out.append(tuple((j, weight) for j, _ in row))
        else:
            out.append(tuple((j, weight if j == center else w) for j, w in row))
    return out


class DistanceMatrix:
    """Dense all-pairs shortest-path table, indexed by vertex label."""

    def __init__(self, names: tuple[str, ...], rows: list[list[float]]):
        self._names = names
        self._index = {name: i for i, name in enumerate(names)}
        self._rows = rows

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._names

    def distance(self, source: str, target: str) -> Optional[float]:
        """Shortest-path length, or None when target is unreachable."""
        try:
            d = self._rows[self._index[source]][self._index[target]]
        except KeyError as exc:
            raise UnknownVertex(str(exc.args[0])) from None
        return None if d == _INF else d

    def row(self, source: str) -> dict[str, Optional[float]]:
        if source not in self._index:
            raise UnknownVertex(source)
        raw = self._rows[self._index[source]]
        return {name: (None if raw[i] == _INF else raw[i]) for i, name in enumerate(self._names)}

    def _raw(self) -> list[list[float]]:
        return self._rows


class WeightedDigraph:
    """Directed graph whose arcs carry non-negative finite weights.

    Construction rejects self-arcs, duplicate ordered pairs, and invalid
    weights. Asymmetry is allowed: an arc (u, v) may exist without (v, u),
    and when both exist their weights may differ.
    """

    def __init__(self, arcs: Iterable[Arc] = (), vertices: Iterable[str] = ()):
        weights: dict[tuple[str, str], float] = {}
        names = {sys.intern(v) for v in vertices}
        for u, v, w in arcs:
            u, v = sys.intern(u), sys.intern(v)
            w = float(w)
            if u == v:
                raise ValueError(f"self-arc not allowed: {u!r}")
            if (u, v) in weights:
                raise ValueError(f"duplicate arc: {u!r} -> {v!r}")
            if not math.isfinite(w) or w < 0.0:
                raise ValueError(f"arc weight must be finite and >= 0, got {w!r}")
            weights[(u, v)] = w
            names.add(u)
            names.add(v)

        self._names: tuple[str, ...] = tuple(sorted(names))
        self._index: dict[str, int] = {name: i for i, name in enumerate(self._names)}
        n = len(self._names)
        out: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        rin: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for (u, v), w in weights.items():
            ui, vi = self._index[u], self._index[v]
            out[ui].append((vi, w))
            rin[vi].append((ui, w))
        self._adj: list[tuple[tuple[int, float], ...]] = [tuple(sorted(row)) for row in out]
        self._radj: list[tuple[tuple[int, float], ...]] = [tuple(sorted(row)) for row in rin]
        self._max_weight: float = max(weights.values()) if weights else 0.0
        self._apsp_rows: Optional[list[list[float]]] = None

    # -- basic queries ------------------------------------------------------

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._names

    @property
    def vertex_count(self) -> int:
        return len(self._names)

    @property
    def arc_count(self) -> int:
        return sum(len(row) for row in self._adj)

    @property
    def max_arc_weight(self) -> float:
        """Largest arc weight in the graph (0.0 when there are no arcs)."""
        return self._max_weight

    def __contains__(self, vertex: str) -> bool:
        return vertex in self._index

    def arcs(self) -> Iterator[Arc]:
        """All arcs as (source, target, weight), sorted by vertex index."""
        for i, row in enumerate(self._adj):
            u = self._names[i]
            for j, w in row:
                yield (u, self._names[j], w)

    def weight(self, source: str, target: str) -> Optional[float]:
        si = self._vertex_index(source)
        ti = self._vertex_index(target)
        for j, w in self._adj[si]:
            if j == ti:
                return w
        return None

    def out_degree(self, vertex: str) -> int:
        return len(self._adj[self._vertex_index(vertex)])

    def in_degree(self, vertex: str) -> int:
        return len(self._radj[self._vertex_index(vertex)])

    def _vertex_index(self, vertex: str) -> int:
        try:
            return self._index[vertex]
        except KeyError:
            raise UnknownVertex(vertex) from None

    # -- shortest paths -----------------------------------------------------

    def sssp(self, source: str) -> dict[str, Optional[float]]:
        """Exact shortest-path length from ``source`` to every vertex.

        Unreachable targets are reported as None, never as a numeric
        sentinel.
        """
        src = self._vertex_index(source)
        dist = _dijkstra(self._adj, self.vertex_count, src)
        return {
            name: (None if dist[i] == _INF else dist[i]) for i, name in enumerate(self._names)
        }

    def apsp(self) -> DistanceMatrix:
        """All-pairs shortest paths; computed once and cached."""
        return DistanceMatrix(self._names, self._apsp_raw())

    def _apsp_raw(self) -> list[list[float]]:
        if self._apsp_rows is None:
            n = self.vertex_count
            self._apsp_rows = [_dijkstra(self._adj, n, s) for s in range(n)]
        return self._apsp_rows

    def mean_pairwise_distance(self) -> float:
        """Sum of all finite ordered-pair distances divided by the vertex count.

        The divisor is the number of vertices, not the number of ordered
        pairs; unreachable pairs are excluded from the sum.
        """
        if self.vertex_count < 2:
            raise EmptyGraph("mean pairwise distance needs at least 2 vertices")
        total = 0.0
        for drow in self._apsp_raw():
            for d in drow:
                if d != _INF:
                    total += d
        return total / self.vertex_count

    def local_neighborhood(self, vertex: str, r: float) -> set[str]:
        """Vertices within distance ``r`` of ``vertex`` in either direction.

        The vertex itself is excluded.
        """
        if r < 0.0:
            raise ValueError(f"threshold must be >= 0, got {r!r}")
        vi = self._vertex_index(vertex)
        rows = self._apsp_raw()
        out_row = rows[vi]
        members = set()
        for u in range(self.vertex_count):
            if u == vi:
                continue
            if out_row[u] <= r or rows[u][vi] <= r:
                members.add(self._names[u])
        return members

    # -- serialization ------------------------------------------------------

    def to_csv(self, dest: PathOrFile) -> None:
        """Write ``source,target,weight`` rows in vertex-index order.

        Weights are emitted with ``repr`` so that parse/emit round-trips are
        bit-exact.
        """
        if hasattr(dest, "write"):
            self._write_csv(dest)  # type: ignore[arg-type]
        else:
            with open(dest, "w", encoding="utf-8", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh: IO[str]) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRAPH_CSV_HEADER)
        for u, v, w in self.arcs():
            writer.writerow((u, v, repr(w)))

    @classmethod
    def from_csv(cls, source: PathOrFile) -> "WeightedDigraph":
        """Parse a graph from its CSV form; raises MalformedLine on bad rows."""
        if hasattr(source, "read"):
            return cls._read_csv(source)  # type: ignore[arg-type]
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return cls._read_csv(fh)

    @classmethod
    def _read_csv(cls, fh: IO[str]) -> "WeightedDigraph":
        reader = csv.reader(fh)
        arcs: list[Arc] = []
        seen: set[tuple[str, str]] = set()
        header = next(reader, None)
        if header is None or tuple(header) != GRAPH_CSV_HEADER:
            raise MalformedLine(1, f"expected header {','.join(GRAPH_CSV_HEADER)!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise MalformedLine(line_no, f"expected 3 fields, got {len(row)}")
            u, v, raw_w = row[0], row[1], row[2]
            if not u or not v:
                raise MalformedLine(line_no, "empty vertex label")
            if u == v:
                raise MalformedLine(line_no, f"self-arc on {u!r}")
            if (u, v) in seen:
                raise MalformedLine(line_no, f"duplicate arc {u!r} -> {v!r}")
            try:
                w = float(raw_w)
            except ValueError:
                raise MalformedLine(line_no, f"bad weight {raw_w!r}") from None
            if not math.isfinite(w) or w < 0.0:
                raise MalformedLine(line_no, f"weight must be finite and >= 0, got {raw_w!r}")
            seen.add((u, v))
            arcs.append((u, v, w))
        return cls(arcs)
