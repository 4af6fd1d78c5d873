"""Plain in-memory reference implementations.

Nothing here imports the binary format or the engine: graphs are read from
the same text edge lists that ``convert`` consumes, with the same cleanup
rules (self-loops dropped, parallel edges collapsed).
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .errors import OracleSizeError

MAX_ORACLE_VERTICES = 20_000


class DenseGraph:
    """Adjacency sets for both directions plus the undirected projection."""

    def __init__(self, num_vertices: int, edges, directed: bool = True):
        if num_vertices > MAX_ORACLE_VERTICES:
            raise OracleSizeError(
                f"{num_vertices} vertices exceeds the oracle limit of {MAX_ORACLE_VERTICES}")
        self.n = num_vertices
        self.directed = directed
        out = [set() for _ in range(num_vertices)]
        inn = [set() for _ in range(num_vertices)]
        for u, v in edges:
            if u == v:
                continue
            out[u].add(v)
            inn[v].add(u)
            if not directed:
                out[v].add(u)
                inn[u].add(v)
        self.out = [sorted(s) for s in out]
        self.inn = [sorted(s) for s in inn]
        self.und = [o | i for o, i in zip(out, inn)]

    @classmethod
    def from_text(cls, lines, directed: bool = True, num_vertices: int | None = None):
        edges = []
        top = -1
        for raw in lines:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split()
            u, v = int(cols[0]), int(cols[1])
            edges.append((u, v))
            top = max(top, u, v)
        n = top + 1 if num_vertices is None else num_vertices
        return cls(n, edges, directed)

    @classmethod
    def from_file(cls, path, directed: bool = True, num_vertices: int | None = None):
        with open(path) as fh:
            return cls.from_text(fh, directed, num_vertices)

    @property
    def num_edges(self) -> int:
        m = sum(len(a) for a in self.out)
        return m if self.directed else m // 2


def oracle_bfs(g: DenseGraph, source: int) -> list:
    level = [-1] * g.n
    level[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.out[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
    return level


def oracle_brandes(g: DenseGraph, source: int):
    """Single-source dependencies; returns ``(delta, sigma, depth)``."""
    sigma = [0] * g.n
    depth = [-1] * g.n
    preds = [[] for _ in range(g.n)]
    sigma[source] = 1
    depth[source] = 0
    order = []
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in g.out[v]:
            if depth[w] < 0:
                depth[w] = depth[v] + 1
                queue.append(w)
            if depth[w] == depth[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = [0.0] * g.n
    for w in reversed(order):
        for v in preds[w]:
            delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
    delta[source] = 0.0
    return delta, sigma, depth


def oracle_pagerank_dense(g: DenseGraph, damping: float = 0.85, iters: int = 30) -> np.ndarray:
    """Synchronous iteration x <- (1-d) + d * A^T (x / outdeg); sinks keep their mass."""
    src = np.array([u for u in range(g.n) for _ in g.out[u]], dtype=np.int64)
    dst = np.array([v for u in range(g.n) for v in g.out[u]], dtype=np.int64)
    outdeg = np.array([len(a) for a in g.out], dtype=np.float64)
    x = np.full(g.n, 1.0 - damping)
    for _ in range(iters):
        share = np.divide(x, outdeg, out=np.zeros(g.n), where=outdeg > 0)
        x = (1.0 - damping) + damping * np.bincount(dst, weights=share[src], minlength=g.n)
    return x


def oracle_wcc_unionfind(g: DenseGraph) -> list:
    parent = list(range(g.n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u in range(g.n):
        for v in g.out[u]:
            ru, rv = find(u), find(v)
            if ru != rv:
                # keep the smaller id as root so roots are component minima
                if ru < rv:
                    parent[rv] = ru
                else:
                    parent[ru] = rv
    return [find(v) for v in range(g.n)]


def oracle_triangles_bruteforce(g: DenseGraph):
    """Per-vertex incident triangle counts and the total, by edge-wise set intersection."""
    counts = [0] * g.n
    total = 0
    for u in range(g.n):
        nu = g.und[u]
        for w in nu:
            if w <= u:
                continue
            for x in nu & g.und[w]:
                if x > w:
                    total += 1
                    counts[u] += 1
                    counts[w] += 1
                    counts[x] += 1
    return counts, total


def oracle_scan_exhaustive(g: DenseGraph):
    """Locality of every vertex, the maximum, and the smallest maximizing id."""
    loc = []
    for v in range(g.n):
        nv = g.und[v]
        inner = sum(len(nv & g.und[w]) for w in nv) // 2
        loc.append(len(nv) + inner)
    best = max(loc) if loc else 0
    return loc, best, loc.index(best) if loc else -1


def oracle_offsets(degrees, region_offset: int, attr_bytes: int = 0) -> list:
    """Absolute start of each edge list: running sum of ``8 + deg * (4 + attr_bytes)``."""
    table = []
    pos = region_offset
    for d in degrees:
        table.append(pos)
        pos += 8 + int(d) * (4 + attr_bytes)
    return table


def oracle_offsets_array(degrees, region_offset: int, attr_bytes: int = 0) -> np.ndarray:
    """Vectorized cumulative sum for graphs too large for :func:`oracle_offsets`."""
    sizes = 8 + np.asarray(degrees, dtype=np.int64) * (4 + attr_bytes)
    table = np.empty(sizes.size, dtype=np.int64)
    table[0:1] = region_offset
    np.cumsum(sizes[:-1], out=table[1:])
    table[1:] += region_offset
    return table
