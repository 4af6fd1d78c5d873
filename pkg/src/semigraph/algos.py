"""The six applications as vertex programs.

Every program keeps its per-vertex state in numpy arrays and overrides the
batch hooks (``run_batch`` / ``run_on_messages``) where that removes a
Python-level loop; the per-vertex semantics are unchanged.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .engine import ASCENDING, EngineConfig, IterationStats, RunResult, VertexProgram, run_algorithm
from .errors import ContractViolation
from .store import Graph, Side

UNSET = -1


def _sides(graph_directed: bool) -> tuple:
    return (Side.IN, Side.OUT) if graph_directed else (Side.OUT,)


def _sorted_hits(sorted_set: np.ndarray, nb: np.ndarray) -> np.ndarray:
    """Elements of ``sorted_set`` present in the sorted array ``nb``."""
    if not sorted_set.size or not nb.size:
        return sorted_set[:0]
    if nb.size < sorted_set.size:
        sorted_set, nb = nb, sorted_set
    idx = nb.searchsorted(sorted_set)
    idx[idx == nb.size] = 0
    return sorted_set[nb[idx] == sorted_set]


def _merge_hits(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not a.size:
        return b
    if not b.size:
        return a
    return np.union1d(a, b)


# ---------------------------------------------------------------------------
# BFS


class BFSProgram(VertexProgram):
    def __init__(self, source: int):
        self.source = source

    def setup(self, engine):
        if not 0 <= self.source < engine.num_vertices:
            raise ContractViolation(f"source {self.source} is not a vertex")
        self.level = np.full(engine.num_vertices, UNSET, dtype=np.int64)

    def initial_vertices(self, engine):
        return [self.source]

    def run(self, ctx):
        v = ctx.vertex
        if self.level[v] == UNSET:
            self.level[v] = ctx.iteration
            ctx.request_edges(v, Side.OUT)

    def run_batch(self, ctx, vertices):
        new = vertices[self.level[vertices] == UNSET]
        self.level[new] = ctx.iteration
        ctx.request_own_edges(new, Side.OUT)

    def run_on_vertex(self, ctx, view):
        nb = view.neighbors
        ctx.activate(nb[self.level[nb] == UNSET])


# ---------------------------------------------------------------------------
# betweenness (single source)


class BCForward(VertexProgram):
    """Level-synchronous BFS that also counts shortest paths."""

    message_dtype = np.uint64

    def __init__(self, source: int):
        self.source = source

    def setup(self, engine):
        n = engine.num_vertices
        if not 0 <= self.source < n:
            raise ContractViolation(f"source {self.source} is not a vertex")
        self.depth = np.full(n, UNSET, dtype=np.int64)
        self.sigma = np.zeros(n, dtype=np.uint64)
        self.depth[self.source] = 0
        self.sigma[self.source] = 1

    def initial_vertices(self, engine):
        return [self.source]

    def run(self, ctx):
        ctx.request_edges(ctx.vertex, Side.OUT)

    def run_batch(self, ctx, vertices):
        ctx.request_own_edges(vertices, Side.OUT)

    def run_on_vertex(self, ctx, view):
        ctx.multicast(view.neighbors, self.sigma[view.vertex])

    def run_on_messages(self, ctx, dests, payloads):
        nxt = ctx.iteration + 1
        d = self.depth[dests]
        keep = (d == UNSET) | (d == nxt)
        dests = dests[keep]
        self.depth[dests] = nxt
        np.add.at(self.sigma, dests, payloads[keep])
        ctx.activate(dests)


class BCBackward(VertexProgram):
    """Dependency accumulation from the deepest level up, pulling over in-edges."""

    message_dtype = np.float64

    def __init__(self, depth: np.ndarray, sigma: np.ndarray):
        self.depth = depth
        self.sigma = sigma.astype(np.float64)
        self.max_depth = int(depth.max())

    def setup(self, engine):
        self.delta = np.zeros(engine.num_vertices, dtype=np.float64)

    def initial_vertices(self, engine):
        return np.flatnonzero(self.depth >= 0)

    def _level(self, ctx) -> int:
        return self.max_depth - ctx.iteration

    def run(self, ctx):
        self.run_batch(ctx, np.array([ctx.vertex], dtype=np.int64))

    def run_batch(self, ctx, vertices):
        level = self._level(ctx)
        d = self.depth[vertices]
        ctx.request_own_edges(vertices[(d == level) & (level > 0)], Side.IN)
        ctx.activate(vertices[d < level])

    def run_on_vertex(self, ctx, view):
        w = view.vertex
        ctx.multicast(view.neighbors, (1.0 + self.delta[w]) / self.sigma[w])

    def run_on_messages(self, ctx, dests, payloads):
        keep = self.depth[dests] == self._level(ctx) - 1
        dests = dests[keep]
        np.add.at(self.delta, dests, self.sigma[dests] * payloads[keep])


# ---------------------------------------------------------------------------
# PageRank


class PageRankProgram(VertexProgram):
    """Delta PageRank: ranks start at ``1 - d`` and only changes are propagated."""

    message_dtype = np.float64

    def __init__(self, damping: float = 0.85, threshold: float = 1e-4):
        if not 0.0 < damping < 1.0:
            raise ValueError("damping must lie in (0, 1)")
        if threshold < 0:
            raise ValueError("threshold must be >= 0")
        self.d = damping
        self.threshold = threshold

    def setup(self, engine):
        n = engine.num_vertices
        self.rank = np.full(n, 1.0 - self.d)
        self.pending = np.zeros(n)
        self.outgoing = np.zeros(n)
        self.out_degree = engine.index.degrees(np.arange(n), Side.OUT).astype(np.float64)

    def initial_vertices(self, engine):
        return np.arange(engine.num_vertices)

    def run(self, ctx):
        self.run_batch(ctx, np.array([ctx.vertex], dtype=np.int64))

    def run_batch(self, ctx, vertices):
        src = self.rank if ctx.iteration == 0 else self.pending
        deg = self.out_degree[vertices]
        live = vertices[deg > 0]
        self.outgoing[live] = self.d * src[live] / self.out_degree[live]
        self.pending[vertices] = 0.0
        ctx.request_own_edges(live, Side.OUT)

    def run_on_vertex(self, ctx, view):
        ctx.multicast(view.neighbors, self.outgoing[view.vertex])

    def run_on_messages(self, ctx, dests, payloads):
        np.add.at(self.rank, dests, payloads)
        np.add.at(self.pending, dests, payloads)
        touched = np.unique(dests)
        ctx.activate(touched[np.abs(self.pending[touched]) >= self.threshold])


# ---------------------------------------------------------------------------
# weakly connected components


class WCCProgram(VertexProgram):
    message_dtype = np.int64

    def setup(self, engine):
        self.label = np.arange(engine.num_vertices, dtype=np.int64)
        self.sides = _sides(engine.graph.directed)

    def initial_vertices(self, engine):
        return np.arange(engine.num_vertices)

    def run(self, ctx):
        for side in self.sides:
            ctx.request_edges(ctx.vertex, side)

    def run_batch(self, ctx, vertices):
        for side in self.sides:
            ctx.request_own_edges(vertices, side)

    def run_on_vertex(self, ctx, view):
        ctx.multicast(view.neighbors, self.label[view.vertex])

    def run_on_messages(self, ctx, dests, payloads):
        touched = np.unique(dests)
        before = self.label[touched]
        np.minimum.at(self.label, dests, payloads)
        ctx.activate(touched[self.label[touched] < before])


# ---------------------------------------------------------------------------
# triangle counting


class TriangleProgram(VertexProgram):
    """Vertex u finds triangles u < w < x and notifies w and x.

    Under vertical partitioning part j of u only fetches lists of the
    neighbors w inside its ID window.
    """

    message_dtype = np.int64
    vertical = True

    def setup(self, engine):
        self.count = np.zeros(engine.num_vertices, dtype=np.int64)
        self.sides = _sides(engine.graph.directed)
        self.parts = engine.config.vertical_parts

    def initial_vertices(self, engine):
        return np.arange(engine.num_vertices)

    def run(self, ctx):
        for side in self.sides:
            ctx.request_edges(ctx.vertex, side)

    def run_batch(self, ctx, vertices):
        for side in self.sides:
            ctx.request_own_edges(vertices, side)

    def run_on_vertex(self, ctx, view):
        u = ctx.vertex
        loc = ctx.local
        if view.vertex == u and "higher" not in loc:
            nb = view.neighbors
            if len(self.sides) == 2:
                first = loc.pop("own", None)
                if first is None:
                    loc["own"] = nb
                    return
                nb = np.union1d(first, nb)
            higher = nb[nb.searchsorted(u, "right"):]
            loc["higher"] = higher
            loc["wait"] = {}
            ws = higher[:-1]
            if self.parts > 1:
                lo, hi = ctx.part_window
                ws = ws[(ws >= lo) & (ws < hi)]
            for side in self.sides:
                ctx.request_edges(ws, side)
            return
        w = view.vertex
        higher = loc["higher"]
        hits = _sorted_hits(higher[higher.searchsorted(w, "right"):], view.neighbors)
        if len(self.sides) == 2:
            prev = loc["wait"].pop(w, None)
            if prev is None:
                loc["wait"][w] = hits
                return
            hits = _merge_hits(prev, hits)
        c = int(hits.size)
        if c:
            if self.parts > 1:
                # parts of u may run on different threads; they report by message
                ctx.send(u, c)
            else:
                self.count[u] += c
            ctx.send(w, c)
            ctx.multicast(hits, 1)

    def run_on_messages(self, ctx, dests, payloads):
        np.add.at(self.count, dests, payloads)


# ---------------------------------------------------------------------------
# scan statistics


def locality_upper_bound(degree):
    """Edges a closed neighborhood of ``degree`` neighbors can hold."""
    return degree + degree * (degree - 1) // 2


class ScanStatProgram(VertexProgram):
    """Maximum locality statistic, highest degree first, with bound pruning.

    A vertex is pruned when even a full clique around it could not beat the
    current maximum (ties with a smaller current argmax also prune).  With
    vertical parts each part reports ``sum(|N(w) & N(v)| + 2)`` over its
    window to the owner, which halves the total once all parts reported.
    """

    message_dtype = np.int64
    vertical = True
    scan_direction = ASCENDING
    # small windows let early high-degree results prune later vertices
    max_running = 64

    def __init__(self, prune: bool = True):
        self.prune = prune

    def setup(self, engine):
        n = engine.num_vertices
        self.sides = _sides(engine.graph.directed)
        ids = np.arange(n)
        deg = engine.index.degrees(ids, Side.OUT).astype(np.int64)
        if engine.graph.directed:
            deg = deg + engine.index.degrees(ids, Side.IN)
        self.degree_bound = deg
        self.locality = np.full(n, UNSET, dtype=np.int64)
        self.parts = engine.config.vertical_parts
        self.partial = np.zeros(n, dtype=np.int64)
        self.reports = np.zeros(n, dtype=np.int64)
        self.pruned = 0
        self.reducer = engine.reducer("scan")

    def initial_vertices(self, engine):
        return np.arange(engine.num_vertices)

    def schedule(self, vertices, iteration):
        return vertices[np.lexsort((vertices, -self.degree_bound[vertices]))]

    def _skip(self, v: int, degree: int) -> bool:
        if self.prune and self.parts == 1 and self.reducer.beats(locality_upper_bound(degree), v):
            self.pruned += 1
            return True
        return False

    def run(self, ctx):
        v = ctx.vertex
        if self._skip(v, int(self.degree_bound[v])):
            return
        for side in self.sides:
            ctx.request_edges(v, side)

    def run_batch(self, ctx, vertices):
        # pruning depends on results of earlier vertices, so stay sequential
        run = self.run
        for v in vertices.tolist():
            ctx.vertex = v
            run(ctx)

    def _finish(self, ctx, v: int, loc: dict) -> None:
        if self.parts == 1:
            value = int(loc["N"].size) + loc["acc"] // 2
            self.locality[v] = value
            self.reducer.update(value, v)
        else:
            ctx.send(v, loc["acc"])

    def run_on_vertex(self, ctx, view):
        v = ctx.vertex
        loc = ctx.local
        if view.vertex == v and "N" not in loc:
            nb = view.neighbors
            if len(self.sides) == 2:
                first = loc.pop("own", None)
                if first is None:
                    loc["own"] = nb
                    return
                nb = np.union1d(first, nb)
            if self._skip(v, int(nb.size)):
                return
            loc["N"] = nb
            loc["acc"] = 0
            loc["wait"] = {}
            ws = nb
            if self.parts > 1:
                lo, hi = ctx.part_window
                ws = ws[(ws >= lo) & (ws < hi)]
            loc["left"] = int(ws.size)
            if not ws.size:
                self._finish(ctx, v, loc)
                return
            ws = ws.astype(np.int64)
            for side in self.sides:
                ctx.request_edges(ws, side)
            return
        w = view.vertex
        hits = _sorted_hits(loc["N"], view.neighbors)
        if len(self.sides) == 2:
            prev = loc["wait"].pop(w, None)
            if prev is None:
                loc["wait"][w] = hits
                return
            hits = _merge_hits(prev, hits)
        loc["acc"] += int(hits.size) + (2 if self.parts > 1 else 0)
        loc["left"] -= 1
        if loc["left"] == 0:
            self._finish(ctx, v, loc)

    def run_on_messages(self, ctx, dests, payloads):
        np.add.at(self.partial, dests, payloads)
        np.add.at(self.reports, dests, 1)
        touched = np.unique(dests)
        done = touched[self.reports[touched] == self.parts]
        if done.size:
            self.locality[done] = self.partial[done] // 2
            vals = self.locality[done]
            best = int(vals.max())
            self.reducer.update(best, int(done[vals == best].min()))


# ---------------------------------------------------------------------------
# drivers


@dataclass
class AlgoResult:
    values: np.ndarray
    runs: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def iterations(self) -> list:
        out = []
        for run in self.runs:
            out.extend(run.iterations)
        return out

    @property
    def io(self):
        total = None
        for run in self.runs:
            total = run.io if total is None else total + run.io
        return total


def bfs(graph: Graph, source: int, config: EngineConfig | None = None) -> AlgoResult:
    prog = BFSProgram(source)
    res = run_algorithm(graph, prog, config)
    return AlgoResult(prog.level, [res])


def bc_single_source(graph: Graph, source: int, config: EngineConfig | None = None) -> AlgoResult:
    fwd = BCForward(source)
    r1 = run_algorithm(graph, fwd, config)
    back = BCBackward(fwd.depth, fwd.sigma)
    r2 = run_algorithm(graph, back, config)
    delta = back.delta
    delta[source] = 0.0
    return AlgoResult(delta, [r1, r2], {"sigma": fwd.sigma, "depth": fwd.depth})


def pagerank(graph: Graph, damping: float = 0.85, max_iters: int = 30, threshold: float = 1e-4,
             config: EngineConfig | None = None) -> AlgoResult:
    prog = PageRankProgram(damping, threshold)
    res = run_algorithm(graph, prog, config, max_iterations=max_iters)
    return AlgoResult(prog.rank, [res])


def wcc(graph: Graph, config: EngineConfig | None = None) -> AlgoResult:
    prog = WCCProgram()
    res = run_algorithm(graph, prog, config)
    return AlgoResult(prog.label, [res])


def triangle_count(graph: Graph, config: EngineConfig | None = None) -> AlgoResult:
    prog = TriangleProgram()
    res = run_algorithm(graph, prog, config)
    total = int(prog.count.sum())
    if total % 3:
        raise AssertionError("per-vertex triangle counts do not sum to a multiple of 3")
    return AlgoResult(prog.count, [res], {"total": total // 3})


def scan_statistics(graph: Graph, config: EngineConfig | None = None,
                    prune: bool = True) -> AlgoResult:
    prog = ScanStatProgram(prune)
    res = run_algorithm(graph, prog, config)
    red = prog.reducer
    return AlgoResult(prog.locality, [res],
                      {"max": red.value, "argmax": red.vertex, "pruned": prog.pruned})


ALGORITHMS = ("bfs", "bc", "pr", "wcc", "tc", "ss")


def run_named(name: str, graph: Graph, config: EngineConfig | None = None, source: int = 0,
              damping: float = 0.85, iters: int = 30, threshold: float = 1e-4) -> AlgoResult:
    if name == "bfs":
        return bfs(graph, source, config)
    if name == "bc":
        return bc_single_source(graph, source, config)
    if name == "pr":
        return pagerank(graph, damping, iters, threshold, config)
    if name == "wcc":
        return wcc(graph, config)
    if name == "tc":
        return triangle_count(graph, config)
    if name == "ss":
        return scan_statistics(graph, config)
    raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")


# ---------------------------------------------------------------------------
# CSV output


def write_values_csv(path, result: AlgoResult, name: str) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        if name == "ss":
            out.writerow(["stat", "value"])
            out.writerow(["max", result.summary["max"]])
            out.writerow(["argmax", result.summary["argmax"]])
            return
        out.writerow(["vertex_id", "value"])
        vals = result.values
        if vals.dtype.kind == "f":
            rows = ((i, repr(float(x))) for i, x in enumerate(vals.tolist()))
        elif name == "bfs":
            rows = ((i, "" if x == UNSET else x) for i, x in enumerate(vals.tolist()))
        else:
            rows = enumerate(vals.tolist())
        out.writerows(rows)


def write_stats_csv(path, iterations: list) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(IterationStats.columns())
        for i, st in enumerate(iterations):
            row = st.as_row()
            row[0] = i
            out.writerow(row)
