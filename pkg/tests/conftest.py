import numpy as np
import pytest

from semigraph import gen
from semigraph.engine import EngineConfig
from semigraph.oracle import DenseGraph
from semigraph.pagecache import CacheConfig
from semigraph.store import convert, convert_edges, open_graph


def edges_text(edges):
    return [f"{u} {v}\n" for u, v in edges]


@pytest.fixture
def make_graph(tmp_path):
    """Build a graph from an edge list; returns the opened Graph."""
    counter = [0]

    def _make(edges, directed=True, num_vertices=None, attr_bytes=0, **kw):
        counter[0] += 1
        g = tmp_path / f"g{counter[0]}.fgg"
        i = tmp_path / f"g{counter[0]}.fgi"
        if isinstance(edges, tuple):
            src, dst = edges
            convert_edges(src, dst, g, i, directed=directed, num_vertices=num_vertices,
                          attr_bytes=attr_bytes, **kw)
        else:
            convert(edges_text(edges), g, i, directed=directed, num_vertices=num_vertices,
                    attr_bytes=attr_bytes, **kw)
        return open_graph(g, i)

    return _make


@pytest.fixture
def random_pair(make_graph):
    """Engine graph plus oracle graph for a seeded random graph."""

    def _make(kind="er", n=500, degree=6.0, directed=True, seed=0):
        rng = np.random.default_rng(seed)
        make = gen.erdos_renyi if kind == "er" else gen.power_law
        src, dst = make(n, degree, rng, directed)
        graph = make_graph((src, dst), directed=directed, num_vertices=n)
        dense = DenseGraph(n, zip(src.tolist(), dst.tolist()), directed)
        return graph, dense

    return _make


def small_cache(pages=64, page_size=4096):
    return CacheConfig(pages, min(8, pages), page_size)


def config(**kw):
    return EngineConfig(**kw)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
