import numpy as np
import pytest

from semigraph.errors import OracleSizeError
from semigraph.oracle import (MAX_ORACLE_VERTICES, DenseGraph, oracle_bfs, oracle_brandes,
                              oracle_offsets, oracle_offsets_array, oracle_pagerank_dense,
                              oracle_scan_exhaustive, oracle_triangles_bruteforce,
                              oracle_wcc_unionfind)


def test_size_guard():
    DenseGraph(MAX_ORACLE_VERTICES, [])
    with pytest.raises(OracleSizeError):
        DenseGraph(MAX_ORACLE_VERTICES + 1, [])


def test_text_cleanup_matches_conversion_rules():
    g = DenseGraph.from_text(["# c\n", "0 1\n", "0 1 5\n", "2 2\n", "\n", "1 0\n"])
    assert g.n == 3 and g.num_edges == 2
    assert g.out == [[1], [0], []]
    u = DenseGraph.from_text(["0 1\n", "1 0\n"], directed=False)
    assert u.num_edges == 1 and u.und == [{1}, {0}]


def test_bfs_oracle():
    g = DenseGraph(4, [(0, 1), (1, 2)])
    assert oracle_bfs(g, 0) == [0, 1, 2, -1]
    assert oracle_bfs(g, 3) == [-1, -1, -1, 0]


def test_brandes_oracle_diamond():
    # two shortest paths 0->3, each middle vertex carries half
    g = DenseGraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
    delta, sigma, depth = oracle_brandes(g, 0)
    assert delta == [0.0, 0.5, 0.5, 0.0]
    assert sigma == [1, 1, 1, 2]
    assert depth == [0, 1, 1, 2]


def test_pagerank_oracle():
    assert oracle_pagerank_dense(DenseGraph(1, []), 0.85, 30).tolist() == pytest.approx([0.15])
    x = oracle_pagerank_dense(DenseGraph(2, [(0, 1), (1, 0)]), 0.85, 300)
    assert np.allclose(x, 1.0)
    # one step by hand: x1 = 0.15 + 0.85 * x0[u] / outdeg(u)
    x = oracle_pagerank_dense(DenseGraph(3, [(0, 1), (0, 2), (1, 2)]), 0.85, 1)
    assert x.tolist() == pytest.approx([0.15, 0.15 + 0.85 * 0.075, 0.15 + 0.85 * (0.075 + 0.15)])


def test_wcc_oracle():
    assert oracle_wcc_unionfind(DenseGraph(4, [(0, 1), (2, 3)])) == [0, 0, 2, 2]
    assert oracle_wcc_unionfind(DenseGraph(3, [])) == [0, 1, 2]
    assert oracle_wcc_unionfind(DenseGraph(3, [(2, 0)])) == [0, 1, 0]


def test_triangle_oracle():
    k4 = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    assert oracle_triangles_bruteforce(DenseGraph(4, k4)) == ([3, 3, 3, 3], 4)
    # reciprocal edges count once
    assert oracle_triangles_bruteforce(DenseGraph(3, [(0, 1), (1, 0), (1, 2), (2, 0)]))[1] == 1


def test_scan_oracle():
    loc, best, arg = oracle_scan_exhaustive(DenseGraph(5, [(0, i) for i in range(1, 5)]))
    assert (best, arg) == (4, 0) and loc == [4, 1, 1, 1, 1]
    assert oracle_scan_exhaustive(DenseGraph(3, [(0, 1), (1, 2), (2, 0)]))[1:] == (3, 0)


def test_offsets_oracles_agree():
    rng = np.random.default_rng(1)
    deg = rng.integers(0, 400, 5000)
    for attr in (0, 3):
        assert oracle_offsets_array(deg, 8192, attr).tolist() == oracle_offsets(deg, 8192, attr)
