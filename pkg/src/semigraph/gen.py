"""Seeded synthetic graphs for tests and benchmarks."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np


def default_seed() -> int:
    return int(os.environ.get("SEMIGRAPH_SEED", "0"))


def erdos_renyi(n: int, avg_degree: float, rng: np.random.Generator, directed: bool = True):
    """Uniform random endpoint pairs; ``avg_degree`` counts out-edges (directed) or all edges."""
    m = int(round(n * avg_degree if directed else n * avg_degree / 2))
    return rng.integers(0, n, m), rng.integers(0, n, m)


def power_law(n: int, avg_degree: float, rng: np.random.Generator, directed: bool = True,
              exponent: float = 2.5):
    """Chung-Lu style graph whose expected degrees follow a power law."""
    m = int(round(n * avg_degree if directed else n * avg_degree / 2))
    weights = np.arange(1, n + 1, dtype=np.float64) ** (-1.0 / (exponent - 1.0))
    p = weights / weights.sum()
    perm = rng.permutation(n)
    src = perm[rng.choice(n, m, p=p)]
    dst = perm[rng.choice(n, m, p=p)]
    return src, dst


def hub_graph(n: int, hub: int, rng: np.random.Generator, avg_degree: float = 2.0):
    """Sparse random graph plus one vertex adjacent to everything."""
    src, dst = erdos_renyi(n, avg_degree, rng, directed=False)
    others = np.array([v for v in range(n) if v != hub])
    return np.concatenate([src, np.full(others.size, hub)]), np.concatenate([dst, others])


def lattice(side: int, rng: np.random.Generator):
    """Undirected side x side grid with shuffled vertex ids (high diameter, degree <= 4)."""
    idx = np.arange(side * side).reshape(side, side)
    a = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    b = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    perm = rng.permutation(side * side)
    return perm[a], perm[b]


def clustered_graph(clusters: int, size: int, p_in: float, rng: np.random.Generator):
    """Dense blocks on consecutive ids, no edges between blocks."""
    src, dst = [], []
    for c in range(clusters):
        base = c * size
        mask = np.triu(rng.random((size, size)) < p_in, 1)
        a, b = np.nonzero(mask)
        src.append(a + base)
        dst.append(b + base)
    return np.concatenate(src), np.concatenate(dst)


def edge_text(src, dst, values=None) -> str:
    if values is None:
        return "".join(f"{u} {v}\n" for u, v in zip(src.tolist(), dst.tolist()))
    return "".join(f"{u} {v} {w}\n" for u, v, w in zip(src.tolist(), dst.tolist(), values.tolist()))


def write_edge_text(path, src, dst, values=None) -> None:
    with open(path, "w") as fh:
        fh.write(edge_text(src, dst, values))


@dataclass
class GraphSpec:
    kind: str
    n: int
    avg_degree: float
    directed: bool
    seed: int

    def edges(self):
        rng = np.random.default_rng(self.seed)
        make = erdos_renyi if self.kind == "er" else power_law
        return make(self.n, self.avg_degree, rng, self.directed)


def log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))


def random_suite(count: int, seed: int | None = None, n_range=(100, 10_000),
                 degree_range=(2.0, 32.0)) -> list[GraphSpec]:
    """Half Erdos-Renyi, half power-law; sizes and degrees drawn log-uniformly."""
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    specs = []
    for i in range(count):
        kind = "er" if i % 2 == 0 else "pl"
        n = int(round(log_uniform(rng, *n_range)))
        deg = log_uniform(rng, *degree_range)
        directed = bool(rng.integers(0, 2))
        specs.append(GraphSpec(kind, n, deg, directed, int(rng.integers(0, 2**31))))
    return specs
