"""Command-line driver: convert, run, verify, bench, stats.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import algos, gen, oracle
from .engine import EngineConfig
from .errors import FormatError, SemigraphError
from .pagecache import DEFAULT_PAGE_SIZE, CacheConfig
from .store import convert, convert_edges, open_graph

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _cache_pages(text: str):
    if text == "all":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("cache pages must be an integer or 'all'") from None
    if value < 1:
        raise argparse.ArgumentTypeError("cache pages must be >= 1")
    return value


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cache-pages", type=_cache_pages, default=1024,
                   help="cache capacity in pages, or 'all' to hold the whole file")
    p.add_argument("--page-size", type=int, default=DEFAULT_PAGE_SIZE)
    p.add_argument("--associativity", type=int, default=8)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--r", dest="range_shift", type=int, default=14, help="range shift")
    p.add_argument("--merging", type=_on_off, default=True, help="on|off")
    p.add_argument("--vertical-parts", type=int, default=1)
    p.add_argument("--max-running", type=int, default=4000)
    p.add_argument("--parallel", action="store_true", help="one OS thread per worker")


def _add_algo_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source", type=int, default=0)
    p.add_argument("--d", type=float, default=0.85, help="PageRank damping")
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--threshold", type=float, default=1e-4)


def engine_config(args, file_size: int) -> EngineConfig:
    try:
        if args.cache_pages == "all":
            cache = CacheConfig.for_bytes(file_size, args.page_size, args.associativity)
        else:
            assoc = min(args.associativity, args.cache_pages)
            cache = CacheConfig(args.cache_pages, assoc, args.page_size)
        return EngineConfig(num_threads=args.threads, range_shift=args.range_shift,
                            max_running_per_thread=args.max_running, cache=cache,
                            merging=args.merging, vertical_parts=args.vertical_parts,
                            parallel=args.parallel)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _index_path(args):
    return args.index if args.index else Path(args.graph).with_suffix(".fgi")


# ---------------------------------------------------------------------------


def cmd_convert(args) -> int:
    res = convert(args.input, args.out_graph, args.out_index, directed=args.directed,
                  attr_bytes=args.attr_bytes, num_vertices=args.num_vertices)
    print(f"vertices {res.num_vertices}")
    print(f"edges {res.num_edges}")
    return EXIT_OK


def cmd_run(args) -> int:
    graph = open_graph(args.graph, _index_path(args))
    cfg = engine_config(args, graph.file.size)
    if args.algorithm in ("bfs", "bc") and not 0 <= args.source < graph.num_vertices:
        raise UsageError(f"--source {args.source} is not a vertex of this graph")
    if not 0.0 < args.d < 1.0:
        raise UsageError("--d must lie in (0, 1)")
    t0 = time.perf_counter()
    res = algos.run_named(args.algorithm, graph, cfg, source=args.source, damping=args.d,
                          iters=args.iters, threshold=args.threshold)
    elapsed = time.perf_counter() - t0
    out = args.out or f"{args.algorithm}.csv"
    stats = args.stats or f"{args.algorithm}_stats.csv"
    algos.write_values_csv(out, res, args.algorithm)
    algos.write_stats_csv(stats, res.iterations)
    io = res.io
    print(f"{args.algorithm}: {len(res.iterations)} iterations, {elapsed:.3f}s, "
          f"bytes_read {io.bytes_read}, issued_requests {io.requests_issued_to_file}")
    for key, value in res.summary.items():
        if np.isscalar(value):
            print(f"{key} {value}")
    return EXIT_OK


def _compare(name: str, res, g: oracle.DenseGraph, args) -> tuple[bool, float, str]:
    """(passed, max deviation, detail) of one algorithm against its oracle."""
    if name == "bfs":
        ref = np.array(oracle.oracle_bfs(g, args.source))
        dev = float(np.abs(res.values - ref).max()) if ref.size else 0.0
        return dev == 0, dev, ""
    if name == "bc":
        ref = np.array(oracle.oracle_brandes(g, args.source)[0])
        dev = float(np.abs(res.values - ref).max()) if ref.size else 0.0
        return dev <= 1e-9, dev, ""
    if name == "pr":
        ref = oracle.oracle_pagerank_dense(g, args.d, args.iters)
        dev = float(np.abs(res.values - ref).max()) if ref.size else 0.0
        return dev <= 1e-6, dev, ""
    if name == "wcc":
        ref = np.array(oracle.oracle_wcc_unionfind(g))
        dev = float(np.count_nonzero(res.values != ref))
        return dev == 0, dev, ""
    if name == "tc":
        counts, total = oracle.oracle_triangles_bruteforce(g)
        dev = float(np.abs(res.values - np.array(counts)).max()) if counts else 0.0
        dev = max(dev, abs(res.summary["total"] - total))
        return dev == 0, dev, f"total {res.summary['total']} vs {total}"
    _, best, arg = oracle.oracle_scan_exhaustive(g)
    got = (res.summary["max"], res.summary["argmax"])
    dev = float(abs(got[0] - best))
    return got == (best, arg), dev, f"max/argmax {got[0]}/{got[1]} vs {best}/{arg}"


def cmd_verify(args) -> int:
    names = args.algorithms or list(algos.ALGORITHMS)
    for name in names:
        if name not in algos.ALGORITHMS:
            raise UsageError(f"unknown algorithm {name!r}")
    with tempfile.TemporaryDirectory() as tmp:
        if args.graph:
            gpath, ipath = Path(args.graph), _index_path(args)
        else:
            gpath, ipath = Path(tmp) / "g.fgg", Path(tmp) / "g.fgi"
            convert(args.input, gpath, ipath, directed=args.directed)
        dense = oracle.DenseGraph.from_file(args.input, args.directed)
        failed = False
        try:
            graph = open_graph(gpath, ipath)
        except FormatError as exc:
            for name in names:
                print(f"{name} FAIL {exc}")
            return EXIT_FAIL
        if graph.num_vertices != dense.n:
            dense = oracle.DenseGraph.from_file(args.input, args.directed, graph.num_vertices)
        cfg = engine_config(args, graph.file.size)
        for name in names:
            try:
                # PR is checked at threshold 0 against the synchronous oracle
                res = algos.run_named(name, graph, cfg, source=args.source, damping=args.d,
                                      iters=args.iters, threshold=0.0)
                ok, dev, detail = _compare(name, res, dense, args)
            except FormatError as exc:
                ok, dev, detail = False, float("nan"), str(exc)
            failed |= not ok
            line = f"{name} {'PASS' if ok else 'FAIL'} max_dev={dev:.3g}"
            print(f"{line} {detail}".rstrip())
    return EXIT_FAIL if failed else EXIT_OK


BENCH_COLUMNS = ["algorithm", "kind", "vertices", "edges", "page_size", "cache_pages", "merging",
                 "threads", "vertical_parts", "iterations", "bytes_read", "issued_requests",
                 "cache_hits", "cache_misses", "wall_ms"]


def cmd_bench(args) -> int:
    rng = np.random.default_rng(gen.default_seed())
    make = gen.erdos_renyi if args.kind == "er" else gen.power_law
    src, dst = make(args.n, args.degree, rng, args.directed)
    names = args.algorithms or ["bfs", "wcc"]
    rows = []
    with tempfile.TemporaryDirectory() as tmp:
        gpath, ipath = Path(tmp) / "bench.fgg", Path(tmp) / "bench.fgi"
        conv = convert_edges(src, dst, gpath, ipath, directed=args.directed, num_vertices=args.n)
        graph = open_graph(gpath, ipath)
        for name in names:
            for page_size in args.page_sizes:
                for pages in args.cache_sizes:
                    for merging in args.merging_modes:
                        ns = argparse.Namespace(**vars(args))
                        ns.page_size, ns.cache_pages, ns.merging = page_size, pages, merging
                        cfg = engine_config(ns, graph.file.size)
                        t0 = time.perf_counter()
                        res = algos.run_named(name, graph, cfg, source=args.source,
                                              damping=args.d, iters=args.iters,
                                              threshold=args.threshold)
                        wall = (time.perf_counter() - t0) * 1e3
                        io = res.io
                        rows.append([name, args.kind, conv.num_vertices, conv.num_edges,
                                     page_size, cfg.cache.capacity_pages,
                                     "on" if merging else "off", args.threads,
                                     args.vertical_parts, len(res.iterations), io.bytes_read,
                                     io.requests_issued_to_file, io.cache_hits, io.cache_misses,
                                     round(wall, 3)])
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        out = csv.writer(fh)
        out.writerow(BENCH_COLUMNS)
        out.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def cmd_stats(args) -> int:
    graph = open_graph(args.graph, _index_path(args))
    h = graph.file.header
    idx = graph.index
    print(f"vertices {h.num_vertices}")
    print(f"edges {h.num_edges}")
    print(f"directed {int(h.directed)}")
    print(f"attr_bytes {h.attr_bytes}")
    print(f"file_bytes {graph.file.size}")
    for name, (lo, hi) in graph.file.region_bounds().items():
        print(f"{name}_region {lo} {hi}")
    print(f"index_bytes {idx.nbytes}")
    print(f"index_bytes_per_vertex {idx.nbytes / max(1, h.num_vertices):.3f}")
    print(f"overflow_vertices {idx.overflow_count}")
    print(f"anchor_stride {idx.anchor_stride}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semigraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="text edge list -> .fgg + .fgi")
    p.add_argument("input")
    p.add_argument("out_graph")
    p.add_argument("out_index")
    d = p.add_mutually_exclusive_group()
    d.add_argument("--directed", dest="directed", action="store_true", default=True)
    d.add_argument("--undirected", dest="directed", action="store_false")
    p.add_argument("--attr-bytes", type=int, default=0)
    p.add_argument("--num-vertices", type=int, default=None)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("run", help="run one algorithm")
    p.add_argument("algorithm", choices=algos.ALGORITHMS)
    p.add_argument("--graph", required=True)
    p.add_argument("--index")
    _add_engine_flags(p)
    _add_algo_flags(p)
    p.add_argument("--out", help="result CSV (default <algorithm>.csv)")
    p.add_argument("--stats", help="per-iteration stats CSV (default <algorithm>_stats.csv)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="compare engine results with in-memory oracles")
    p.add_argument("input", help="text edge list")
    p.add_argument("algorithms", nargs="*", metavar="algorithm")
    d = p.add_mutually_exclusive_group()
    d.add_argument("--directed", dest="directed", action="store_true", default=True)
    d.add_argument("--undirected", dest="directed", action="store_false")
    p.add_argument("--graph", help="existing .fgg to check instead of converting the input")
    p.add_argument("--index")
    _add_engine_flags(p)
    _add_algo_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="sweep knobs over a synthetic graph (SEMIGRAPH_SEED)")
    p.add_argument("--kind", choices=("er", "pl"), default="er")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--degree", type=float, default=10.0)
    p.add_argument("--undirected", dest="directed", action="store_false", default=True)
    p.add_argument("--algorithms", nargs="+", choices=algos.ALGORITHMS)
    p.add_argument("--page-sizes", type=int, nargs="+", default=[DEFAULT_PAGE_SIZE])
    p.add_argument("--cache-sizes", type=_cache_pages, nargs="+", default=[1024])
    p.add_argument("--merging-modes", type=_on_off, nargs="+", default=[True])
    _add_engine_flags(p)
    _add_algo_flags(p)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="describe a converted graph")
    p.add_argument("graph")
    p.add_argument("--index")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"semigraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, SemigraphError) as exc:
        print(f"semigraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
