"""Iterative vertex-centric execution over a semi-external graph.

Vertex state lives in memory (numpy arrays owned by the program); edge lists
are pulled through :class:`~semigraph.pagecache.PageCache` only when a vertex
asks for them.  Execution is bulk synchronous::

    compute (run / run_on_vertex, messages buffered) -> barrier
    -> message delivery (run_on_message) -> iteration-end hooks -> barrier

Every iteration the active vertices are split across workers with the range
partitioning function ``(v >> range_shift) % num_threads``.  Each worker
takes up to ``max_running_per_thread`` vertices at a time into its running
window, gathers all of their edge-list requests, and hands them to the page
cache as one sorted batch so adjacent lists merge into large reads.  A worker
whose queue runs dry steals pending vertices from the tail of the busiest
queue.

With ``parallel=False`` (the default) workers are interleaved round-robin on
the calling thread, one window at a time, which makes every run - stealing
included - fully deterministic.  ``parallel=True`` runs one OS thread per
worker.
"""
from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from .errors import ContractViolation, EngineError, SemigraphError
from .pagecache import CacheConfig, IoRequest, IoStats, PageCache
from .store import LIST_HEADER, LIST_HEADER_SIZE, Graph, Side

ASCENDING = "ascending"
DESCENDING = "descending"
ALTERNATE = "alternate"


@dataclass
class EngineConfig:
    num_threads: int = 1
    range_shift: int = 14
    max_running_per_thread: int = 4000
    cache: CacheConfig = field(default_factory=CacheConfig)
    merging: bool = True
    scheduler: Callable | None = None
    vertical_parts: int = 1
    flush_threshold: int = 4096
    steal_batch: int = 64
    work_stealing: bool = True
    parallel: bool = False
    trace: bool = False
    record_io_trace: bool = False

    def __post_init__(self):
        if self.num_threads < 1:
            raise ValueError("num_threads must be >= 1")
        if self.range_shift < 0:
            raise ValueError("range_shift must be >= 0")
        if self.max_running_per_thread < 1:
            raise ValueError("max_running_per_thread must be >= 1")
        if self.vertical_parts < 1:
            raise ValueError("vertical_parts must be >= 1")
        if self.flush_threshold < 1 or self.steal_batch < 1:
            raise ValueError("flush_threshold and steal_batch must be >= 1")


# ---------------------------------------------------------------------------
# partitioning and scheduling helpers


def partition_of(v, range_shift: int, num_parts: int):
    """Worker that owns vertex ``v`` (scalar or array)."""
    return (v >> range_shift) % num_parts


class RangePartitioner:
    """Range partitioning plus its exact inverse.

    A vertex's *local index* is its position inside its owner's concatenated
    ranges; :meth:`to_global` recovers the vertex id from ``(partition, local)``
    without any search.
    """

    def __init__(self, range_shift: int, num_parts: int):
        self.range_shift = range_shift
        self.num_parts = num_parts
        self._mask = (1 << range_shift) - 1

    def partition(self, v):
        return (v >> self.range_shift) % self.num_parts

    def to_local(self, v: int) -> tuple[int, int]:
        range_id = v >> self.range_shift
        local_range = range_id // self.num_parts
        return range_id % self.num_parts, (local_range << self.range_shift) | (v & self._mask)

    def to_global(self, part: int, local: int) -> int:
        range_id = (local >> self.range_shift) * self.num_parts + part
        return (range_id << self.range_shift) | (local & self._mask)


def scan_order(vertices, iteration: int, direction: str = ALTERNATE) -> np.ndarray:
    order = np.sort(np.asarray(vertices, dtype=np.int64))
    if direction == DESCENDING or (direction == ALTERNATE and iteration % 2 == 1):
        order = order[::-1]
    return order


def schedule_iteration(vertices, iteration: int, window: int,
                       direction: str = ALTERNATE) -> list[np.ndarray]:
    """Split one partition's actives into running batches of at most ``window``."""
    order = scan_order(vertices, iteration, direction)
    return [order[i:i + window] for i in range(0, order.size, window)]


def part_window(num_vertices: int, parts: int, j: int) -> tuple[int, int]:
    """Neighbor-id window ``[n*j/P, n*(j+1)/P)`` served by vertical part ``j``."""
    return num_vertices * j // parts, num_vertices * (j + 1) // parts


# ---------------------------------------------------------------------------
# program contract


class EdgeListView:
    """Read-only view of one edge list, backed by cached page memory."""

    __slots__ = ("vertex", "side", "degree", "_buf", "_attr_bytes")

    def __init__(self, vertex: int, side: int, buf: memoryview, attr_bytes: int = 0):
        owner, deg = LIST_HEADER.unpack_from(buf)
        if owner != vertex or len(buf) != LIST_HEADER_SIZE + deg * (4 + attr_bytes):
            from .errors import FormatError
            raise FormatError(
                f"offset mismatch: requested list of vertex {vertex} ({len(buf)} bytes), "
                f"found owner {owner} with degree {deg}")
        self.vertex = vertex
        self.side = side
        self.degree = deg
        self._buf = buf
        self._attr_bytes = attr_bytes

    @property
    def neighbors(self) -> np.ndarray:
        return np.frombuffer(self._buf, dtype="<u4", count=self.degree, offset=LIST_HEADER_SIZE)

    def read_edges(self) -> np.ndarray:
        return self.neighbors

    @property
    def attrs(self) -> np.ndarray:
        ab = self._attr_bytes
        raw = np.frombuffer(self._buf, dtype=np.uint8, count=self.degree * ab,
                            offset=LIST_HEADER_SIZE + 4 * self.degree)
        return raw.reshape(self.degree, ab)


class VertexProgram:
    """Base class for algorithms.

    Subclasses keep per-vertex state in arrays allocated by :meth:`setup` and
    implement the hooks below.  ``run`` sees only the vertex's own state and
    must call :meth:`Context.request_edges` to get at any edge list.
    ``run_batch`` and ``run_on_messages`` exist so programs can vectorize;
    their defaults simply loop over ``run`` / ``run_on_message``.
    """

    #: numpy dtype of message payloads; ``None`` means payload-free messages
    message_dtype = None
    #: ALTERNATE, ASCENDING or DESCENDING scan of each worker's queue
    scan_direction = ALTERNATE
    #: set when ``run`` understands ``ctx.part`` under vertical partitioning
    vertical = False
    #: optional cap on the running window, below ``max_running_per_thread``
    max_running = None

    def setup(self, engine: "Engine") -> None:
        pass

    def initial_vertices(self, engine: "Engine"):
        return None

    def schedule(self, vertices: np.ndarray, iteration: int):
        """Custom execution order for one worker's actives, or ``None``."""
        return None

    def run(self, ctx: "Context") -> None:
        raise NotImplementedError

    def run_batch(self, ctx: "Context", vertices: np.ndarray) -> None:
        run = self.run
        for v in vertices.tolist():
            ctx.vertex = v
            run(ctx)

    def run_on_vertex(self, ctx: "Context", view: EdgeListView) -> None:
        pass

    def run_on_message(self, ctx: "Context", payload) -> None:
        pass

    def run_on_messages(self, ctx: "Context", dests: np.ndarray, payloads) -> None:
        handler = self.run_on_message
        if payloads is None:
            for v in dests.tolist():
                ctx.vertex = v
                handler(ctx, None)
        else:
            for v, p in zip(dests.tolist(), payloads.tolist()):
                ctx.vertex = v
                handler(ctx, p)

    def run_on_iteration_end(self, ctx: "Context") -> None:
        pass


class MaxReducer:
    """Monotonic global maximum with smallest-id tie-break."""

    def __init__(self):
        self.value = -1
        self.vertex = -1
        self._lock = threading.Lock()

    def update(self, value: int, vertex: int) -> bool:
        with self._lock:
            if value > self.value or (value == self.value and 0 <= vertex < self.vertex):
                self.value, self.vertex = value, vertex
                return True
            return False

    def beats(self, bound: int, vertex: int) -> bool:
        """True when a vertex whose value is at most ``bound`` cannot win."""
        v, who = self.value, self.vertex
        return bound < v or (bound == v and vertex > who)


class Context:
    """Per-worker handle passed to every hook; ``vertex`` is the current vertex."""

    __slots__ = ("engine", "worker", "vertex", "part", "window", "_n", "_r", "_t", "_codec")

    def __init__(self, engine: "Engine", worker: "_Worker"):
        self.engine = engine
        self.worker = worker
        self.vertex = -1
        self.part = 0
        self.window = (0, engine.num_vertices)
        self._n = engine.num_vertices
        self._r = engine.config.range_shift
        self._t = engine.config.num_threads
        self._codec = engine._coerce_payload

    @property
    def iteration(self) -> int:
        return self.engine.iteration

    @property
    def num_vertices(self) -> int:
        return self._n

    @property
    def directed(self) -> bool:
        return self.engine.graph.directed

    @property
    def edge_sides(self) -> tuple:
        """Sides to fetch for the undirected projection of a vertex."""
        return (Side.IN, Side.OUT) if self.engine.graph.directed else (Side.OUT,)

    @property
    def part_window(self) -> tuple[int, int]:
        return self.window

    @property
    def local(self) -> dict:
        """Scratch state of the running vertex part, dropped when it leaves the window."""
        loc = self.worker.locals.get(self.vertex)
        if loc is None:
            loc = self.worker.locals[self.vertex] = {}
        return loc

    def degree(self, v: int, side: Side = Side.OUT) -> int:
        return self.engine.index.degree(v, side)

    def degrees(self, ids, side: Side = Side.OUT) -> np.ndarray:
        return self.engine.index.degrees(ids, side)

    def reducer(self, name: str = "max") -> MaxReducer:
        return self.engine.reducer(name)

    # -- edge requests ---------------------------------------------------

    def request_edges(self, ids, side: Side = Side.OUT) -> None:
        """Ask for the edge lists of ``ids``; each arrives via ``run_on_vertex``."""
        eng = self.engine
        v = self.vertex
        if isinstance(ids, (int, np.integer)):
            ids = int(ids)
            if not 0 <= ids < self._n:
                raise ContractViolation(f"edge list request for invalid vertex {ids}")
            if eng._parts > 1 and ids != v:
                lo, hi = self.window
                if not lo <= ids < hi:
                    raise ContractViolation(
                        f"part {self.part} of vertex {v} requested vertex {ids} outside [{lo}, {hi})")
            self.worker.pending_scalar[int(side)].append((v, ids))
            return
        ids = np.asarray(ids)
        if ids.size == 0:
            return
        if ids.dtype.kind not in "iu":
            raise ContractViolation("vertex ids must be integers")
        ids = ids.astype(np.int64).ravel()
        if ids.min() < 0 or ids.max() >= self._n:
            raise ContractViolation("edge list request for invalid vertex")
        if eng._parts > 1:
            lo, hi = self.window
            bad = ((ids < lo) | (ids >= hi)) & (ids != v)
            if bad.any():
                raise ContractViolation(
                    f"part {self.part} of vertex {v} requested vertex {int(ids[bad][0])} "
                    f"outside [{lo}, {hi})")
        self.worker.pending_arrays[int(side)].append((np.full(ids.size, v, np.int64), ids))

    def request_own_edges(self, vertices, side: Side = Side.OUT) -> None:
        """Batch form for ``run_batch``: each vertex requests its own list."""
        ids = np.asarray(vertices, dtype=np.int64).ravel()
        if ids.size:
            self.worker.pending_arrays[int(side)].append((ids, ids))

    # -- activation and messages ----------------------------------------

    def activate(self, ids) -> None:
        """Schedule ``ids`` for the next iteration (idempotent)."""
        w = self.worker
        if isinstance(ids, (int, np.integer)):
            w.act_scalars.append(int(ids))
        else:
            ids = np.asarray(ids)
            if ids.size:
                w.activations.append(ids)

    def send(self, dest: int, payload=None) -> None:
        dest = int(dest)
        if not 0 <= dest < self._n:
            raise ContractViolation(f"message to invalid vertex {dest}")
        p = (dest >> self._r) % self._t
        w = self.worker
        w.p2p_dests[p].append(dest)
        w.p2p_payloads[p].append(self._codec(payload))
        w.msgs_sent += 1
        w.buffered[p] += 1
        if w.buffered[p] >= w.flush_threshold:
            w.flush(p)

    def multicast(self, dests, payload=None) -> None:
        """Send one payload to many vertices; one copy is buffered per destination worker."""
        if type(dests) is not np.ndarray:
            dests = np.asarray(dests)
        n = dests.size
        if n == 0:
            return
        if dests.dtype.kind not in "iu":
            raise ContractViolation("multicast destinations must be integer ids")
        pl = self._codec(payload)
        w = self.worker
        w.msgs_sent += n
        if self._t == 1:
            w.multicast_chunks[0].append((dests, pl))
            w.payload_copies += 1
            w.buffered[0] += n
            if w.buffered[0] >= w.flush_threshold:
                w.flush(0)
            return
        owners = (dests.astype(np.int64) >> self._r) % self._t
        first = int(owners[0])
        if (owners == first).all():
            groups = [(first, dests)]
        else:
            groups = [(int(p), dests[owners == p]) for p in np.unique(owners)]
        for p, chunk in groups:
            w.multicast_chunks[p].append((chunk, pl))
            w.payload_copies += 1
            w.buffered[p] += chunk.size
            if w.buffered[p] >= w.flush_threshold:
                w.flush(p)

    def notify_iteration_end(self) -> None:
        self.worker.iter_end.append(self.vertex)


# ---------------------------------------------------------------------------
# workers


class _WorkQueue:
    """Owner takes from the head, thieves take from the tail.

    The queue is a run of segments, one per vertical part; a batch never
    crosses a segment boundary. ``cost`` holds the running sum of per-vertex
    work estimates so the pending load of a queue is one subtraction.
    """

    __slots__ = ("items", "bounds", "parts", "cost", "head", "tail", "lock")

    def __init__(self):
        self.items = np.zeros(0, dtype=np.int64)
        self.bounds = np.zeros(1, dtype=np.int64)
        self.parts = [0]
        self.cost = np.zeros(1, dtype=np.int64)
        self.head = 0
        self.tail = 0
        self.lock = threading.Lock()

    def reset(self, segments: list, weights: np.ndarray | None = None) -> None:
        """``segments`` is a list of (part, vertex array) in execution order."""
        segments = [(j, a) for j, a in segments if a.size]
        items = (np.concatenate([a for _, a in segments]) if segments
                 else np.zeros(0, dtype=np.int64))
        sizes = [a.size for _, a in segments]
        cost = np.zeros(items.size + 1, dtype=np.int64)
        np.cumsum(np.ones(items.size, np.int64) if weights is None else weights[items],
                  out=cost[1:])
        with self.lock:
            self.items = items
            self.bounds = np.cumsum([0] + sizes)
            self.parts = [j for j, _ in segments] or [0]
            self.cost = cost
            self.head = 0
            self.tail = items.size

    @property
    def remaining(self) -> int:
        return self.tail - self.head

    @property
    def pending_work(self) -> int:
        return int(self.cost[self.tail] - self.cost[self.head])

    def _segment(self, pos: int) -> int:
        return int(np.searchsorted(self.bounds, pos, "right")) - 1

    def take(self, k: int):
        with self.lock:
            if self.head >= self.tail:
                return None
            seg = self._segment(self.head)
            end = min(self.head + k, self.tail, int(self.bounds[seg + 1]))
            batch = self.items[self.head:end]
            self.head = end
            return self.parts[seg], batch

    def steal(self, k: int):
        with self.lock:
            if self.head >= self.tail:
                return None
            seg = self._segment(self.tail - 1)
            lo = max(self.head, self.tail - k, int(self.bounds[seg]))
            batch = self.items[lo:self.tail]
            self.tail = lo
            return self.parts[seg], batch


class _Worker:
    def __init__(self, engine: "Engine", wid: int):
        t = engine.config.num_threads
        self.id = wid
        self.engine = engine
        self.queue = _WorkQueue()
        self.flush_threshold = engine.config.flush_threshold
        self.pending_scalar = ([], [])
        self.pending_arrays = ([], [])
        self.p2p_dests = [[] for _ in range(t)]
        self.p2p_payloads = [[] for _ in range(t)]
        self.multicast_chunks = [[] for _ in range(t)]
        self.buffered = [0] * t
        self.activations: list = []
        self.act_scalars: list = []
        self.iter_end: list = []
        self.locals: dict = {}
        self.runs = 0
        self.vertex_calls = 0
        self.msgs_sent = 0
        self.payload_copies = 0
        self.steals = 0
        self.stolen = 0
        self.max_running = 0
        self.flushes = 0
        self.clock = 0
        self.ctx = Context(engine, self)
        self._program = None
        self._attr_bytes = engine.graph.attr_bytes

    def complete(self, req: IoRequest, buf: memoryview) -> None:
        ctx = self.ctx
        ctx.vertex = req.requester
        self.vertex_calls += 1
        self._program.run_on_vertex(ctx, EdgeListView(req.vertex, req.side, buf, self._attr_bytes))

    def flush(self, p: int) -> None:
        """Hand buffered messages for worker ``p`` over to its inbox."""
        chunks = self._take_chunks(p)
        if chunks:
            self.engine._post(p, chunks)
            self.flushes += 1

    def _take_chunks(self, p: int) -> list:
        chunks = self.multicast_chunks[p]
        self.multicast_chunks[p] = []
        if self.p2p_dests[p]:
            chunks.append((np.array(self.p2p_dests[p], dtype=np.int64), self.p2p_payloads[p]))
            self.p2p_dests[p] = []
            self.p2p_payloads[p] = []
        self.buffered[p] = 0
        return chunks


# ---------------------------------------------------------------------------
# results


@dataclass
class IterationStats:
    iteration: int
    active_count: int
    msgs: int
    bytes_read: int
    issued_requests: int
    steals: int
    wall_ms: float
    cache_hits: int = 0
    cache_misses: int = 0
    edge_requests: int = 0
    run_calls: int = 0
    max_running: int = 0
    payload_copies: int = 0

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> list:
        return [getattr(self, c) for c in self.columns()]


@dataclass
class RunResult:
    program: VertexProgram
    iterations: list
    io: IoStats
    trace: list | None = None
    worker_runs: list = field(default_factory=list)
    vertex_calls: int = 0

    @property
    def num_iterations(self) -> int:
        return len(self.iterations)


# ---------------------------------------------------------------------------
# engine


class Engine:
    """Runs vertex programs over one graph with one page cache."""

    def __init__(self, graph: Graph, config: EngineConfig | None = None):
        self.graph = graph
        self.index = graph.index
        self.config = config or EngineConfig()
        self.num_vertices = graph.num_vertices
        self.cache = PageCache(graph.file.path, self.config.cache, merging=self.config.merging,
                               regions=graph.file.region_bounds(),
                               record_trace=self.config.record_io_trace)
        self.partitioner = RangePartitioner(self.config.range_shift, self.config.num_threads)
        self.iteration = 0
        self._parts = 1
        self._reducers: dict[str, MaxReducer] = {}
        self._reducer_lock = threading.Lock()
        self._inbox_lock = threading.Lock()
        self._inbox: list[list] = [[] for _ in range(self.config.num_threads)]
        self._program: VertexProgram | None = None
        self._dtype = None
        self._trace = None
        self._pool = None
        self._weights = None

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None
        self.cache.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def reducer(self, name: str = "max") -> MaxReducer:
        with self._reducer_lock:
            red = self._reducers.get(name)
            if red is None:
                red = self._reducers[name] = MaxReducer()
            return red

    def _coerce_payload(self, payload):
        dtype = self._dtype
        if dtype is None:
            if payload is not None:
                raise ContractViolation("this program declares payload-free messages")
            return None
        if isinstance(payload, (bytes, bytearray, memoryview)):
            if len(payload) > dtype.itemsize:
                raise ContractViolation(
                    f"payload of {len(payload)} bytes exceeds the declared {dtype.itemsize}")
            return np.frombuffer(bytes(payload).ljust(dtype.itemsize, b"\x00"), dtype=dtype)[0]
        if isinstance(payload, np.ndarray) and payload.size != 1:
            raise ContractViolation("message payload must be a single fixed-size value")
        if payload is None:
            raise ContractViolation("message payload missing")
        return payload

    def _post(self, p: int, chunks: list) -> None:
        with self._inbox_lock:
            self._inbox[p].extend(chunks)

    # -- main loop ---------------------------------------------------------

    def run(self, program: VertexProgram, initial_active=None,
            max_iterations: int | None = None) -> RunResult:
        cfg = self.config
        if cfg.vertical_parts > 1 and not program.vertical:
            raise ContractViolation(
                f"{type(program).__name__} has no per-part logic; vertical_parts must be 1")
        self._program = program
        self._dtype = None if program.message_dtype is None else np.dtype(program.message_dtype)
        self._parts = cfg.vertical_parts
        self._reducers.clear()
        self._workers = [_Worker(self, i) for i in range(cfg.num_threads)]
        for w in self._workers:
            w._program = program
        self._trace = [] if cfg.trace else None
        if cfg.parallel and cfg.num_threads > 1 and self._pool is None:
            self._pool = ThreadPoolExecutor(cfg.num_threads, thread_name_prefix="worker")
        program.setup(self)
        if initial_active is None:
            initial_active = program.initial_vertices(self)
        if initial_active is None:
            raise ContractViolation("no initial active vertices given")
        active = self._unique_ids(initial_active)
        io_start = self.cache.stats.copy()
        stats = []
        self.iteration = 0
        while active.size:
            if max_iterations is not None and self.iteration >= max_iterations:
                break
            it_stats = self._iterate(active)
            stats.append(it_stats)
            active = self._gather_activations()
            self.iteration += 1
        return RunResult(program, stats, self.cache.stats.copy() - io_start, self._trace,
                         [w.runs for w in self._workers],
                         sum(w.vertex_calls for w in self._workers))

    def _unique_ids(self, ids) -> np.ndarray:
        arr = np.unique(np.asarray(ids, dtype=np.int64).ravel())
        if arr.size and (arr[0] < 0 or arr[-1] >= self.num_vertices):
            raise ContractViolation("activation of an invalid vertex id")
        return arr

    def _gather_activations(self) -> np.ndarray:
        parts = []
        for w in self._workers:
            if w.act_scalars:
                parts.append(np.array(w.act_scalars, dtype=np.int64))
                w.act_scalars = []
            parts.extend(a.astype(np.int64, copy=False).ravel() for a in w.activations)
            w.activations = []
        if not parts:
            return np.zeros(0, dtype=np.int64)
        return self._unique_ids(np.concatenate(parts))

    def _counters(self):
        ws = self._workers
        return (sum(w.runs for w in ws), sum(w.steals for w in ws),
                sum(w.payload_copies for w in ws))

    def _iterate(self, active: np.ndarray) -> IterationStats:
        t0 = time.perf_counter()
        io0 = self.cache.stats.copy()
        runs0, steals0, copies0 = self._counters()
        cfg = self.config
        T = cfg.num_threads
        owners = None if T == 1 else (active >> cfg.range_shift) % T
        try:
            # per-thread scheduler: each worker runs its parts of window 0, then
            # window 1, ...; idle workers may steal parts of any window
            queues = []
            for p in range(T):
                mine = active if owners is None else active[owners == p]
                queues.append([(j, self._order(mine, j)) for j in range(self._parts)])
            self._compute(queues)
            msgs = self._deliver_all()
            msgs += self._iteration_end()
        except SemigraphError as exc:
            if getattr(exc, "iteration", None) is None:
                exc.iteration = self.iteration
            raise
        except Exception as exc:
            raise EngineError(f"vertex program failed in iteration {self.iteration}: {exc!r}",
                              self.iteration) from exc
        io = self.cache.stats.copy() - io0
        runs1, steals1, copies1 = self._counters()
        return IterationStats(
            iteration=self.iteration, active_count=int(active.size), msgs=msgs,
            bytes_read=io.bytes_read, issued_requests=io.requests_issued_to_file,
            steals=steals1 - steals0, wall_ms=(time.perf_counter() - t0) * 1e3,
            cache_hits=io.cache_hits, cache_misses=io.cache_misses,
            edge_requests=io.requests_submitted, run_calls=runs1 - runs0,
            max_running=max(w.max_running for w in self._workers),
            payload_copies=copies1 - copies0)

    def _order(self, vertices: np.ndarray, phase: int) -> np.ndarray:
        custom = self.config.scheduler or self._program.schedule
        order = custom(vertices, self.iteration)
        if order is not None:
            return np.asarray(order, dtype=np.int64)
        direction = self._program.scan_direction
        # phases of one iteration continue the alternation
        return scan_order(vertices, self.iteration + phase, direction)

    # -- compute phase -----------------------------------------------------

    def _compute(self, queues: list) -> None:
        weights = self._work_weights() if len(self._workers) > 1 else None
        for w, segments in zip(self._workers, queues):
            w.queue.reset(segments, weights)
            w.clock = 0
        if self._pool is not None:
            futures = [self._pool.submit(self._worker_loop, w) for w in self._workers]
            for f in futures:
                f.result()
            return
        # Simulated threads: always advance the worker that has done the least
        # work so far, so a worker stuck on a heavy vertex falls behind and
        # the others go idle and steal, as they would with real threads.
        window = self._window_size()
        stealing = self.config.work_stealing and len(self._workers) > 1
        live = list(self._workers)
        while live:
            w = min(live, key=lambda x: (x.clock, x.id))
            batch = w.queue.take(window)
            if batch is None and stealing and self._steal(w):
                batch = w.queue.take(window)
            if batch is None:
                live.remove(w)
                continue
            before = w.runs + w.vertex_calls
            self._process_window(w, *batch)
            w.clock += w.runs + w.vertex_calls - before

    def _work_weights(self) -> np.ndarray:
        """Per-vertex work estimate for victim selection: 1 + degree."""
        if self._weights is None:
            ids = np.arange(self.num_vertices)
            w = 1 + self.index.degrees(ids, Side.OUT)
            if self.graph.directed:
                w += self.index.degrees(ids, Side.IN)
            self._weights = w
        return self._weights

    def _worker_loop(self, w: _Worker) -> None:
        window = self._window_size()
        stealing = self.config.work_stealing
        while True:
            batch = w.queue.take(window)
            if batch is None:
                if stealing and self._steal(w):
                    continue
                return
            self._process_window(w, *batch)

    def _window_size(self) -> int:
        cap = self._program.max_running
        window = self.config.max_running_per_thread
        return window if cap is None else max(1, min(window, cap))

    def _steal(self, thief: _Worker) -> bool:
        while True:
            # the victim is the queue with the most pending edge work
            victim = None
            best = 0
            for w in self._workers:
                if w is not thief and w.queue.remaining and w.queue.pending_work > best:
                    victim, best = w, w.queue.pending_work
            if victim is None:
                return False
            got = victim.queue.steal(self.config.steal_batch)
            if got is not None:
                thief.queue.reset([got])
                thief.steals += 1
                thief.stolen += got[1].size
                return True

    def _process_window(self, w: _Worker, part: int, batch: np.ndarray) -> None:
        ctx = w.ctx
        ctx.part = part
        ctx.window = part_window(self.num_vertices, self._parts, part)
        if batch.size > w.max_running:
            w.max_running = batch.size
        if self._trace is not None:
            self._trace.append((self.iteration, part, w.id, batch.copy()))
        self._program.run_batch(ctx, batch)
        w.runs += batch.size
        while True:
            reqs = self._build_requests(w)
            if not reqs:
                break
            self.cache.submit_batch(reqs, sorted_hint=True).result()
        w.locals.clear()

    def _build_requests(self, w: _Worker) -> list:
        ids_parts, req_parts, side_parts = [], [], []
        for side in (0, 1):
            scal = w.pending_scalar[side]
            arrs = w.pending_arrays[side]
            if not scal and not arrs:
                continue
            chunks_req = [a[0] for a in arrs]
            chunks_ids = [a[1] for a in arrs]
            if scal:
                sa = np.array(scal, dtype=np.int64)
                chunks_req.append(sa[:, 0])
                chunks_ids.append(sa[:, 1])
            w.pending_scalar[side].clear()
            w.pending_arrays[side].clear()
            ids = np.concatenate(chunks_ids) if len(chunks_ids) > 1 else chunks_ids[0]
            ids_parts.append(ids)
            req_parts.append(np.concatenate(chunks_req) if len(chunks_req) > 1 else chunks_req[0])
            side_parts.append(np.full(ids.size, side, dtype=np.int64))
        if not ids_parts:
            return []
        offs, lens = [], []
        for ids, sides in zip(ids_parts, side_parts):
            o, l = self.index.offsets(ids, Side(int(sides[0])))
            offs.append(o)
            lens.append(l)
        ids = np.concatenate(ids_parts)
        reqr = np.concatenate(req_parts)
        sides = np.concatenate(side_parts)
        offs = np.concatenate(offs)
        lens = np.concatenate(lens)
        if offs.size > 1 and np.any(offs[1:] < offs[:-1]):
            order = np.argsort(offs, kind="stable")
            ids, reqr, sides, offs, lens = ids[order], reqr[order], sides[order], offs[order], lens[order]
        task = w.complete
        return [IoRequest(v, s, o, n, task, q) for v, s, o, n, q in
                zip(ids.tolist(), sides.tolist(), offs.tolist(), lens.tolist(), reqr.tolist())]

    # -- delivery ----------------------------------------------------------

    def _collect(self) -> list:
        boxes = []
        with self._inbox_lock:
            inbox = self._inbox
            self._inbox = [[] for _ in inbox]
        for p in range(self.config.num_threads):
            chunks = inbox[p]
            for w in self._workers:
                chunks.extend(w._take_chunks(p))
            boxes.append(chunks)
        return boxes

    def _deliver_all(self) -> int:
        total = 0
        while True:
            boxes = self._collect()
            if not any(boxes):
                return total
            if self._pool is not None:
                futures = [self._pool.submit(self._deliver, self._workers[p], chunks)
                           for p, chunks in enumerate(boxes) if chunks]
                total += sum(f.result() for f in futures)
            else:
                total += sum(self._deliver(self._workers[p], chunks)
                             for p, chunks in enumerate(boxes) if chunks)

    def _deliver(self, w: _Worker, chunks: list) -> int:
        multi = [c for c in chunks if not isinstance(c[1], list)]
        p2p = [c for c in chunks if isinstance(c[1], list)]
        ordered = multi + p2p
        dests = np.concatenate([c[0] for c in ordered]).astype(np.int64, copy=False)
        if dests.size and (dests.min() < 0 or dests.max() >= self.num_vertices):
            raise ContractViolation("message sent to an invalid vertex id")
        payloads = None
        if self._dtype is not None:
            pieces = []
            if multi:
                vals = np.array([c[1] for c in multi], dtype=self._dtype)
                counts = np.fromiter((c[0].size for c in multi), dtype=np.int64, count=len(multi))
                pieces.append(np.repeat(vals, counts))
            pieces.extend(np.array(c[1], dtype=self._dtype) for c in p2p)
            payloads = np.concatenate(pieces) if len(pieces) > 1 else pieces[0]
        ctx = w.ctx
        ctx.part = 0
        ctx.window = (0, self.num_vertices)
        self._program.run_on_messages(ctx, dests, payloads)
        return int(dests.size)

    def _iteration_end(self) -> int:
        called = False
        for w in self._workers:
            if not w.iter_end:
                continue
            ctx = w.ctx
            todo = sorted(set(w.iter_end))
            w.iter_end = []
            for v in todo:
                ctx.vertex = v
                self._program.run_on_iteration_end(ctx)
            called = True
        return self._deliver_all() if called else 0


def run_algorithm(graph: Graph, program: VertexProgram, config: EngineConfig | None = None,
                  initial_active=None, max_iterations: int | None = None) -> RunResult:
    with Engine(graph, config) as engine:
        return engine.run(program, initial_active, max_iterations)
