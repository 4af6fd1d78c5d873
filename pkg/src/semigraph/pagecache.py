"""User-space page cache over the graph file.

Reads are page-aligned and whole-page sized.  Callers submit batches of
:class:`IoRequest` objects; each request carries a task that is invoked once
with a read-only ``memoryview`` of exactly the bytes it asked for, taken
straight from the cached pages.  Requests that touch the same or adjacent
pages are coalesced into one :class:`MergedRequest` before any I/O is issued.

The cache is set-associative: page ``p`` can only live in slot
``p % num_slots`` and eviction is LRU within that slot.
"""
from __future__ import annotations

import os
import threading
from collections import OrderedDict
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from .errors import ContractViolation, PageCacheError

MIN_PAGE_SIZE = 512
MAX_PAGE_SIZE = 1 << 20
DEFAULT_PAGE_SIZE = 4096
DEFAULT_ASSOCIATIVITY = 8
DEFAULT_MAX_MERGE_BYTES = 4 << 20


@dataclass
class CacheConfig:
    capacity_pages: int = 1024
    associativity: int = DEFAULT_ASSOCIATIVITY
    page_size: int = DEFAULT_PAGE_SIZE
    max_merge_bytes: int = DEFAULT_MAX_MERGE_BYTES

    def __post_init__(self):
        ps = self.page_size
        if ps < MIN_PAGE_SIZE or ps > MAX_PAGE_SIZE or ps & (ps - 1):
            raise ValueError(f"page_size must be a power of two in [512, 1 MiB], got {ps}")
        if not self.capacity_pages >= self.associativity >= 1:
            raise ValueError("need capacity_pages >= associativity >= 1")

    @property
    def num_slots(self) -> int:
        return -(-self.capacity_pages // self.associativity)

    @classmethod
    def for_bytes(cls, nbytes: int, page_size: int = DEFAULT_PAGE_SIZE,
                  associativity: int = DEFAULT_ASSOCIATIVITY) -> "CacheConfig":
        """Config large enough to hold ``nbytes`` without any eviction."""
        pages = max(1, -(-nbytes // page_size))
        assoc = min(associativity, pages)
        return cls(pages, assoc, page_size)


@dataclass(slots=True)
class IoRequest:
    vertex: int
    side: int
    offset: int
    length: int
    task: Callable | None = None
    requester: int = -1
    on_error: Callable | None = None

    @property
    def end(self) -> int:
        return self.offset + self.length


@dataclass
class MergedRequest:
    first_page: int
    page_count: int
    members: list = field(default_factory=list)

    @property
    def last_page(self) -> int:
        return self.first_page + self.page_count - 1


@dataclass
class Page:
    page_no: int
    data: object = None
    error: BaseException | None = None

    @property
    def state(self) -> str:
        return "empty" if self.data is None else "filled"


@dataclass
class IoStats:
    requests_submitted: int = 0
    requests_issued_to_file: int = 0
    pages_read: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    bytes_read: int = 0
    bytes_delivered: int = 0
    region_bytes: dict = field(default_factory=dict)

    FIELDS = ("requests_submitted", "requests_issued_to_file", "pages_read",
              "cache_hits", "cache_misses", "bytes_read", "bytes_delivered")

    def copy(self) -> "IoStats":
        return IoStats(**{k: getattr(self, k) for k in self.FIELDS},
                       region_bytes=dict(self.region_bytes))

    def __sub__(self, other: "IoStats") -> "IoStats":
        regions = {k: v - other.region_bytes.get(k, 0) for k, v in self.region_bytes.items()}
        return IoStats(**{k: getattr(self, k) - getattr(other, k) for k in self.FIELDS},
                       region_bytes=regions)

    def __add__(self, other: "IoStats") -> "IoStats":
        regions = dict(self.region_bytes)
        for k, v in other.region_bytes.items():
            regions[k] = regions.get(k, 0) + v
        return IoStats(**{k: getattr(self, k) + getattr(other, k) for k in self.FIELDS},
                       region_bytes=regions)

    @property
    def page_touches(self) -> int:
        return self.cache_hits + self.cache_misses

    @property
    def hit_rate(self) -> float:
        t = self.page_touches
        return self.cache_hits / t if t else 1.0

    def as_dict(self) -> dict:
        d = asdict(self)
        regions = d.pop("region_bytes")
        for name, v in sorted(regions.items()):
            d[f"{name}_region_bytes"] = v
        return d


def page_span(offset: int, length: int, page_size: int) -> tuple[int, int]:
    """First and last page touched by ``[offset, offset + length)``."""
    return offset // page_size, (offset + max(length, 1) - 1) // page_size


def merge(requests: Sequence[IoRequest], page_size: int,
          max_pages: int | None = None) -> list[MergedRequest]:
    """Coalesce offset-sorted requests whose page spans overlap or abut.

    A gap of one or more untouched pages always starts a new merged request;
    ``max_pages`` caps how far one merged request may grow.
    """
    out: list[MergedRequest] = []
    cur: MergedRequest | None = None
    cur_last = -2
    prev = -1
    for r in requests:
        if r.offset < prev:
            raise ContractViolation("merge() needs requests sorted by offset")
        prev = r.offset
        first = r.offset // page_size
        last = (r.offset + max(r.length, 1) - 1) // page_size
        if (cur is not None and first <= cur_last + 1
                and (max_pages is None or max(last, cur_last) - cur.first_page < max_pages)):
            cur.members.append(r)
            if last > cur_last:
                cur_last = last
        else:
            if cur is not None:
                cur.page_count = cur_last - cur.first_page + 1
            cur = MergedRequest(first, 0, [r])
            out.append(cur)
            cur_last = last
    if cur is not None:
        cur.page_count = cur_last - cur.first_page + 1
    return out


def split_unmerged(requests: Sequence[IoRequest], page_size: int) -> list[MergedRequest]:
    out = []
    for r in requests:
        first, last = page_span(r.offset, r.length, page_size)
        out.append(MergedRequest(first, last - first + 1, [r]))
    return out


class PageCache:
    """Set-associative LRU page cache with batched, merged user-task reads.

    ``io_threads=0`` runs every task inline on the submitting thread in
    submission order; with ``io_threads > 0`` batches complete on a pool and
    :meth:`submit_batch` returns before the tasks have run.
    """

    def __init__(self, path, config: CacheConfig | None = None, merging: bool = True,
                 regions: dict | None = None, io_threads: int = 0,
                 record_trace: bool = False):
        self.config = config or CacheConfig()
        self.page_size = self.config.page_size
        self.merging = merging
        self.regions = dict(regions or {})
        self._fd = os.open(os.fspath(path), os.O_RDONLY)
        self.file_size = os.fstat(self._fd).st_size
        self.num_pages = -(-self.file_size // self.page_size)
        self._assoc = self.config.associativity
        self._nslots = self.config.num_slots
        self._slots = [OrderedDict() for _ in range(self._nslots)]
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self.stats = IoStats(region_bytes={k: 0 for k in self.regions})
        self.trace: list[int] | None = [] if record_trace else None
        self.read_log: list[tuple[int, int]] | None = [] if record_trace else None
        self._max_pages = max(1, self.config.max_merge_bytes // self.page_size)
        self._pool = ThreadPoolExecutor(io_threads, thread_name_prefix="io") if io_threads else None

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None
        if self._fd >= 0:
            os.close(self._fd)
            self._fd = -1

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def capacity_pages(self) -> int:
        return self._nslots * self._assoc

    def resident_pages(self) -> int:
        with self._lock:
            return sum(len(s) for s in self._slots)

    # -- low level -------------------------------------------------------

    def _read_file(self, offset: int, length: int) -> bytes:
        chunks = []
        got = 0
        while got < length:
            chunk = os.pread(self._fd, length - got, offset + got)
            if not chunk:
                break
            chunks.append(chunk)
            got += len(chunk)
        data = b"".join(chunks)
        if len(data) < length:
            if offset + len(data) < self.file_size:
                raise OSError(f"short read at offset {offset}: {len(data)} of {length} bytes")
            # last page of the file: pad to whole pages
            data += bytes(length - len(data))
        return data

    def _touch(self, first: int, count: int) -> tuple[list[Page], list[Page]]:
        pages: list[Page] = []
        missing: list[Page] = []
        slots, nslots, assoc = self._slots, self._nslots, self._assoc
        with self._lock:
            for p in range(first, first + count):
                slot = slots[p % nslots]
                page = slot.get(p)
                if page is not None:
                    slot.move_to_end(p)
                else:
                    page = Page(p)
                    slot[p] = page
                    if len(slot) > assoc:
                        slot.popitem(last=False)
                    missing.append(page)
                pages.append(page)
            self.stats.cache_hits += count - len(missing)
            self.stats.cache_misses += len(missing)
            if self.trace is not None:
                self.trace.extend(range(first, first + count))
        return pages, missing

    def _fill(self, missing: list[Page]) -> None:
        ps = self.page_size
        i = 0
        while i < len(missing):
            j = i + 1
            while j < len(missing) and missing[j].page_no == missing[j - 1].page_no + 1:
                j += 1
            run = missing[i:j]
            start = run[0].page_no * ps
            length = len(run) * ps
            try:
                if run[-1].page_no >= self.num_pages:
                    raise OSError(f"page {run[-1].page_no} lies beyond the end of the file")
                data = self._read_file(start, length)
            except OSError as exc:
                self._fail(missing[i:], exc)
                raise
            mv = memoryview(data)
            with self._cond:
                for k, page in enumerate(run):
                    page.data = mv[k * ps:(k + 1) * ps]
                st = self.stats
                st.requests_issued_to_file += 1
                st.pages_read += len(run)
                st.bytes_read += length
                for name, (a, b) in self.regions.items():
                    ov = min(b, start + length) - max(a, start)
                    if ov > 0:
                        st.region_bytes[name] += ov
                if self.read_log is not None:
                    self.read_log.append((start, length))
                self._cond.notify_all()
            i = j

    def _fail(self, pages: list[Page], exc: BaseException) -> None:
        with self._cond:
            for page in pages:
                if page.data is None:
                    page.error = exc
                    slot = self._slots[page.page_no % self._nslots]
                    if slot.get(page.page_no) is page:
                        del slot[page.page_no]
            self._cond.notify_all()

    def _wait(self, pages: list[Page]) -> None:
        with self._cond:
            for page in pages:
                while page.data is None:
                    if page.error is not None:
                        raise OSError(f"page {page.page_no} failed: {page.error}")
                    self._cond.wait()

    def _fetch(self, first: int, count: int):
        """Make pages resident; return ``(buffer, base_offset)`` spanning them."""
        pages, missing = self._touch(first, count)
        if missing:
            self._fill(missing)
        if len(missing) != count:
            self._wait(pages)
        if count == 1:
            return pages[0].data, first * self.page_size
        if len(missing) == count and count <= self._max_pages:
            data = pages[0].data.obj
            if len(data) == count * self.page_size:
                return memoryview(data), first * self.page_size
        return memoryview(b"".join(p.data for p in pages)), first * self.page_size

    # -- public API ------------------------------------------------------

    def read_through(self, page_no: int) -> Page:
        """Return page ``page_no``, reading it into the cache on a miss."""
        if not 0 <= page_no < self.num_pages:
            raise PageCacheError(f"page {page_no} outside file of {self.num_pages} pages")
        try:
            data, _ = self._fetch(page_no, 1)
        except OSError as exc:
            raise PageCacheError(str(exc)) from exc
        return Page(page_no, data)

    def plan(self, requests: list[IoRequest], sorted_hint: bool = False) -> list[MergedRequest]:
        """Sort (unless already sorted) and group a batch the way it will be issued."""
        if not sorted_hint:
            requests = sorted(requests, key=_offset_key)
        if not self.merging:
            return split_unmerged(requests, self.page_size)
        try:
            return merge(requests, self.page_size, self._max_pages)
        except ContractViolation:
            return merge(sorted(requests, key=_offset_key), self.page_size, self._max_pages)

    def submit_batch(self, requests: list[IoRequest], sorted_hint: bool = False) -> Future:
        """Issue a batch; every request's task runs exactly once.

        The returned future resolves to the number of completed tasks, or
        raises :class:`PageCacheError` naming the requests whose bytes could
        not be read (their ``on_error`` callbacks have been invoked).
        """
        groups = self.plan(requests, sorted_hint)
        with self._lock:
            self.stats.requests_submitted += len(requests)
        if self._pool is None:
            fut: Future = Future()
            try:
                fut.set_result(self._run_groups(groups))
            except BaseException as exc:  # delivered through the future
                fut.set_exception(exc)
            return fut
        return self._pool.submit(self._run_groups, groups)

    def _run_groups(self, groups: list[MergedRequest]) -> int:
        done = 0
        failed: list[IoRequest] = []
        errors = []
        delivered = 0
        for g in groups:
            try:
                buf, base = self._fetch(g.first_page, g.page_count)
            except OSError as exc:
                errors.append(exc)
                for r in g.members:
                    failed.append(r)
                    if r.on_error is not None:
                        r.on_error(r, exc)
                continue
            for r in g.members:
                lo = r.offset - base
                delivered += r.length
                r.task(r, buf[lo:lo + r.length])
                done += 1
        with self._lock:
            self.stats.bytes_delivered += delivered
        if failed:
            raise PageCacheError(f"{len(failed)} request(s) failed: {errors[0]}", failed)
        return done


def _offset_key(r: IoRequest) -> int:
    return r.offset
