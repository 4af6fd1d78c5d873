import hashlib
import os
from collections import OrderedDict

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semigraph.errors import ContractViolation, PageCacheError
from semigraph.pagecache import CacheConfig, IoRequest, PageCache, merge, split_unmerged

PS = 4096


@pytest.fixture
def data_file(tmp_path):
    path = tmp_path / "data.bin"
    payload = os.urandom(PS * 40 + 123)
    path.write_bytes(payload)
    return path, payload


def req(offset, length, task=None):
    return IoRequest(0, 1, offset, length, task)


def pages_of(group):
    return set(range(group.first_page, group.first_page + group.page_count))


# -- configuration ----------------------------------------------------------


@pytest.mark.parametrize("kw", [dict(page_size=3000), dict(page_size=256),
                                dict(page_size=2 << 20), dict(capacity_pages=4, associativity=8),
                                dict(capacity_pages=4, associativity=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        CacheConfig(**kw)


def test_config_for_bytes_holds_everything():
    cfg = CacheConfig.for_bytes(10 * PS + 1)
    assert cfg.capacity_pages == 11
    assert cfg.num_slots * cfg.associativity >= 11


# -- merging ----------------------------------------------------------------


def test_same_page_requests_merge():
    groups = merge([req(100, 200), req(3000, 500)], PS)
    assert len(groups) == 1
    assert (groups[0].first_page, groups[0].page_count) == (0, 1)


def test_adjacent_pages_merge_and_gaps_split():
    g = merge([req(5 * PS, 10), req(6 * PS, 10)], PS)
    assert [(x.first_page, x.page_count) for x in g] == [(5, 2)]
    g = merge([req(5 * PS, 10), req(7 * PS, 10)], PS)
    assert [(x.first_page, x.page_count) for x in g] == [(5, 1), (7, 1)]


def test_figure_style_example():
    # spans [0], [0], [1] -> one request over pages 0-1
    g = merge([req(10, 10), req(2000, 10), req(PS + 5, 10)], PS)
    assert [(x.first_page, x.page_count) for x in g] == [(0, 2)]
    g = merge([req(10, 10), req(2 * PS, 10)], PS)
    assert len(g) == 2


def test_merge_rejects_unsorted():
    with pytest.raises(ContractViolation):
        merge([req(PS, 10), req(0, 10)], PS)


def test_merge_cap():
    reqs = [req(i * PS, PS) for i in range(10)]
    groups = merge(reqs, PS, max_pages=4)
    assert [x.page_count for x in groups] == [4, 4, 2]


request_lists = st.lists(st.tuples(st.integers(0, 60 * PS), st.integers(1, 3 * PS)),
                         min_size=1, max_size=60)


@settings(max_examples=200, deadline=None)
@given(request_lists, st.sampled_from([None, 1, 3, 8]))
def test_merge_properties(spans, cap):
    reqs = [req(o, n) for o, n in sorted(spans)]
    groups = merge(reqs, PS, max_pages=cap)
    # order preserved, every request exactly once
    assert [r for g in groups for r in g.members] == reqs
    touched = set()
    for r in reqs:
        touched |= set(range(r.offset // PS, (r.offset + r.length - 1) // PS + 1))
    covered = [pages_of(g) for g in groups]
    assert set().union(*covered) == touched
    if cap is None:
        assert sum(len(c) for c in covered) == len(touched)  # pairwise disjoint
    for g in groups:
        for r in g.members:
            assert g.first_page * PS <= r.offset
            assert r.offset + r.length <= (g.first_page + g.page_count) * PS
        if cap is not None:
            assert g.page_count <= max(cap, max(
                (r.offset + r.length - 1) // PS - r.offset // PS + 1 for r in g.members))
    if cap is None:
        # maximal: consecutive groups are separated by at least one untouched page
        for a, b in zip(groups, groups[1:]):
            assert b.first_page > a.first_page + a.page_count


# -- reads and tasks --------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 40 * PS), st.integers(1, 2 * PS)), min_size=1,
                max_size=40),
       st.sampled_from([1, 4, 64]), st.booleans(), st.booleans())
def test_tasks_see_file_bytes(tmp_path_factory, spans, capacity, merging, hinted):
    path = tmp_path_factory.mktemp("pc") / "f.bin"
    payload = bytes(range(256)) * (PS * 41 // 256)
    path.write_bytes(payload)
    seen = {}

    def task(r, view):
        assert isinstance(view, memoryview) and view.readonly
        seen[id(r)] = seen.get(id(r), 0) + 1
        assert bytes(view) == payload[r.offset:r.offset + r.length]

    reqs = [req(o, n, task) for o, n in spans]
    if hinted:
        reqs.sort(key=lambda r: r.offset)
    cfg = CacheConfig(capacity, min(capacity, 4), PS)
    with PageCache(path, cfg, merging=merging) as cache:
        done = cache.submit_batch(reqs, sorted_hint=hinted).result()
        assert done == len(reqs)
        assert all(seen[id(r)] == 1 for r in reqs)
        s = cache.stats
        assert s.cache_hits + s.cache_misses == s.page_touches
        assert s.bytes_read == s.pages_read * PS


def test_merging_never_changes_delivered_bytes(data_file):
    path, payload = data_file
    spans = [(i * 1500, 700) for i in range(100)]
    digests = []
    issued = []
    for merging in (False, True):
        h = hashlib.sha256()
        reqs = [req(o, n, lambda r, v, h=h: h.update(bytes(v))) for o, n in spans]
        with PageCache(path, CacheConfig(8, 8, PS), merging=merging) as cache:
            cache.submit_batch(reqs, sorted_hint=True).result()
            issued.append(cache.stats.requests_issued_to_file)
        digests.append(h.hexdigest())
    assert digests[0] == digests[1]
    assert issued[1] <= issued[0]


def test_reads_are_page_aligned(data_file):
    path, _ = data_file
    with PageCache(path, CacheConfig(16, 4, PS), record_trace=True) as cache:
        reqs = [req(o, 50, lambda r, v: None) for o in (17, 9000, 9100, 30000, 41 * PS - 100)]
        cache.submit_batch(reqs).result()
        for off, length in cache.read_log:
            assert off % PS == 0 and length % PS == 0 and length >= PS


def test_last_partial_page_is_padded(data_file):
    path, payload = data_file
    with PageCache(path, CacheConfig(4, 4, PS)) as cache:
        page = cache.read_through(40)
        assert bytes(page.data[:123]) == payload[40 * PS:]
        assert bytes(page.data[123:]) == bytes(PS - 123)


def test_second_scan_all_hits_when_cache_fits(data_file):
    path, _ = data_file
    with PageCache(path, CacheConfig.for_bytes(41 * PS)) as cache:
        for p in range(41):
            cache.read_through(p)
        before = cache.stats.copy()
        for p in range(41):
            cache.read_through(p)
        delta = cache.stats - before
        assert delta.cache_misses == 0 and delta.cache_hits == 41


def test_single_page_cache_thrashes(data_file):
    path, _ = data_file
    with PageCache(path, CacheConfig(1, 1, PS)) as cache:
        for _ in range(5):
            cache.read_through(0)
            cache.read_through(1)
        assert cache.stats.cache_hits == 0 and cache.stats.cache_misses == 10


def test_read_through_out_of_range(data_file):
    path, _ = data_file
    with PageCache(path) as cache:
        with pytest.raises(PageCacheError):
            cache.read_through(41)


class ReferenceCache:
    """Textbook set-associative LRU: one ordered dict per slot."""

    def __init__(self, capacity, assoc):
        self.nslots = -(-capacity // assoc)
        self.assoc = assoc
        self.slots = [OrderedDict() for _ in range(self.nslots)]
        self.misses = 0

    def access(self, page):
        slot = self.slots[page % self.nslots]
        if page in slot:
            slot.move_to_end(page)
            return
        self.misses += 1
        slot[page] = True
        if len(slot) > self.assoc:
            slot.popitem(last=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 39 * PS), st.integers(1, 3 * PS)), min_size=1,
                max_size=80),
       st.sampled_from([(1, 1), (4, 4), (8, 2), (12, 4), (16, 16)]), st.booleans())
def test_hit_accounting_matches_reference_lru(tmp_path_factory, spans, geometry, merging):
    path = tmp_path_factory.mktemp("lru") / "f.bin"
    path.write_bytes(bytes(PS * 42))
    capacity, assoc = geometry
    with PageCache(path, CacheConfig(capacity, assoc, PS), merging=merging,
                   record_trace=True) as cache:
        for chunk in range(0, len(spans), 7):
            batch = [req(o, n, lambda r, v: None) for o, n in spans[chunk:chunk + 7]]
            cache.submit_batch(batch).result()
        ref = ReferenceCache(capacity, assoc)
        for page in cache.trace:
            ref.access(page)
        s = cache.stats
        assert s.page_touches == len(cache.trace)
        assert s.cache_misses == ref.misses == s.pages_read
        assert s.hit_rate == pytest.approx(1 - s.pages_read / s.page_touches)


def test_read_failure_reports_affected_requests(data_file):
    path, _ = data_file
    failed = []
    ok = []
    good = req(0, 10, lambda r, v: ok.append(r))
    bad = req(60 * PS, 10, lambda r, v: ok.append(r))
    bad.on_error = lambda r, exc: failed.append(r)
    with PageCache(path) as cache:
        fut = cache.submit_batch([good, bad])
        with pytest.raises(PageCacheError) as info:
            fut.result()
    assert info.value.requests == [bad]
    assert failed == [bad] and ok == [good]


def test_io_threads_complete_asynchronously(data_file):
    path, payload = data_file
    got = []
    reqs = [req(o, 64, lambda r, v: got.append(bytes(v) == payload[r.offset:r.offset + 64]))
            for o in range(0, 30 * PS, 3 * PS)]
    with PageCache(path, io_threads=2) as cache:
        futs = [cache.submit_batch(reqs[i:i + 2]) for i in range(0, len(reqs), 2)]
        assert sum(f.result() for f in futs) == len(reqs)
    assert got and all(got)


def test_unmerged_planning_is_one_group_per_request():
    reqs = [req(0, 10), req(20, 10)]
    assert len(split_unmerged(reqs, PS)) == 2


def test_region_accounting(data_file):
    path, _ = data_file
    regions = {"in": (PS, 10 * PS), "out": (10 * PS, 41 * PS)}
    with PageCache(path, regions=regions) as cache:
        cache.submit_batch([req(20 * PS, 10, lambda r, v: None)]).result()
        assert cache.stats.region_bytes == {"in": 0, "out": PS}
