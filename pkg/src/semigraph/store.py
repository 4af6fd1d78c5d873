"""On-disk graph container, text edge-list converter and the compact graph index.

File layout (all integers little-endian):

``.fgg``
    64-byte header, then the in-edge region, then the out-edge region.  Both
    regions start on an ``alignment`` boundary.  Undirected graphs have a
    single region and ``in_region_offset == out_region_offset``.  Each region
    holds one edge list per vertex in ascending vertex order::

        owner:u32  degree:u32  neighbors:degree*u32  attrs:degree*attr_bytes

``.fgi``
    64-byte header, degree codes (one byte per vertex and side), anchor
    offsets (one u64 per ``anchor_stride`` vertices and side), then the
    overflow table as ``(id, in_degree, out_degree)`` u32 triples.
"""
from __future__ import annotations

import hashlib
import io
import os
import struct
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import ConversionError, FormatError

GRAPH_MAGIC = b"SGRAPH\x00\x01"
INDEX_MAGIC = b"SGINDEX\x01"
FORMAT_VERSION = 1
HEADER_SIZE = 64
LIST_HEADER_SIZE = 8
DEFAULT_ALIGNMENT = 4096
DEFAULT_ANCHOR_STRIDE = 32
OVERFLOW_CODE = 255
MAX_VERTEX_ID = 2**32 - 1

_GRAPH_HEADER = struct.Struct("<8sIBQQHQQ")
_INDEX_HEADER = struct.Struct("<8sIQIBHQ")
LIST_HEADER = struct.Struct("<II")
_OFFSET_CHUNK = 1 << 16


class Side(IntEnum):
    IN = 0
    OUT = 1


def _align_up(value: int, alignment: int) -> int:
    return (value + alignment - 1) // alignment * alignment


def list_size(degree: int, attr_bytes: int = 0) -> int:
    """Byte size of one on-disk edge list."""
    return LIST_HEADER_SIZE + degree * (4 + attr_bytes)


@dataclass(frozen=True)
class GraphHeader:
    directed: bool
    num_vertices: int
    num_edges: int
    attr_bytes: int
    in_region_offset: int
    out_region_offset: int
    version: int = FORMAT_VERSION

    def pack(self) -> bytes:
        raw = _GRAPH_HEADER.pack(
            GRAPH_MAGIC, self.version, int(self.directed), self.num_vertices,
            self.num_edges, self.attr_bytes, self.in_region_offset,
            self.out_region_offset,
        )
        return raw.ljust(HEADER_SIZE, b"\x00")

    @classmethod
    def unpack(cls, raw: bytes) -> "GraphHeader":
        if len(raw) < HEADER_SIZE:
            raise FormatError("graph file shorter than its header")
        magic, version, directed, n, m, ab, in_off, out_off = _GRAPH_HEADER.unpack_from(raw)
        if magic != GRAPH_MAGIC:
            raise FormatError(f"bad graph magic {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported graph format version {version}")
        return cls(bool(directed), n, m, ab, in_off, out_off, version)

    def region_offset(self, side: Side) -> int:
        return self.in_region_offset if side == Side.IN else self.out_region_offset


# ---------------------------------------------------------------------------
# text input


def parse_edge_text(lines: Iterable[str], with_values: bool = False):
    """Parse ``src dst [value]`` lines into numpy arrays.

    Blank lines and lines starting with ``#`` are skipped.  Raises
    :class:`ConversionError` naming the offending 1-based line number.
    """
    src: list[int] = []
    dst: list[int] = []
    vals: list[int] = []
    max_cols = 3 if with_values else 2
    for lineno, line in enumerate(lines, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if not 2 <= len(parts) <= max_cols:
            raise ConversionError(f"line {lineno}: expected 'src dst', got {s!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
            v = int(parts[2]) if len(parts) == 3 else 0
        except ValueError:
            raise ConversionError(f"line {lineno}: non-integer vertex id in {s!r}", lineno) from None
        if a < 0 or b < 0:
            raise ConversionError(f"line {lineno}: negative vertex id", lineno)
        if a > MAX_VERTEX_ID or b > MAX_VERTEX_ID:
            raise ConversionError(f"line {lineno}: vertex id exceeds u32 range", lineno)
        src.append(a)
        dst.append(b)
        vals.append(v)
    out = (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))
    if with_values:
        return out + (np.array(vals, dtype=np.int64),)
    return out


# ---------------------------------------------------------------------------
# adjacency construction


@dataclass
class Adjacency:
    """CSR adjacency of one region; ``attrs`` is ``(m, attr_bytes)`` uint8."""

    indptr: np.ndarray
    indices: np.ndarray
    attrs: np.ndarray

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)


def _csr(keys_src, keys_dst, attrs, n):
    order = np.lexsort((keys_dst, keys_src))
    s, d, a = keys_src[order], keys_dst[order], attrs[order]
    # collapse parallel edges, keeping the first occurrence's payload
    if s.size:
        keep = np.ones(s.size, dtype=bool)
        keep[1:] = (s[1:] != s[:-1]) | (d[1:] != d[:-1])
        s, d, a = s[keep], d[keep], a[keep]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(s, minlength=n), out=indptr[1:])
    return Adjacency(indptr, d.astype(np.uint32), a)


def build_adjacency(src, dst, directed: bool, num_vertices: int | None = None,
                    attr_bytes: int = 0, values=None):
    """Return ``(n, {Side: Adjacency}, num_edges)`` with self-loops dropped
    and duplicates collapsed.  Undirected graphs map both sides to one object."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if src.shape != dst.shape:
        raise ConversionError("src and dst lengths differ")
    if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) > MAX_VERTEX_ID):
        raise ConversionError("vertex id outside the u32 range")
    n = int(max(src.max(), dst.max()) + 1) if src.size else 0
    if num_vertices is not None:
        if num_vertices < n:
            raise ConversionError(f"num_vertices={num_vertices} but ids reach {n - 1}")
        n = num_vertices
    if n > MAX_VERTEX_ID + 1:
        raise ConversionError("too many vertices for u32 ids")
    attrs = _encode_values(values, src.size, attr_bytes)
    keep = src != dst
    src, dst, attrs = src[keep], dst[keep], attrs[keep]
    if directed:
        out = _csr(src, dst, attrs, n)
        inn = _csr(dst, src, attrs, n)
        return n, {Side.IN: inn, Side.OUT: out}, int(out.indices.size)
    both = _csr(np.concatenate([src, dst]), np.concatenate([dst, src]),
                np.concatenate([attrs, attrs]), n)
    return n, {Side.IN: both, Side.OUT: both}, int(both.indices.size // 2)


def _encode_values(values, m: int, attr_bytes: int) -> np.ndarray:
    if attr_bytes == 0:
        return np.zeros((m, 0), dtype=np.uint8)
    if values is None:
        return np.zeros((m, attr_bytes), dtype=np.uint8)
    vals = np.asarray(values, dtype=np.int64)
    if attr_bytes < 8 and vals.size and (vals.min() < 0 or vals.max() >= 1 << (8 * attr_bytes)):
        raise ConversionError(f"edge value does not fit in {attr_bytes} attribute bytes")
    raw = vals.astype("<u8").view(np.uint8).reshape(m, 8)
    if attr_bytes <= 8:
        return np.ascontiguousarray(raw[:, :attr_bytes])
    padded = np.zeros((m, attr_bytes), dtype=np.uint8)
    padded[:, :8] = raw
    return padded


def encode_region(adj: Adjacency, attr_bytes: int) -> np.ndarray:
    """Serialize every edge list of ``adj`` back to back (uint8 array)."""
    n = adj.indptr.size - 1
    deg = adj.degrees
    sizes = LIST_HEADER_SIZE + deg * (4 + attr_bytes)
    starts = np.zeros(n, dtype=np.int64)
    if n > 1:
        np.cumsum(sizes[:-1], out=starts[1:])
    total = int(sizes.sum())
    out = np.zeros(total, dtype=np.uint8)
    if n == 0:
        return out
    hdr = np.empty((n, 2), dtype="<u4")
    hdr[:, 0] = np.arange(n, dtype=np.uint32)
    hdr[:, 1] = deg
    _scatter(out, starts, hdr.view(np.uint8).reshape(n, 8))
    m = adj.indices.size
    if m:
        owner = np.repeat(np.arange(n, dtype=np.int64), deg)
        rank = np.arange(m, dtype=np.int64) - adj.indptr[owner]
        nb_start = starts[owner] + LIST_HEADER_SIZE + 4 * rank
        _scatter(out, nb_start, adj.indices.astype("<u4").view(np.uint8).reshape(m, 4))
        if attr_bytes:
            at_start = starts[owner] + LIST_HEADER_SIZE + 4 * deg[owner] + attr_bytes * rank
            _scatter(out, at_start, adj.attrs)
    return out


def _scatter(out: np.ndarray, starts: np.ndarray, rows: np.ndarray, chunk: int = 1 << 20) -> None:
    width = rows.shape[1]
    if width == 0:
        return
    cols = np.arange(width, dtype=np.int64)
    for lo in range(0, starts.size, chunk):
        pos = starts[lo:lo + chunk, None] + cols
        out[pos] = rows[lo:lo + chunk]


# ---------------------------------------------------------------------------
# compact index


class GraphIndex:
    """Per-vertex one-byte degree codes plus periodic offset anchors.

    Edge-list locations are never stored per vertex; they are recomputed from
    the closest preceding anchor by summing at most ``anchor_stride - 1``
    list sizes.  Degrees of 255 or more live in a small sorted overflow table.
    """

    def __init__(self, num_vertices: int, directed: bool, attr_bytes: int,
                 anchor_stride: int, codes: dict, anchors: dict,
                 large_ids: np.ndarray, large_in: np.ndarray, large_out: np.ndarray):
        if anchor_stride < 1 or anchor_stride & (anchor_stride - 1):
            raise ValueError("anchor_stride must be a power of two")
        self.num_vertices = num_vertices
        self.directed = directed
        self.attr_bytes = attr_bytes
        self.anchor_stride = anchor_stride
        self._shift = anchor_stride.bit_length() - 1
        self._codes = codes
        self._anchors = anchors
        self.large_ids = large_ids.astype(np.uint32)
        self._large = {Side.IN: large_in.astype(np.uint32), Side.OUT: large_out.astype(np.uint32)}
        self._edge_bytes = 4 + attr_bytes

    @classmethod
    def build(cls, num_vertices: int, directed: bool, attr_bytes: int,
              degrees: dict, region_offsets: dict,
              anchor_stride: int = DEFAULT_ANCHOR_STRIDE) -> "GraphIndex":
        sides = (Side.IN, Side.OUT) if directed else (Side.OUT,)
        codes, anchors = {}, {}
        overflow = np.zeros(num_vertices, dtype=bool)
        for side in sides:
            deg = np.asarray(degrees[side], dtype=np.int64)
            codes[side] = np.minimum(deg, OVERFLOW_CODE).astype(np.uint8)
            overflow |= deg >= OVERFLOW_CODE
            sizes = LIST_HEADER_SIZE + deg * (4 + attr_bytes)
            starts = np.zeros(num_vertices, dtype=np.int64)
            if num_vertices > 1:
                np.cumsum(sizes[:-1], out=starts[1:])
            anchors[side] = (region_offsets[side] + starts[::anchor_stride]).astype(np.uint64)
        if not directed:
            codes[Side.IN] = codes[Side.OUT]
            anchors[Side.IN] = anchors[Side.OUT]
        ids = np.flatnonzero(overflow)
        large_in = np.asarray(degrees[Side.IN], dtype=np.int64)[ids]
        large_out = np.asarray(degrees[Side.OUT], dtype=np.int64)[ids]
        return cls(num_vertices, directed, attr_bytes, anchor_stride, codes, anchors,
                   ids, large_in, large_out)

    # -- lookups ---------------------------------------------------------

    def _large_degree(self, v: int, side: Side) -> int:
        pos = int(np.searchsorted(self.large_ids, v))
        if pos >= self.large_ids.size or int(self.large_ids[pos]) != v:
            raise FormatError(f"vertex {v} has overflow code but no overflow entry")
        return int(self._large[side][pos])

    def degree(self, v: int, side: Side = Side.OUT) -> int:
        code = int(self._codes[side][v])
        if code == OVERFLOW_CODE:
            return self._large_degree(v, side)
        return code

    def degrees(self, ids, side: Side = Side.OUT) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        deg = self._codes[side][ids].astype(np.int64)
        ovf = deg == OVERFLOW_CODE
        if ovf.any():
            deg[ovf] = self._lookup_large(ids[ovf], side)
        return deg

    def _lookup_large(self, ids: np.ndarray, side: Side) -> np.ndarray:
        pos = np.searchsorted(self.large_ids, ids)
        pos_c = np.minimum(pos, max(self.large_ids.size - 1, 0))
        if self.large_ids.size == 0 or np.any(self.large_ids[pos_c] != ids):
            raise FormatError("overflow code without overflow entry")
        return self._large[side][pos_c].astype(np.int64)

    def index_offset(self, v: int, side: Side = Side.OUT) -> tuple[int, int]:
        """Absolute byte offset and byte length of ``v``'s edge list."""
        if not 0 <= v < self.num_vertices:
            raise IndexError(f"vertex {v} out of range")
        a = v >> self._shift
        base = a << self._shift
        codes = self._codes[side]
        offset = int(self._anchors[side][a])
        if v > base:
            window = codes[base:v]
            total = int(window.sum(dtype=np.int64))
            if OVERFLOW_CODE in window:
                for u in np.flatnonzero(window == OVERFLOW_CODE):
                    total += self._large_degree(base + int(u), side) - OVERFLOW_CODE
            offset += LIST_HEADER_SIZE * (v - base) + self._edge_bytes * total
        return offset, LIST_HEADER_SIZE + self._edge_bytes * self.degree(v, side)

    def offsets(self, ids, side: Side = Side.OUT) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized :meth:`index_offset` over an array of vertex ids."""
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size == 0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        if ids.min() < 0 or ids.max() >= self.num_vertices:
            raise IndexError("vertex id out of range")
        if ids.size > _OFFSET_CHUNK:
            parts = [self._offsets(ids[i:i + _OFFSET_CHUNK], side)
                     for i in range(0, ids.size, _OFFSET_CHUNK)]
            return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
        return self._offsets(ids, side)

    def _offsets(self, ids: np.ndarray, side: Side):
        a = ids >> self._shift
        base = a << self._shift
        span = ids - base
        offsets = self._anchors[side][a].astype(np.int64)
        width = int(span.max())
        if width:
            k = np.arange(width, dtype=np.int64)
            cols = base[:, None] + k
            mask = k < span[:, None]
            cols = np.where(mask, cols, 0)
            deg = self._codes[side][cols].astype(np.int64)
            deg *= mask
            ovf = deg == OVERFLOW_CODE
            if ovf.any():
                deg[ovf] = self._lookup_large(cols[ovf], side)
            offsets += LIST_HEADER_SIZE * span + self._edge_bytes * deg.sum(axis=1)
        lengths = LIST_HEADER_SIZE + self._edge_bytes * self.degrees(ids, side)
        return offsets, lengths

    @property
    def overflow_count(self) -> int:
        return int(self.large_ids.size)

    @property
    def nbytes(self) -> int:
        """In-memory footprint of the index arrays."""
        sides = (Side.IN, Side.OUT) if self.directed else (Side.OUT,)
        total = sum(self._codes[s].nbytes + self._anchors[s].nbytes for s in sides)
        return total + 12 * self.overflow_count

    # -- serialization ---------------------------------------------------

    def to_bytes(self) -> bytes:
        sides = (Side.IN, Side.OUT) if self.directed else (Side.OUT,)
        head = _INDEX_HEADER.pack(INDEX_MAGIC, FORMAT_VERSION, self.num_vertices,
                                  self.anchor_stride, int(self.directed), self.attr_bytes,
                                  self.overflow_count).ljust(HEADER_SIZE, b"\x00")
        parts = [head]
        parts += [self._codes[s].tobytes() for s in sides]
        parts += [self._anchors[s].astype("<u8").tobytes() for s in sides]
        triples = np.empty((self.overflow_count, 3), dtype="<u4")
        triples[:, 0] = self.large_ids
        triples[:, 1] = self._large[Side.IN]
        triples[:, 2] = self._large[Side.OUT]
        parts.append(triples.tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "GraphIndex":
        if len(raw) < HEADER_SIZE:
            raise FormatError("index file shorter than its header")
        magic, version, n, stride, directed, ab, nlarge = _INDEX_HEADER.unpack_from(raw)
        if magic != INDEX_MAGIC:
            raise FormatError(f"bad index magic {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"unsupported index version {version}")
        sides = (Side.IN, Side.OUT) if directed else (Side.OUT,)
        nanch = (n + stride - 1) // stride
        expected = HEADER_SIZE + len(sides) * (n + 8 * nanch) + 12 * nlarge
        if len(raw) != expected:
            raise FormatError(f"index file is {len(raw)} bytes, expected {expected}")
        pos = HEADER_SIZE
        codes, anchors = {}, {}
        for s in sides:
            codes[s] = np.frombuffer(raw, dtype=np.uint8, count=n, offset=pos).copy()
            pos += n
        for s in sides:
            anchors[s] = np.frombuffer(raw, dtype="<u8", count=nanch, offset=pos).astype(np.uint64)
            pos += 8 * nanch
        triples = np.frombuffer(raw, dtype="<u4", count=3 * nlarge, offset=pos).reshape(nlarge, 3)
        if not directed:
            codes[Side.IN] = codes[Side.OUT]
            anchors[Side.IN] = anchors[Side.OUT]
        return cls(n, bool(directed), ab, stride, codes, anchors,
                   triples[:, 0].copy(), triples[:, 1].copy(), triples[:, 2].copy())

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "GraphIndex":
        return cls.from_bytes(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# graph file


class GraphFile:
    """Read-only handle on a ``.fgg`` container (header parsed eagerly)."""

    def __init__(self, path):
        self.path = Path(path)
        with open(self.path, "rb") as fh:
            self.header = GraphHeader.unpack(fh.read(HEADER_SIZE))
        self.size = self.path.stat().st_size

    @property
    def num_vertices(self) -> int:
        return self.header.num_vertices

    @property
    def directed(self) -> bool:
        return self.header.directed

    def region_bounds(self) -> dict:
        """``{"in": (start, end), "out": (start, end)}`` byte ranges."""
        h = self.header
        if not h.directed:
            return {"out": (h.out_region_offset, self.size)}
        return {"in": (h.in_region_offset, h.out_region_offset),
                "out": (h.out_region_offset, self.size)}

    def read_list(self, index: GraphIndex, v: int, side: Side = Side.OUT):
        """Direct (uncached) read of one edge list: ``(neighbors, attrs)``."""
        off, length = index.index_offset(v, side)
        with open(self.path, "rb") as fh:
            fh.seek(off)
            raw = fh.read(length)
        return decode_list(raw, v, self.header.attr_bytes)


def decode_list(raw, expect_owner: int | None, attr_bytes: int):
    if len(raw) < LIST_HEADER_SIZE:
        raise FormatError("truncated edge list header")
    owner, deg = LIST_HEADER.unpack_from(raw)
    if expect_owner is not None and owner != expect_owner:
        raise FormatError(f"offset mismatch: expected list of vertex {expect_owner}, found {owner}")
    if len(raw) != list_size(deg, attr_bytes):
        raise FormatError(f"offset mismatch: list of vertex {owner} has degree {deg} "
                          f"but {len(raw)} bytes were addressed")
    nbrs = np.frombuffer(raw, dtype="<u4", count=deg, offset=LIST_HEADER_SIZE)
    attrs = np.frombuffer(raw, dtype=np.uint8, count=deg * attr_bytes,
                          offset=LIST_HEADER_SIZE + 4 * deg).reshape(deg, attr_bytes)
    return nbrs, attrs


@dataclass
class ConvertResult:
    header: GraphHeader
    index: GraphIndex
    num_vertices: int
    num_edges: int


def convert_edges(src, dst, graph_path, index_path, directed: bool = True,
                  attr_bytes: int = 0, values=None, num_vertices: int | None = None,
                  anchor_stride: int = DEFAULT_ANCHOR_STRIDE,
                  alignment: int = DEFAULT_ALIGNMENT) -> ConvertResult:
    """Write ``.fgg``/``.fgi`` files from edge arrays."""
    if not 0 <= attr_bytes <= 0xFFFF:
        raise ConversionError("attr_bytes must fit in u16")
    n, adj, m = build_adjacency(src, dst, directed, num_vertices, attr_bytes, values)
    in_off = _align_up(HEADER_SIZE, alignment)
    if directed:
        in_region = encode_region(adj[Side.IN], attr_bytes)
        out_off = _align_up(in_off + in_region.size, alignment)
        regions = [(in_off, in_region), (out_off, encode_region(adj[Side.OUT], attr_bytes))]
    else:
        out_off = in_off
        regions = [(in_off, encode_region(adj[Side.OUT], attr_bytes))]
    header = GraphHeader(directed, n, m, attr_bytes, in_off, out_off)
    end = _align_up(regions[-1][0] + regions[-1][1].size, alignment)
    with open(graph_path, "wb") as fh:
        fh.write(header.pack())
        for off, data in regions:
            fh.seek(off)
            fh.write(data.tobytes())
        fh.truncate(end)
    degrees = {s: adj[s].degrees for s in (Side.IN, Side.OUT)}
    index = GraphIndex.build(n, directed, attr_bytes, degrees,
                             {Side.IN: in_off, Side.OUT: out_off}, anchor_stride)
    index.save(index_path)
    return ConvertResult(header, index, n, m)


def convert(text, graph_path, index_path, directed: bool = True, attr_bytes: int = 0,
            num_vertices: int | None = None, anchor_stride: int = DEFAULT_ANCHOR_STRIDE,
            alignment: int = DEFAULT_ALIGNMENT) -> ConvertResult:
    """Convert a text edge list (path, open stream or string lines) to binary files."""
    with_values = attr_bytes > 0
    if isinstance(text, (str, os.PathLike)):
        with open(text, "r") as fh:
            parsed = parse_edge_text(fh, with_values)
    else:
        parsed = parse_edge_text(text, with_values)
    values = parsed[2] if with_values else None
    return convert_edges(parsed[0], parsed[1], graph_path, index_path, directed,
                         attr_bytes, values, num_vertices, anchor_stride, alignment)


def open_text(data: str) -> TextIO:
    return io.StringIO(data)


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class Graph:
    """A graph file together with its in-memory index."""

    file: GraphFile
    index: GraphIndex

    @property
    def num_vertices(self) -> int:
        return self.index.num_vertices

    @property
    def directed(self) -> bool:
        return self.index.directed

    @property
    def attr_bytes(self) -> int:
        return self.index.attr_bytes

    @property
    def num_edges(self) -> int:
        return self.file.header.num_edges


def open_graph(graph_path, index_path=None) -> Graph:
    """Open a ``.fgg`` file and load its ``.fgi`` index (default: same stem)."""
    graph_path = Path(graph_path)
    if index_path is None:
        index_path = graph_path.with_suffix(".fgi")
    gf = GraphFile(graph_path)
    index = GraphIndex.load(index_path)
    h = gf.header
    if (index.num_vertices, index.directed, index.attr_bytes) != (h.num_vertices, h.directed, h.attr_bytes):
        raise FormatError(f"index {index_path} does not describe graph {graph_path}")
    return Graph(gf, index)
