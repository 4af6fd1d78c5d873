"""Semi-external-memory vertex-centric graph processing."""
from .engine import Engine, EngineConfig, RunResult, VertexProgram, run_algorithm
from .errors import (ContractViolation, ConversionError, EngineError, FormatError,
                     OracleSizeError, PageCacheError, SemigraphError)
from .pagecache import CacheConfig, IoRequest, IoStats, PageCache
from .store import Graph, GraphFile, GraphIndex, Side, convert, convert_edges, open_graph

__all__ = [
    "CacheConfig", "ContractViolation", "ConversionError", "Engine", "EngineConfig",
    "EngineError", "FormatError", "Graph", "GraphFile", "GraphIndex", "IoRequest", "IoStats",
    "OracleSizeError", "PageCache", "PageCacheError", "RunResult", "SemigraphError", "Side",
    "VertexProgram", "convert", "convert_edges", "open_graph", "run_algorithm",
]
