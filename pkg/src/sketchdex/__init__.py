"""Sketch-queried retrieval for black-and-white line-art page images.

Pages are indexed offline as sets of PQ-compressed edge-orientation
histograms over proposal windows; queries are free-hand sketches answered
with ranked, localized window hits.
"""

from .engine import (
    Index,
    IndexConfig,
    PageRecord,
    SketchRetriever,
    build_index,
    load_index,
    region_query,
    save_index,
    search,
    search_windows,
)
from .eoh import extract_eoh, sketch_to_feature
from .exceptions import SketchdexError
from .geometry import Box, SearchHit, Window
from .margins import MarginMask, compute_margin_mask, margin_ratio
from .pq import ProductQuantizer, adc_scan
from .proposals import WindowProposer

__version__ = "0.1.0"

__all__ = [
    "Box",
    "Index",
    "IndexConfig",
    "MarginMask",
    "PageRecord",
    "ProductQuantizer",
    "SearchHit",
    "SketchRetriever",
    "SketchdexError",
    "Window",
    "WindowProposer",
    "adc_scan",
    "build_index",
    "compute_margin_mask",
    "extract_eoh",
    "load_index",
    "margin_ratio",
    "region_query",
    "save_index",
    "search",
    "search_windows",
    "sketch_to_feature",
    "__version__",
]
