"""BICM link-level lab: GMI analysis of detector LLRs and online LLR scaling."""

from . import channel, constellation, detector, gmi, harness, online_scaling, turbo
from ._search import SearchParams, SearchResult

__version__ = "0.1.0"

__all__ = [
    "channel",
    "constellation",
    "detector",
    "gmi",
    "harness",
    "online_scaling",
    "turbo",
    "SearchParams",
    "SearchResult",
]
