"""Online decision-aided LLR scaling: approximate I-curves from decoder
decisions, per-bit-channel multiplicative factor search, the 2-level
(sign-split) variant, and the decision-accuracy metric."""

import json
from dataclasses import dataclass, field

import numpy as np

from ._search import SearchParams, SearchResult, multiplicative_search
from .detector import LlrRecords
from .gmi import icurve_value

__all__ = [
    "SearchParams",
    "SearchResult",
    "approx_icurve",
    "search_scale",
    "two_level_search",
    "normalized_mean_error",
    "ScalingReport",
]


def _included(records: LlrRecords, bit_source: str):
    """Zero LLRs contribute a constant 1-bit loss regardless of s; drop them.
    The reported record count covers included records only."""
    bits = records.bits(bit_source)
    mask = records.llr != 0.0
    return records.llr[mask], bits[mask]


def approx_icurve(records: LlrRecords, s: float, bit_source: str = "decided") -> float:
    """I-hat(s): same expectation as the genie I-curve but over decided bits."""
    llr, bits = _included(records, bit_source)
    return icurve_value(llr, bits, s)


def search_scale(records: LlrRecords, params: SearchParams = SearchParams(),
                 bit_source: str = "decided") -> SearchResult:
    """Multiplicative search for the factor maximizing the approximate I-curve."""
    llr, bits = _included(records, bit_source)
    if llr.size == 0:
        raise ValueError("no nonzero-LLR records to search over")
    return multiplicative_search(lambda s: icurve_value(llr, bits, s), params)


def search_scale_per_class(records: LlrRecords, params: SearchParams = SearchParams(),
                           bit_source: str = "decided") -> dict:
    return {int(k): search_scale(records.for_class(int(k)), params, bit_source)
            for k in records.classes()}


@dataclass
class TwoLevelResult:
    plus: SearchResult
    minus: SearchResult
    plus_fallback: bool = False     # True when a sign subset was empty
    minus_fallback: bool = False


def two_level_search(records: LlrRecords, params: SearchParams = SearchParams(),
                     bit_source: str = "decided") -> TwoLevelResult:
    """Separate factors for positive and negative LLRs of one bit channel.

    The I-hat sum splits disjointly by the sign of l, so the joint
    maximization separates into two independent 1-D searches. An empty sign
    subset falls back to the single-factor result, flagged.
    """
    pos = records.select(records.llr > 0)
    neg = records.select(records.llr < 0)
    plus_fb = minus_fb = False
    single = None
    if len(pos) == 0 or len(neg) == 0:
        single = search_scale(records, params, bit_source)
    if len(pos) > 0:
        res_p = search_scale(pos, params, bit_source)
    else:
        res_p, plus_fb = single, True
    if len(neg) > 0:
        res_m = search_scale(neg, params, bit_source)
    else:
        res_m, minus_fb = single, True
    return TwoLevelResult(plus=res_p, minus=res_m,
                          plus_fallback=plus_fb, minus_fallback=minus_fb)


def two_level_search_per_class(records: LlrRecords, params: SearchParams = SearchParams(),
                               bit_source: str = "decided",
                               single_factor_classes=(0,)) -> dict:
    """Per-class sign-split search; the first bit-channel class keeps a single
    factor (its LLR distribution is symmetric around 0)."""
    out = {}
    for k in records.classes():
        sub = records.for_class(int(k))
        if int(k) in single_factor_classes:
            res = search_scale(sub, params, bit_source)
            out[int(k)] = TwoLevelResult(plus=res, minus=res)
        else:
            out[int(k)] = two_level_search(sub, params, bit_source)
    return out


def normalized_mean_error(genie_factors, decided_factors) -> float:
    """E{|s - s_hat| / s} over paired per-frame factors."""
    s = np.asarray(genie_factors, dtype=np.float64)
    s_hat = np.asarray(decided_factors, dtype=np.float64)
    if s.shape != s_hat.shape:
        raise ValueError("factor sequences must be paired")
    if np.any(s == 0):
        raise ValueError("genie factor of zero")
    return float(np.mean(np.abs(s - s_hat) / s))


@dataclass
class ScalingReport:
    """Chosen factors per bit channel, exportable as JSON."""

    bit_source: str
    channels: dict = field(default_factory=dict)

    @classmethod
    def from_single(cls, results: dict, bit_source: str) -> "ScalingReport":
        rep = cls(bit_source=bit_source)
        for k, r in results.items():
            rep.channels[int(k)] = {"factor": r.s, "i_hat": r.value,
                                    "steps": r.steps, "converged": r.converged}
        return rep

    @classmethod
    def from_two_level(cls, results: dict, bit_source: str) -> "ScalingReport":
        rep = cls(bit_source=bit_source)
        for k, r in results.items():
            rep.channels[int(k)] = {
                "s_plus": r.plus.s, "s_minus": r.minus.s,
                "i_hat": 0.5 * (r.plus.value + r.minus.value),
                "steps": r.plus.steps + r.minus.steps,
                "converged": r.plus.converged and r.minus.converged,
            }
        return rep

    def to_json(self, path=None):
        payload = {"bit_source": self.bit_source,
                   "channels": {str(k): v for k, v in self.channels.items()}}
        if path is None:
            return json.dumps(payload, indent=2)
        with open(path, "w") as f:
            json.dump(payload, f, indent=2)
