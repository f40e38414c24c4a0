"""GMI machinery: I-curves, critical points, capacity estimates, and the
offline LLR scaling methods (histogram LUT and per-channel uniform factors)."""

from dataclasses import dataclass

import numpy as np

from . import channel as ch
from . import detector as det
from ._search import SearchParams, maximize
from .constellation import build_qam
from .detector import LLR_CLIP, LlrRecords

_LN2 = np.log(2.0)

DEFAULT_S_GRID = np.geomspace(0.1, 10.0, 81)
HIST_BINS = 201
HIST_RANGE = (-LLR_CLIP, LLR_CLIP)
HIST_SMOOTHING = 0.5
MIN_BIN_COUNT = 20
LUT_SEGMENTS = 16


def bipolar(bits) -> np.ndarray:
    """Bit-to-sign map: +1 for bit 1, -1 for bit 0."""
    return 2.0 * np.asarray(bits) - 1.0


def icurve_value(llr, bits, s: float) -> float:
    """I(s) = 1 - E{log2(1 + exp(-sgn(b) * l * s))} over one record set."""
    if s <= 0:
        raise ValueError("scaling argument s must be positive")
    llr = np.asarray(llr, dtype=np.float64)
    if llr.size == 0:
        raise ValueError("empty record set")
    a = bipolar(bits) * llr * s
    return 1.0 - float(np.mean(np.logaddexp(0.0, -a))) / _LN2


def icurve_eval(records: LlrRecords, s: float, bit_source: str = "true") -> dict:
    """Per-bit-channel I(s) values, keyed by bit-channel class."""
    bits = records.bits(bit_source)
    out = {}
    for k in records.classes():
        mask = records.bit_class == k
        out[int(k)] = icurve_value(records.llr[mask], bits[mask], s)
    return out


@dataclass
class ICurve:
    """Sampled s -> I(s) plus its critical point."""

    owner: object                 # bit-channel class index or "total"
    s_grid: np.ndarray
    values: np.ndarray
    s_star: float
    i_star: float

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("s,i\n")
            for s, v in zip(self.s_grid, self.values):
                f.write(f"{s:.8g},{v:.8g}\n")
            f.write(f"# critical_point,{self.s_star:.8g},{self.i_star:.8g}\n")


def critical_point(records: LlrRecords, bit_source: str = "true",
                   params: SearchParams = SearchParams()) -> dict:
    """Per-class (s*, I(s*)), multiplicative search refined by golden section."""
    bits = records.bits(bit_source)
    out = {}
    for k in records.classes():
        mask = records.bit_class == k
        llr, b = records.llr[mask], bits[mask]
        out[int(k)] = maximize(lambda s: icurve_value(llr, b, s), params)
    return out


def channel_curve(records: LlrRecords, owner, bit_source: str = "true",
                  s_grid=None) -> ICurve:
    s_grid = DEFAULT_S_GRID if s_grid is None else np.asarray(s_grid)
    bits = records.bits(bit_source)
    values = np.array([icurve_value(records.llr, bits, s) for s in s_grid])
    s_star, i_star = maximize(lambda s: icurve_value(records.llr, bits, s))
    return ICurve(owner=owner, s_grid=s_grid, values=values, s_star=s_star, i_star=i_star)


@dataclass
class TotalGmi:
    total: ICurve             # sum of per-class curves, 2 bit positions per class
    per_class: dict           # class -> ICurve
    gmi: float                # max_s of the total curve
    sum_channel_gmi: float    # sum of per-class maxima (upper-bounds gmi)


def total_gmi(records: LlrRecords, bit_source: str = "true", s_grid=None,
              bits_per_class: int = 2) -> TotalGmi:
    """Total I-curve over a shared s grid plus both GMI summaries (the total
    maximum never exceeds the sum of per-channel maxima)."""
    s_grid = DEFAULT_S_GRID if s_grid is None else np.asarray(s_grid)
    classes = records.classes()
    per_class = {}
    parts = {}
    for k in classes:
        sub = records.for_class(int(k))
        per_class[int(k)] = channel_curve(sub, int(k), bit_source, s_grid)
        bits = sub.bits(bit_source)
        parts[int(k)] = (sub.llr, bits)

    def total_at(s):
        return bits_per_class * sum(icurve_value(l, b, s) for l, b in parts.values())

    values = bits_per_class * np.sum([c.values for c in per_class.values()], axis=0)
    s_star, i_star = maximize(total_at)
    total = ICurve(owner="total", s_grid=s_grid, values=values, s_star=s_star, i_star=i_star)
    sum_channel = bits_per_class * sum(c.i_star for c in per_class.values())
    return TotalGmi(total=total, per_class=per_class, gmi=i_star,
                    sum_channel_gmi=sum_channel)


def capacity_estimate(order: int, channel_kind: str, snr_db: float,
                      n_symbols: int = 200_000, seed=0) -> tuple:
    """Monte Carlo BICM capacity (bits/symbol) with exact-MAP detection and
    perfect CSI, returned as (estimate, standard error).

    Exact-MAP LLRs are consistent, so the total I-curve at s = 1 equals the
    sum of the bit-channel mutual informations.
    """
    const = build_qam(order)
    m = const.bits_per_symbol
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(n_symbols, m)).astype(np.uint8)
    from .constellation import map_bits
    symbols = map_bits(const, bits)
    nv = ch.snr_db_to_noise_var(snr_db)
    real = ch.transmit(symbols, channel_kind, nv, rng)
    llrs = det.map_llr(real.received, real.gains, nv, const)
    a = bipolar(bits) * llrs
    per_symbol = m - np.logaddexp(0.0, -a).sum(axis=1) / _LN2
    return float(per_symbol.mean()), float(per_symbol.std(ddof=1) / np.sqrt(n_symbols))


# ---------------------------------------------------------------------------
# histogram-based offline analysis


@dataclass
class ClassHistogram:
    edges: np.ndarray
    counts_b1: np.ndarray     # raw counts, LLRs with true bit 1
    counts_b0: np.ndarray
    smoothing: float

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def conditional_pdfs(self):
        p1 = self.counts_b1 + self.smoothing
        p0 = self.counts_b0 + self.smoothing
        return p1 / p1.sum(), p0 / p0.sum()


def build_histograms(records: LlrRecords, bins: int = HIST_BINS,
                     hist_range=HIST_RANGE, smoothing: float = HIST_SMOOTHING) -> dict:
    """Per-class conditional LLR histograms p_L(l|b=1), p_L(l|b=0) (genie bits)."""
    bits = records.bits("true")
    out = {}
    for k in records.classes():
        mask = records.bit_class == k
        llr, b = records.llr[mask], bits[mask]
        if not (np.any(b == 1) and np.any(b == 0)):
            raise ValueError(f"bit channel {k}: one conditional class is empty")
        c1, edges = np.histogram(llr[b == 1], bins=bins, range=hist_range)
        c0, _ = np.histogram(llr[b == 0], bins=bins, range=hist_range)
        out[int(k)] = ClassHistogram(edges=edges, counts_b1=c1.astype(np.int64),
                                     counts_b0=c0.astype(np.int64), smoothing=smoothing)
    return out


def _per_bin_scaling(hist: ClassHistogram, min_count: int = MIN_BIN_COUNT):
    """s(l) = ln(p(l|1)/p(l|0)) / l at bin centers.

    Bins with fewer than min_count samples in either conditional are masked
    out; the bin containing l = 0 is interpolated from its valid neighbors.
    """
    centers = hist.centers
    p1, p0 = hist.conditional_pdfs()
    valid = (hist.counts_b1 >= min_count) & (hist.counts_b0 >= min_count)
    log_ratio = np.log(p1) - np.log(p0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = log_ratio / centers
    zero_bin = np.abs(centers) < 0.5 * (centers[1] - centers[0])
    interp_src = valid & ~zero_bin
    if not np.any(interp_src):
        raise ValueError("no populated histogram bins")
    if np.any(zero_bin & valid):
        s[zero_bin] = np.interp(centers[zero_bin], centers[interp_src], s[interp_src])
    return centers, s, valid


@dataclass
class ScalingLut:
    """Piecewise-linear approximation of s(l): s_hat(l) = a_k * l + c_k on
    [breakpoints[k], breakpoints[k+1]).

    Out-of-range l is clamped to the fitted range before evaluation, so the
    boundary segment's value is held constant instead of extrapolating its
    slope (extrapolation can turn the factor negative)."""

    breakpoints: np.ndarray   # (segments + 1,)
    coef_a: np.ndarray        # (segments,)
    coef_c: np.ndarray

    def factors(self, llr) -> np.ndarray:
        llr = np.clip(np.asarray(llr, dtype=np.float64),
                      self.breakpoints[0], self.breakpoints[-1])
        idx = np.clip(np.searchsorted(self.breakpoints, llr, side="right") - 1,
                      0, self.coef_a.size - 1)
        return self.coef_a[idx] * llr + self.coef_c[idx]

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("breakpoint,a,c\n")
            for k in range(self.coef_a.size):
                f.write(f"{self.breakpoints[k]:.8g},{self.coef_a[k]:.8g},{self.coef_c[k]:.8g}\n")
            f.write(f"{self.breakpoints[-1]:.8g},,\n")


def build_lut(hist: ClassHistogram, segments: int = LUT_SEGMENTS) -> ScalingLut:
    """Least-squares piecewise-linear fit of the per-bin scaling function."""
    centers, s, valid = _per_bin_scaling(hist)
    l_pts, s_pts = centers[valid], s[valid]
    if l_pts.size < 2:
        raise ValueError("not enough populated bins to fit a LUT")
    breakpoints = np.linspace(l_pts.min(), l_pts.max(), segments + 1)
    coef_a = np.zeros(segments)
    coef_c = np.zeros(segments)
    fitted = np.zeros(segments, dtype=bool)
    for k in range(segments):
        lo, hi = breakpoints[k], breakpoints[k + 1]
        in_seg = (l_pts >= lo) & (l_pts <= hi if k == segments - 1 else l_pts < hi)
        if in_seg.sum() >= 2:
            coef_a[k], coef_c[k] = np.polyfit(l_pts[in_seg], s_pts[in_seg], 1)
            fitted[k] = True
        elif in_seg.sum() == 1:
            coef_a[k], coef_c[k] = 0.0, float(s_pts[in_seg][0])
            fitted[k] = True
    if not fitted.all():
        good = np.flatnonzero(fitted)
        if good.size == 0:
            raise ValueError("no segment could be fitted")
        for k in np.flatnonzero(~fitted):
            src = good[np.argmin(np.abs(good - k))]
            coef_a[k], coef_c[k] = coef_a[src], coef_c[src]
    return ScalingLut(breakpoints=breakpoints, coef_a=coef_a, coef_c=coef_c)


def consistency_mean(records: LlrRecords, pooled: bool = False) -> dict | float:
    """Mean scaling factor s' = E_L{s(l)}, weighted by the marginal
    bin occupancy of L; pooled=True averages over all classes together."""
    if pooled:
        merged = records.select(np.ones(len(records), dtype=bool))
        merged.bit_class = np.zeros(len(records), dtype=np.int16)
        return consistency_mean(merged)[0]
    out = {}
    for k, hist in build_histograms(records).items():
        centers, s, valid = _per_bin_scaling(hist)
        weights = (hist.counts_b1 + hist.counts_b0).astype(np.float64)
        weights[~valid] = 0.0
        if weights.sum() == 0:
            raise ValueError(f"bit channel {k}: no populated bins")
        out[k] = float(np.sum(weights * np.where(valid, s, 0.0)) / weights.sum())
    return out


# ---------------------------------------------------------------------------
# scaling schemes


@dataclass
class IdentityScaling:
    def factors_for(self, llr, bit_class):
        return np.ones_like(np.asarray(llr, dtype=np.float64))

    def covered(self, classes):
        return True


@dataclass
class UniformScaling:
    factors: dict              # class -> s

    def factors_for(self, llr, bit_class):
        return np.array([self.factors[int(k)] for k in np.atleast_1d(bit_class)])

    def covered(self, classes):
        return all(int(k) in self.factors for k in classes)


@dataclass
class TwoLevelScaling:
    factors: dict              # class -> (s_plus, s_minus)

    def factors_for(self, llr, bit_class):
        llr = np.asarray(llr, dtype=np.float64)
        sp = np.array([self.factors[int(k)][0] for k in np.atleast_1d(bit_class)])
        sm = np.array([self.factors[int(k)][1] for k in np.atleast_1d(bit_class)])
        return np.where(llr > 0, sp, np.where(llr < 0, sm, 1.0))

    def covered(self, classes):
        return all(int(k) in self.factors for k in classes)


@dataclass
class LutScaling:
    luts: dict                 # class -> ScalingLut

    def factors_for(self, llr, bit_class):
        llr = np.asarray(llr, dtype=np.float64)
        bit_class = np.atleast_1d(bit_class)
        out = np.empty(llr.size)
        for k in np.unique(bit_class):
            mask = bit_class == k
            out[mask] = self.luts[int(k)].factors(llr[mask])
        return out

    def covered(self, classes):
        return all(int(k) in self.luts for k in classes)


def apply_scaling(records: LlrRecords, scheme) -> LlrRecords:
    """Scale record LLRs per scheme; clipping is re-applied at +/- LLR_CLIP."""
    if not scheme.covered(records.classes()):
        raise ValueError("scaling scheme does not cover every bit channel present")
    factors = scheme.factors_for(records.llr, records.bit_class)
    return records.with_llr(records.llr * factors)
