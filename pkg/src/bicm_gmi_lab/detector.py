"""Soft demappers: exact MAP (log-sum-exp) and max-log, plus the LLR record store.

LLR sign convention: positive LLR favors bit value 1,
llr = ln p(b=1|y) - ln p(b=0|y).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .constellation import Constellation

LLR_CLIP = 30.0
_CHUNK = 1 << 17


@dataclass
class LlrRecords:
    """Column store of detector outputs, one entry per (symbol, bit position).

    bit_class is the distinct bit-channel index (I/Q pair class, m/2 classes);
    true_bit / decided_bit use -1 when absent.
    """

    llr: np.ndarray
    bit_class: np.ndarray
    true_bit: np.ndarray
    decided_bit: np.ndarray
    frame: np.ndarray
    pos: np.ndarray

    def __len__(self):
        return self.llr.size

    def bits(self, source: str) -> np.ndarray:
        if source == "true":
            b = self.true_bit
        elif source == "decided":
            b = self.decided_bit
        else:
            raise ValueError(f"unknown bit source {source!r}")
        if np.any(b < 0):
            raise ValueError(f"{source} bits missing from records")
        return b

    def for_class(self, k: int) -> "LlrRecords":
        return self.select(self.bit_class == k)

    def select(self, mask) -> "LlrRecords":
        return LlrRecords(
            llr=self.llr[mask],
            bit_class=self.bit_class[mask],
            true_bit=self.true_bit[mask],
            decided_bit=self.decided_bit[mask],
            frame=self.frame[mask],
            pos=self.pos[mask],
        )

    def classes(self) -> np.ndarray:
        return np.unique(self.bit_class)

    def with_llr(self, llr: np.ndarray) -> "LlrRecords":
        out = LlrRecords(
            llr=np.clip(llr, -LLR_CLIP, LLR_CLIP),
            bit_class=self.bit_class,
            true_bit=self.true_bit,
            decided_bit=self.decided_bit,
            frame=self.frame,
            pos=self.pos,
        )
        return out


def make_records(llr_matrix, constellation, true_bits=None, decided_bits=None, frame=0):
    """Flatten an (N, m) LLR matrix into records with bit-class tags."""
    llr_matrix = np.asarray(llr_matrix, dtype=np.float64)
    n, m = llr_matrix.shape
    classes = np.array([constellation.bit_class(i) for i in range(m)], dtype=np.int16)

    def _flat_bits(b):
        if b is None:
            return np.full(n * m, -1, dtype=np.int8)
        return np.asarray(b, dtype=np.int8).reshape(n * m)

    return LlrRecords(
        llr=llr_matrix.reshape(n * m),
        bit_class=np.tile(classes, n),
        true_bit=_flat_bits(true_bits),
        decided_bit=_flat_bits(decided_bits),
        frame=np.full(n * m, frame, dtype=np.int64),
        pos=np.repeat(np.arange(n, dtype=np.int64), m),
    )


def concat_records(parts) -> LlrRecords:
    return LlrRecords(*(np.concatenate([getattr(p, f) for p in parts])
                        for f in ("llr", "bit_class", "true_bit", "decided_bit", "frame", "pos")))


def dump_csv(records: LlrRecords, path):
    """Stable dump format: one record per line, frame,pos,bit_channel,llr,true_bit."""
    with open(path, "w") as f:
        f.write("frame,pos,bit_channel,llr,true_bit\n")
        for fr, p, bc, l, tb in zip(records.frame, records.pos, records.bit_class,
                                    records.llr, records.true_bit):
            f.write(f"{fr},{p},{bc},{l:.10g},{tb}\n")


def load_csv(path) -> LlrRecords:
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    return LlrRecords(
        llr=data["llr"].astype(np.float64),
        bit_class=data["bit_channel"].astype(np.int16),
        true_bit=data["true_bit"].astype(np.int8),
        decided_bit=np.full(data.size, -1, dtype=np.int8),
        frame=data["frame"].astype(np.int64),
        pos=data["pos"].astype(np.int64),
    )


def _per_dim_llrs(y_dim, nv_eff, c: Constellation, maxlog: bool):
    """LLRs for the bits of one dimension; y_dim real, nv_eff per-symbol variance."""
    # exponent is -(y - a)^2 / nv_eff, per-dimension slice of the 2-D metric
    d2 = (y_dim[:, None] - c.levels[None, :]) ** 2 / nv_eff[:, None]
    half = c.bits_per_symbol // 2
    out = np.empty((y_dim.size, half))
    for j in range(half):
        m1 = c.level_labels[:, j] == 1
        if maxlog:
            out[:, j] = d2[:, ~m1].min(axis=1) - d2[:, m1].min(axis=1)
        else:
            out[:, j] = logsumexp(-d2[:, m1], axis=1) - logsumexp(-d2[:, ~m1], axis=1)
    return out


def _demap(y, h_hat, noise_var_hat, c, maxlog):
    if noise_var_hat <= 0:
        raise ValueError("estimated noise variance must be positive")
    y = np.asarray(y, dtype=np.complex128)
    h_hat = np.broadcast_to(np.asarray(h_hat, dtype=np.complex128), y.shape)
    half = c.bits_per_symbol // 2
    llrs = np.empty((y.size, c.bits_per_symbol))
    for lo in range(0, y.size, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, y.size))
        h = h_hat[sl]
        mag2 = np.abs(h) ** 2
        y_mf = np.conj(h) * y[sl] / mag2          # matched-filter normalization
        nv_eff = noise_var_hat / mag2
        llrs[sl, :half] = _per_dim_llrs(y_mf.real, nv_eff, c, maxlog)
        llrs[sl, half:] = _per_dim_llrs(y_mf.imag, nv_eff, c, maxlog)
    return np.clip(llrs, -LLR_CLIP, LLR_CLIP)


def map_llr(y, h_hat, noise_var_hat, c: Constellation) -> np.ndarray:
    """Exact MAP bit LLRs, (N, m); uniform priors."""
    return _demap(y, h_hat, noise_var_hat, c, maxlog=False)


def maxlog_llr(y, h_hat, noise_var_hat, c: Constellation) -> np.ndarray:
    """Max-log bit LLRs, (N, m)."""
    return _demap(y, h_hat, noise_var_hat, c, maxlog=True)


def demap(y, h_hat, noise_var_hat, c: Constellation, kind: str = "map") -> np.ndarray:
    if kind == "map":
        return map_llr(y, h_hat, noise_var_hat, c)
    if kind == "maxlog":
        return maxlog_llr(y, h_hat, noise_var_hat, c)
    raise ValueError(f"unknown demapper kind {kind!r}")
