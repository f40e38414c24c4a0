"""Gray-mapped square QAM constellations and their bit-channel decomposition."""

from dataclasses import dataclass, field

import numpy as np

SUPPORTED_ORDERS = (4, 16, 64)


def _gray_labels(n_levels: int) -> np.ndarray:
    """Binary-reflected Gray labels for amplitude indices 0..n_levels-1, MSB first."""
    width = int(np.log2(n_levels))
    idx = np.arange(n_levels)
    gray = idx ^ (idx >> 1)
    bits = (gray[:, None] >> np.arange(width - 1, -1, -1)) & 1
    return bits.astype(np.uint8)


@dataclass(frozen=True)
class Constellation:
    """Unit-energy square QAM with per-dimension binary-reflected Gray labeling.

    Bits 0..m/2-1 label the in-phase amplitude, bits m/2..m-1 the quadrature
    amplitude, each MSB first; the all-zeros label sits at the most negative
    corner of the I/Q plane.
    """

    order: int
    bits_per_symbol: int
    points: np.ndarray              # (M,) complex128
    labels: np.ndarray              # (M, m) uint8
    levels: np.ndarray              # (sqrt(M),) ascending per-dimension amplitudes
    level_labels: np.ndarray        # (sqrt(M), m/2) per-dimension Gray labels
    _label_to_index: np.ndarray = field(repr=False, default=None)

    @property
    def n_classes(self) -> int:
        """Number of distinct bit channels (I/Q-paired classes)."""
        return self.bits_per_symbol // 2

    def bit_class(self, i: int) -> int:
        """Class of bit position i: I-axis bit j pairs with Q-axis bit j + m/2."""
        half = self.bits_per_symbol // 2
        if not 0 <= i < self.bits_per_symbol:
            raise ValueError(f"bit position {i} out of range")
        return i if i < half else i - half


def build_qam(order: int) -> Constellation:
    """Build a unit-energy Gray-labeled square QAM constellation."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}; expected one of {SUPPORTED_ORDERS}")
    m = int(np.log2(order))
    n_levels = 1 << (m // 2)

    # PAM levels -(n-1), ..., (n-1), normalized so the 2-D symbol energy is 1
    scale = np.sqrt(3.0 / (2.0 * (order - 1)))
    levels = scale * (2.0 * np.arange(n_levels) - (n_levels - 1))
    level_labels = _gray_labels(n_levels)

    points = np.empty(order, dtype=np.complex128)
    labels = np.empty((order, m), dtype=np.uint8)
    for ki in range(n_levels):
        for kq in range(n_levels):
            p = ki * n_levels + kq
            points[p] = levels[ki] + 1j * levels[kq]
            labels[p, : m // 2] = level_labels[ki]
            labels[p, m // 2 :] = level_labels[kq]

    weights = 1 << np.arange(m - 1, -1, -1)
    label_to_index = np.empty(order, dtype=np.int64)
    label_to_index[labels @ weights] = np.arange(order)

    return Constellation(
        order=order,
        bits_per_symbol=m,
        points=points,
        labels=labels,
        levels=levels,
        level_labels=level_labels,
        _label_to_index=label_to_index,
    )


def map_bits(c: Constellation, bits) -> complex | np.ndarray:
    """Map bit vectors of length m (or an (N, m) array) to constellation points."""
    bits = np.asarray(bits)
    if bits.shape[-1] != c.bits_per_symbol:
        raise ValueError(
            f"expected {c.bits_per_symbol} bits per symbol, got {bits.shape[-1]}"
        )
    weights = 1 << np.arange(c.bits_per_symbol - 1, -1, -1)
    idx = c._label_to_index[bits @ weights]
    out = c.points[idx]
    return out if bits.ndim > 1 else complex(out)


def subset(c: Constellation, i: int, b: int) -> np.ndarray:
    """Points whose label has bit value b at position i (the set chi_b^i)."""
    if not 0 <= i < c.bits_per_symbol:
        raise ValueError(f"bit position {i} out of range")
    if b not in (0, 1):
        raise ValueError("bit value must be 0 or 1")
    return c.points[c.labels[:, i] == b]
