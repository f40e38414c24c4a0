import numpy as np
import pytest

from bicm_gmi_lab.constellation import build_qam, map_bits, subset


@pytest.mark.parametrize("order", [4, 16, 64])
def test_unit_energy(order):
    c = build_qam(order)
    assert np.isclose(np.mean(np.abs(c.points) ** 2), 1.0)


@pytest.mark.parametrize("order", [4, 16, 64])
def test_labels_are_a_bijection(order):
    c = build_qam(order)
    m = c.bits_per_symbol
    weights = 1 << np.arange(m - 1, -1, -1)
    ints = c.labels @ weights
    assert sorted(ints.tolist()) == list(range(order))


@pytest.mark.parametrize("order", [16, 64])
def test_gray_property_per_dimension(order):
    # adjacent amplitude levels differ in exactly one label bit
    c = build_qam(order)
    diffs = np.count_nonzero(np.diff(c.level_labels.astype(int), axis=0), axis=1)
    assert np.all(diffs == 1)


def test_all_zeros_at_most_negative_corner():
    c = build_qam(64)
    p = map_bits(c, np.zeros(6, dtype=np.uint8))
    assert p.real == pytest.approx(c.levels[0])
    assert p.imag == pytest.approx(c.levels[0])


def test_bit_classes_pair_i_and_q():
    c = build_qam(64)
    assert c.n_classes == 3
    assert [c.bit_class(i) for i in range(6)] == [0, 1, 2, 0, 1, 2]
    with pytest.raises(ValueError):
        c.bit_class(6)


def test_map_bits_round_trip():
    c = build_qam(16)
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=(500, 4)).astype(np.uint8)
    pts = map_bits(c, bits)
    # recover the label from the point, bit by bit
    idx = np.array([np.argmin(np.abs(c.points - p)) for p in pts])
    assert np.array_equal(c.labels[idx], bits)


def test_subset_partitions_constellation():
    c = build_qam(16)
    for i in range(4):
        s0, s1 = subset(c, i, 0), subset(c, i, 1)
        assert s0.size == s1.size == 8
        assert len(np.union1d(s0, s1)) == 16


def test_unsupported_order():
    with pytest.raises(ValueError):
        build_qam(32)
