import numpy as np
import pytest
from scipy.special import logsumexp

from bicm_gmi_lab import channel as ch
from bicm_gmi_lab import detector as det
from bicm_gmi_lab.constellation import build_qam, map_bits


def _brute_force(y, h_hat, nv_hat, c, maxlog):
    """Direct 2-D summation over the label subsets, no factorization."""
    metric = -np.abs(y[:, None] - h_hat[:, None] * c.points[None, :]) ** 2 / nv_hat
    llrs = np.empty((y.size, c.bits_per_symbol))
    for i in range(c.bits_per_symbol):
        m1 = c.labels[:, i] == 1
        if maxlog:
            llrs[:, i] = metric[:, m1].max(axis=1) - metric[:, ~m1].max(axis=1)
        else:
            llrs[:, i] = logsumexp(metric[:, m1], axis=1) - logsumexp(metric[:, ~m1], axis=1)
    return np.clip(llrs, -det.LLR_CLIP, det.LLR_CLIP)


@pytest.mark.parametrize("order", [4, 16, 64])
@pytest.mark.parametrize("kind", ["map", "maxlog"])
def test_demap_matches_brute_force(order, kind):
    c = build_qam(order)
    rng = np.random.default_rng(order)
    n = 10_000
    bits = rng.integers(0, 2, size=(n, c.bits_per_symbol)).astype(np.uint8)
    x = map_bits(c, bits)
    real = ch.transmit(x, "rayleigh", ch.snr_db_to_noise_var(8.0), seed=1)
    got = det.demap(real.received, real.gains, real.noise_var, c, kind)
    want = _brute_force(real.received, real.gains, real.noise_var, c, kind == "maxlog")
    assert np.max(np.abs(got - want)) < 1e-9


def test_phase_compensation():
    # a pure channel phase rotation must not change the LLRs
    c = build_qam(16)
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, size=(2000, 4)).astype(np.uint8)
    x = map_bits(c, bits)
    nv = 0.1
    noise = np.sqrt(nv / 2) * (rng.standard_normal(2000) + 1j * rng.standard_normal(2000))
    h = np.exp(1j * rng.uniform(0, 2 * np.pi, 2000))
    base = det.map_llr(x + noise, np.ones(2000), nv, c)
    rotated = det.map_llr(h * (x + noise), h, nv, c)
    assert np.max(np.abs(base - rotated)) < 1e-10


def test_llr_sign_agrees_with_true_bit_at_high_snr():
    c = build_qam(64)
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, size=(20_000, 6)).astype(np.uint8)
    x = map_bits(c, bits)
    real = ch.transmit(x, "awgn", ch.snr_db_to_noise_var(25.0), seed=2)
    llrs = det.maxlog_llr(real.received, real.gains, real.noise_var, c)
    agree = np.mean((llrs > 0) == (bits == 1))
    assert agree > 0.99


def test_clipping():
    c = build_qam(4)
    llrs = det.map_llr(np.array([10 + 10j]), np.ones(1), 1e-4, c)
    assert np.max(np.abs(llrs)) <= det.LLR_CLIP


def test_make_records_layout():
    c = build_qam(64)
    llr = np.arange(12, dtype=float).reshape(2, 6)
    bits = np.zeros((2, 6), dtype=np.uint8)
    rec = det.make_records(llr, c, true_bits=bits, frame=3)
    assert len(rec) == 12
    assert np.array_equal(rec.bit_class[:6], [0, 1, 2, 0, 1, 2])
    assert np.array_equal(rec.pos, [0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1])
    assert np.all(rec.frame == 3)
    assert np.all(rec.decided_bit == -1)
    with pytest.raises(ValueError):
        rec.bits("decided")


def test_records_select_and_concat():
    c = build_qam(16)
    rng = np.random.default_rng(0)
    a = det.make_records(rng.normal(size=(10, 4)), c,
                         true_bits=rng.integers(0, 2, (10, 4)), frame=0)
    b = det.make_records(rng.normal(size=(5, 4)), c,
                         true_bits=rng.integers(0, 2, (5, 4)), frame=1)
    both = det.concat_records([a, b])
    assert len(both) == 60
    sub = both.for_class(1)
    assert np.all(sub.bit_class == 1)
    assert len(sub) == 30


def test_csv_round_trip(tmp_path):
    c = build_qam(16)
    rng = np.random.default_rng(9)
    rec = det.make_records(rng.normal(size=(50, 4)), c,
                           true_bits=rng.integers(0, 2, (50, 4)), frame=2)
    path = tmp_path / "dump.csv"
    det.dump_csv(rec, path)
    back = det.load_csv(path)
    assert np.allclose(back.llr, rec.llr)
    assert np.array_equal(back.bit_class, rec.bit_class)
    assert np.array_equal(back.true_bit, rec.true_bit)
    assert np.array_equal(back.frame, rec.frame)
    assert np.array_equal(back.pos, rec.pos)


def test_exact_map_llrs_are_consistent():
    # histogram check of ln(p(l|1)/p(l|0)) = l on exact-MAP output
    c = build_qam(16)
    rng = np.random.default_rng(11)
    n = 400_000
    bits = rng.integers(0, 2, size=(n, 4)).astype(np.uint8)
    x = map_bits(c, bits)
    real = ch.transmit(x, "awgn", ch.snr_db_to_noise_var(6.0), seed=3)
    llrs = det.map_llr(real.received, real.gains, real.noise_var, c)
    l = llrs.reshape(-1)
    b = bits.reshape(-1)
    edges = np.linspace(-8, 8, 33)
    c1, _ = np.histogram(l[b == 1], bins=edges)
    c0, _ = np.histogram(l[b == 0], bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    ok = (c1 > 500) & (c0 > 500)
    ratio = np.log(c1[ok] / c0[ok])
    assert np.max(np.abs(ratio - centers[ok])) < 0.15


def test_demap_validation():
    c = build_qam(4)
    with pytest.raises(ValueError):
        det.demap(np.ones(2), np.ones(2), 0.0, c)
    with pytest.raises(ValueError):
        det.demap(np.ones(2), np.ones(2), 0.1, c, kind="zf")
