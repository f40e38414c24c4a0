import numpy as np
import pytest

from bicm_gmi_lab import channel as ch


def test_snr_noise_var_round_trip():
    for snr in (-3.0, 0.0, 7.0, 15.0):
        assert ch.noise_var_to_snr_db(ch.snr_db_to_noise_var(snr)) == pytest.approx(snr)
    assert ch.snr_db_to_noise_var(0.0) == pytest.approx(1.0)


def test_awgn_statistics():
    n = 200_000
    nv = 0.25
    real = ch.transmit(np.zeros(n), "awgn", nv, seed=1)
    assert np.all(real.gains == 1.0)
    assert np.mean(np.abs(real.received) ** 2) == pytest.approx(nv, rel=0.02)
    # equal power per real dimension
    assert np.var(real.received.real) == pytest.approx(nv / 2, rel=0.03)
    assert np.var(real.received.imag) == pytest.approx(nv / 2, rel=0.03)


def test_rayleigh_gain_statistics():
    real = ch.transmit(np.ones(200_000), "rayleigh", 1e-6, seed=2)
    assert np.mean(np.abs(real.gains) ** 2) == pytest.approx(1.0, rel=0.02)
    assert np.abs(np.mean(real.gains)) < 0.01


def test_transmit_deterministic_given_seed():
    x = np.ones(64)
    a = ch.transmit(x, "rayleigh", 0.1, seed=7)
    b = ch.transmit(x, "rayleigh", 0.1, seed=7)
    assert np.array_equal(a.received, b.received)
    assert np.array_equal(a.gains, b.gains)


def test_receiver_view_perfect_csi():
    real = ch.transmit(np.ones(16), "rayleigh", 0.1, seed=3)
    mm = ch.MismatchModel()
    h_hat, nv_hat = ch.receiver_view(real, mm, seed=4)
    assert np.array_equal(h_hat, real.gains)
    assert nv_hat == pytest.approx(0.1)


def test_receiver_view_mismatch():
    real = ch.transmit(np.ones(100_000), "rayleigh", 0.2, seed=5)
    mm = ch.MismatchModel(noise_var_bias=1.25, csi_error_var=0.01)
    h_hat, nv_hat = ch.receiver_view(real, mm, seed=6)
    assert nv_hat == pytest.approx(0.25)
    err = h_hat - real.gains
    assert np.mean(np.abs(err) ** 2) == pytest.approx(0.01, rel=0.05)


def test_validation():
    with pytest.raises(ValueError):
        ch.transmit(np.ones(4), "awgn", -1.0, seed=0)
    with pytest.raises(ValueError):
        ch.transmit(np.ones(4), "rician", 0.1, seed=0)
    with pytest.raises(ValueError):
        ch.MismatchModel(noise_var_bias=-0.1)
    with pytest.raises(ValueError):
        ch.MismatchModel(csi_error_var=-1.0)
