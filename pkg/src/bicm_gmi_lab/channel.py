"""Memoryless baseband channels (AWGN, fast flat Rayleigh) and receiver mismatch."""

from dataclasses import dataclass

import numpy as np

CHANNEL_KINDS = ("awgn", "rayleigh")


@dataclass(frozen=True)
class ChannelRealization:
    gains: np.ndarray        # per-symbol complex gain h_n
    noise_var: float         # true complex noise variance (both dimensions total)
    received: np.ndarray     # y_n = h_n * x_n + w_n


@dataclass(frozen=True)
class MismatchModel:
    """Parametric receiver imperfection: biased noise estimate, perturbed CSI."""

    noise_var_bias: float = 1.0   # receiver assumes rho * sigma^2
    csi_error_var: float = 0.0    # h_hat = h + e, Var(e) = eps

    def __post_init__(self):
        if self.noise_var_bias < 0:
            raise ValueError("noise_var_bias must be >= 0")
        if self.csi_error_var < 0:
            raise ValueError("csi_error_var must be >= 0")


def snr_db_to_noise_var(snr_db: float) -> float:
    """Complex noise variance for a given SNR in dB at unit symbol energy."""
    return 10.0 ** (-snr_db / 10.0)


def noise_var_to_snr_db(noise_var: float) -> float:
    return -10.0 * np.log10(noise_var)


def _complex_normal(rng, n, var):
    s = np.sqrt(var / 2.0)
    return s * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def transmit(symbols, kind: str, noise_var: float, seed) -> ChannelRealization:
    """Pass symbols through the channel; deterministic given the seed.

    seed may be anything np.random.default_rng accepts (int, SeedSequence,
    Generator), so callers can derive per-frame streams.
    """
    if noise_var <= 0:
        raise ValueError("noise variance must be positive")
    if kind not in CHANNEL_KINDS:
        raise ValueError(f"unknown channel kind {kind!r}")
    symbols = np.asarray(symbols, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    n = symbols.size
    if kind == "awgn":
        gains = np.ones(n, dtype=np.complex128)
    else:
        gains = _complex_normal(rng, n, 1.0)
    noise = _complex_normal(rng, n, noise_var)
    return ChannelRealization(gains=gains, noise_var=noise_var, received=gains * symbols + noise)


def receiver_view(real: ChannelRealization, mm: MismatchModel, seed):
    """Receiver-side channel knowledge: (h_hat, noise_var_hat)."""
    nv_hat = mm.noise_var_bias * real.noise_var
    if mm.csi_error_var == 0.0:
        return real.gains.copy(), nv_hat
    rng = np.random.default_rng(seed)
    err = _complex_normal(rng, real.gains.size, mm.csi_error_var)
    return real.gains + err, nv_hat
