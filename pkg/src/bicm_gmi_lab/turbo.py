"""Rate-1/3 parallel-concatenated turbo codec with LogMAP / scaled max-LogMAP decoding.

Constituent code: 8-state RSC, feedback 13 (octal), feedforward 15 (octal),
both encoders trellis-terminated with 3 tail bit pairs (12 tail bits total).
The interleaver is a seeded pseudorandom permutation. Intermediate rates come
from periodic puncturing of the two parity streams.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit

N_STATES = 8
TAIL_BITS = 12

# state = (r1, r2, r3) packed as r1*4 + r2*2 + r3; feedback d = u ^ r2 ^ r3,
# parity = d ^ r1 ^ r3, next state = (d, r1, r2)
def _build_trellis():
    nxt = np.zeros((N_STATES, 2), dtype=np.int64)
    par = np.zeros((N_STATES, 2), dtype=np.int64)
    term = np.zeros(N_STATES, dtype=np.int64)   # input that drives d = 0
    for s in range(N_STATES):
        r1, r2, r3 = (s >> 2) & 1, (s >> 1) & 1, s & 1
        term[s] = r2 ^ r3
        for u in range(2):
            d = u ^ r2 ^ r3
            par[s, u] = d ^ r1 ^ r3
            nxt[s, u] = (d << 2) | (r1 << 1) | r2
    return nxt, par, term


_NEXT, _PARITY, _TERM_INPUT = _build_trellis()

_NEG = -1.0e30

# correction values log(1 + exp(-x)) at cell centers of width 1 over [0, 8)
CORRECTION_TABLE = np.log1p(np.exp(-(np.arange(8) + 0.5)))
_TABLE_STEP = 1.0

KERNEL_LOGMAP_EXACT = 0
KERNEL_MAXLOG = 1
KERNEL_LOGMAP_TABLE = 2


@njit(cache=True, inline="always")
def _maxstar(a, b, mode, table, step):
    if a < b:
        a, b = b, a
    if b <= _NEG / 2:
        return a
    if mode == 1:
        return a
    d = a - b
    if mode == 0:
        return a + np.log1p(np.exp(-d))
    idx = int(d / step)
    if idx >= table.shape[0]:
        return a
    return a + table[idx]


@njit(cache=True)
def _rsc_encode(u, nxt, par, term_input):
    k = u.shape[0]
    parity = np.empty(k, dtype=np.uint8)
    s = 0
    for t in range(k):
        parity[t] = par[s, u[t]]
        s = nxt[s, u[t]]
    tail_sys = np.empty(3, dtype=np.uint8)
    tail_par = np.empty(3, dtype=np.uint8)
    for t in range(3):
        ut = term_input[s]
        tail_sys[t] = ut
        tail_par[t] = par[s, ut]
        s = nxt[s, ut]
    return parity, tail_sys, tail_par


@njit(cache=True)
def _bcjr(l_sys, l_par, l_apr, nxt, par, mode, table, step):
    """Posterior info-bit LLRs for one terminated constituent code."""
    t_len = l_sys.shape[0]
    alpha = np.full((t_len + 1, N_STATES), _NEG)
    alpha[0, 0] = 0.0
    for t in range(t_len):
        hs = 0.5 * (l_sys[t] + l_apr[t])
        hp = 0.5 * l_par[t]
        for s in range(N_STATES):
            a = alpha[t, s]
            if a <= _NEG / 2:
                continue
            for u in range(2):
                g = (hs if u == 1 else -hs) + (hp if par[s, u] == 1 else -hp)
                ns = nxt[s, u]
                alpha[t + 1, ns] = _maxstar(alpha[t + 1, ns], a + g, mode, table, step)
        mx = alpha[t + 1, 0]
        for s in range(1, N_STATES):
            if alpha[t + 1, s] > mx:
                mx = alpha[t + 1, s]
        for s in range(N_STATES):
            alpha[t + 1, s] -= mx

    beta = np.full((t_len + 1, N_STATES), _NEG)
    beta[t_len, 0] = 0.0
    for t in range(t_len - 1, -1, -1):
        hs = 0.5 * (l_sys[t] + l_apr[t])
        hp = 0.5 * l_par[t]
        for s in range(N_STATES):
            acc = _NEG
            for u in range(2):
                b = beta[t + 1, nxt[s, u]]
                if b <= _NEG / 2:
                    continue
                g = (hs if u == 1 else -hs) + (hp if par[s, u] == 1 else -hp)
                acc = _maxstar(acc, b + g, mode, table, step)
            beta[t, s] = acc
        mx = beta[t, 0]
        for s in range(1, N_STATES):
            if beta[t, s] > mx:
                mx = beta[t, s]
        for s in range(N_STATES):
            beta[t, s] -= mx

    post = np.empty(t_len)
    post_par = np.empty(t_len)
    for t in range(t_len):
        hs = 0.5 * (l_sys[t] + l_apr[t])
        hp = 0.5 * l_par[t]
        num = _NEG
        den = _NEG
        num_p = _NEG
        den_p = _NEG
        for s in range(N_STATES):
            a = alpha[t, s]
            if a <= _NEG / 2:
                continue
            for u in range(2):
                b = beta[t + 1, nxt[s, u]]
                if b <= _NEG / 2:
                    continue
                g = (hs if u == 1 else -hs) + (hp if par[s, u] == 1 else -hp)
                v = a + g + b
                if u == 1:
                    num = _maxstar(num, v, mode, table, step)
                else:
                    den = _maxstar(den, v, mode, table, step)
                if par[s, u] == 1:
                    num_p = _maxstar(num_p, v, mode, table, step)
                else:
                    den_p = _maxstar(den_p, v, mode, table, step)
        post[t] = num - den
        post_par[t] = num_p - den_p
    return post, post_par


@dataclass(frozen=True)
class TurboCode:
    k: int
    interleaver: np.ndarray
    keep_p1: np.ndarray = None   # boolean masks over the K parity bits
    keep_p2: np.ndarray = None

    def __post_init__(self):
        if sorted(self.interleaver.tolist()) != list(range(self.k)):
            raise ValueError("interleaver must be a permutation of 0..K-1")
        for name in ("keep_p1", "keep_p2"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, np.ones(self.k, dtype=bool))

    @property
    def n_coded(self) -> int:
        return self.k + int(self.keep_p1.sum()) + int(self.keep_p2.sum()) + TAIL_BITS

    @property
    def rate(self) -> float:
        return self.k / self.n_coded


def make_code(k: int, seed: int = 0, puncture_pattern=None) -> TurboCode:
    """Seeded-interleaver turbo code; puncture_pattern is a periodic keep mask
    applied to both parity streams (None keeps everything, rate 1/3)."""
    perm = np.random.default_rng(seed).permutation(k)
    if puncture_pattern is None:
        keep = np.ones(k, dtype=bool)
    else:
        pat = np.asarray(puncture_pattern, dtype=bool)
        keep = np.tile(pat, k // pat.size + 1)[:k]
    return TurboCode(k=k, interleaver=perm, keep_p1=keep.copy(), keep_p2=keep.copy())


@dataclass
class DecodeOutcome:
    hard: np.ndarray          # (K,) info-bit decisions
    posterior: np.ndarray     # (K,) posterior LLRs, natural order
    iterations: int
    algorithm: str


def encode(code: TurboCode, u) -> np.ndarray:
    """Coded bits: systematic, surviving parity1, surviving parity2, 12 tail bits."""
    u = np.asarray(u, dtype=np.uint8)
    if u.size != code.k:
        raise ValueError(f"expected {code.k} info bits, got {u.size}")
    p1, ts1, tp1 = _rsc_encode(u, _NEXT, _PARITY, _TERM_INPUT)
    p2, ts2, tp2 = _rsc_encode(u[code.interleaver], _NEXT, _PARITY, _TERM_INPUT)
    tails = np.empty(TAIL_BITS, dtype=np.uint8)
    tails[0:6:2], tails[1:6:2] = ts1, tp1
    tails[6:12:2], tails[7:12:2] = ts2, tp2
    return np.concatenate([u, p1[code.keep_p1], p2[code.keep_p2], tails])


def _split_llrs(code: TurboCode, llrs):
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.size != code.n_coded:
        raise ValueError(f"expected {code.n_coded} channel LLRs, got {llrs.size}")
    k = code.k
    n1 = int(code.keep_p1.sum())
    n2 = int(code.keep_p2.sum())
    l_sys = llrs[:k]
    l_p1 = np.zeros(k)
    l_p1[code.keep_p1] = llrs[k : k + n1]
    l_p2 = np.zeros(k)
    l_p2[code.keep_p2] = llrs[k + n1 : k + n1 + n2]
    tails = llrs[k + n1 + n2 :]
    sys1 = np.concatenate([l_sys, tails[0:6:2]])
    par1 = np.concatenate([l_p1, tails[1:6:2]])
    sys2 = np.concatenate([l_sys[code.interleaver], tails[6:12:2]])
    par2 = np.concatenate([l_p2, tails[7:12:2]])
    return sys1, par1, sys2, par2


def decode(code: TurboCode, llrs, algorithm: str = "logmap", max_iters: int = 8,
           extrinsic_scale: float = 0.7, logmap_kernel: str = "exact") -> DecodeOutcome:
    """Iterative turbo decoding of channel LLRs (punctured positions as 0 internally).

    algorithm 'logmap' (LM) exchanges unscaled extrinsics with an exact or
    table max-star kernel; 'smlm' is max-LogMAP with extrinsics multiplied by
    extrinsic_scale (0.7 by default).
    """
    if algorithm == "logmap":
        mode = KERNEL_LOGMAP_EXACT if logmap_kernel == "exact" else KERNEL_LOGMAP_TABLE
        scale = 1.0
    elif algorithm == "smlm":
        mode = KERNEL_MAXLOG
        scale = extrinsic_scale
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")

    sys1, par1, sys2, par2 = _split_llrs(code, llrs)
    k = code.k
    la1 = np.zeros(k + 3)
    la2 = np.zeros(k + 3)
    post2 = np.zeros(k + 3)
    for _ in range(max_iters):
        post1, _ = _bcjr(sys1, par1, la1, _NEXT, _PARITY, mode, CORRECTION_TABLE, _TABLE_STEP)
        le1 = scale * (post1[:k] - sys1[:k] - la1[:k])
        la2[:k] = le1[code.interleaver]
        post2, _ = _bcjr(sys2, par2, la2, _NEXT, _PARITY, mode, CORRECTION_TABLE, _TABLE_STEP)
        le2 = scale * (post2[:k] - sys2[:k] - la2[:k])
        la1[:k][code.interleaver] = le2
    posterior = np.empty(k)
    posterior[code.interleaver] = post2[:k]
    return DecodeOutcome(
        hard=(posterior > 0).astype(np.uint8),
        posterior=posterior,
        iterations=max_iters,
        algorithm=algorithm,
    )


def single_iteration_decisions(code: TurboCode, llrs, method: str = "posterior") -> np.ndarray:
    """Decisions for every transmitted coded bit after one S-MLM iteration.

    'posterior' decides each coded bit from the constituent BCJR posteriors
    (systematic from the second decoder, each parity stream from its own
    decoder). 'reencode' hard-decides the info bits and re-encodes them;
    that propagates isolated info errors through the recursive parity
    streams, so 'posterior' is the default.
    """
    if method == "reencode":
        outcome = decode(code, llrs, algorithm="smlm", max_iters=1)
        return encode(code, outcome.hard)
    if method != "posterior":
        raise ValueError(f"unknown decision method {method!r}")

    sys1, par1, sys2, par2 = _split_llrs(code, llrs)
    k = code.k
    mode = KERNEL_MAXLOG
    la1 = np.zeros(k + 3)
    la2 = np.zeros(k + 3)
    post1, ppost1 = _bcjr(sys1, par1, la1, _NEXT, _PARITY, mode, CORRECTION_TABLE, _TABLE_STEP)
    la2[:k] = (0.7 * (post1[:k] - sys1[:k]))[code.interleaver]
    post2, ppost2 = _bcjr(sys2, par2, la2, _NEXT, _PARITY, mode, CORRECTION_TABLE, _TABLE_STEP)

    sys_dec = np.empty(k, dtype=np.uint8)
    sys_dec[code.interleaver] = (post2[:k] > 0).astype(np.uint8)
    p1_dec = (ppost1[:k] > 0).astype(np.uint8)
    p2_dec = (ppost2[:k] > 0).astype(np.uint8)
    tails = np.empty(TAIL_BITS, dtype=np.uint8)
    tails[0:6:2] = post1[k:] > 0
    tails[1:6:2] = ppost1[k:] > 0
    tails[6:12:2] = post2[k:] > 0
    tails[7:12:2] = ppost2[k:] > 0
    return np.concatenate([sys_dec, p1_dec[code.keep_p1], p2_dec[code.keep_p2], tails])
