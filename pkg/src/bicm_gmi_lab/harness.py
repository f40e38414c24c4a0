"""Experiment configuration, Monte Carlo loops, and table/curve outputs.

Frame-level streams are derived from (master seed, frame index, stream id),
so identical configs reproduce bit-identical results and experiments that
differ only in scaling mode see identical channel realizations.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import channel as ch
from . import detector as det
from . import gmi
from . import online_scaling as osc
from . import turbo
from ._search import SearchParams
from .constellation import build_qam, map_bits

SCALING_MODES = ("none", "lut-offline", "uniform-offline", "online-1level", "online-2level")

_STREAM_TX = 0
_STREAM_CHANNEL = 1
_STREAM_CSI = 2

RATE_PATTERNS = {
    "1/3": None,             # no puncturing
    "0.4": (1, 1, 1, 0),     # keep 3 of 4 parity bits per stream
}


@dataclass
class SimConfig:
    modulation: int = 64
    channel: str = "rayleigh"
    snr_db: tuple = (7.0,)
    noise_var_bias: float = 1.0
    csi_error_var: float = 0.0
    demapper: str = "maxlog"
    k_info: int = 1024
    rate: str = "1/3"
    algorithm: str = "logmap"
    max_iters: int = 8
    extrinsic_scale: float = 0.7
    scaling_mode: str = "none"
    bit_source: str = "decided"
    min_frame_errors: int = 100
    max_frames: int = 100_000
    n_symbols: int = 200_000        # GMI-analysis sample size
    offline_train_symbols: int = 200_000
    master_seed: int = 0

    def __post_init__(self):
        if self.scaling_mode not in SCALING_MODES:
            raise ValueError(f"unknown scaling mode {self.scaling_mode!r}")
        if self.rate not in RATE_PATTERNS:
            raise ValueError(f"unknown rate {self.rate!r}; choose from {tuple(RATE_PATTERNS)}")
        if not self.snr_db:
            raise ValueError("SNR grid must be nonempty")
        if self.min_frame_errors <= 0 or self.max_frames <= 0:
            raise ValueError("stopping rule must be positive")
        if self.bit_source not in ("genie", "decided"):
            raise ValueError("bit_source must be genie or decided")
        self.snr_db = tuple(float(s) for s in self.snr_db)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=list)

    @classmethod
    def from_json(cls, text_or_path) -> "SimConfig":
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            with open(text) as f:
                text = f.read()
        data = json.loads(text)
        data = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**data)

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def frame_rng(master_seed: int, frame: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, frame, stream])


def wilson_interval(errors: int, n: int, z: float = 1.96) -> tuple:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = errors / n
    denom = 1 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# uncoded genie record generation (GMI analysis path)


def simulate_llr_records(config: SimConfig, snr_db: float, n_symbols: int = None,
                         seed=None, frame: int = 0) -> det.LlrRecords:
    """Random bits through the configured channel and demapper, genie-tagged."""
    n_symbols = config.n_symbols if n_symbols is None else n_symbols
    seed = config.master_seed if seed is None else seed
    const = build_qam(config.modulation)
    m = const.bits_per_symbol
    mm = ch.MismatchModel(config.noise_var_bias, config.csi_error_var)
    rng_tx = frame_rng(seed, frame, _STREAM_TX)
    bits = rng_tx.integers(0, 2, size=(n_symbols, m)).astype(np.uint8)
    symbols = map_bits(const, bits)
    nv = ch.snr_db_to_noise_var(snr_db)
    real = ch.transmit(symbols, config.channel, nv, frame_rng(seed, frame, _STREAM_CHANNEL))
    h_hat, nv_hat = ch.receiver_view(real, mm, frame_rng(seed, frame, _STREAM_CSI))
    llrs = det.demap(real.received, h_hat, nv_hat, const, config.demapper)
    return det.make_records(llrs, const, true_bits=bits, frame=frame)


# ---------------------------------------------------------------------------
# coded frames


@dataclass
class CodedFrame:
    info_bits: np.ndarray
    coded_bits: np.ndarray       # punctured stream, transmit order before interleaving
    channel_llrs: np.ndarray     # aligned with coded_bits
    bit_class: np.ndarray        # per coded-bit bit-channel class


def _make_code(config: SimConfig) -> turbo.TurboCode:
    return turbo.make_code(config.k_info, seed=config.master_seed,
                           puncture_pattern=RATE_PATTERNS[config.rate])


def simulate_coded_frame(config: SimConfig, code: turbo.TurboCode, const,
                         snr_db: float, frame: int) -> CodedFrame:
    m = const.bits_per_symbol
    mm = ch.MismatchModel(config.noise_var_bias, config.csi_error_var)
    rng_tx = frame_rng(config.master_seed, frame, _STREAM_TX)

    u = rng_tx.integers(0, 2, size=code.k).astype(np.uint8)
    coded = turbo.encode(code, u)
    n_pad = (-coded.size) % m
    stream = np.concatenate([coded, rng_tx.integers(0, 2, size=n_pad).astype(np.uint8)])
    perm = rng_tx.permutation(stream.size)          # channel interleaver
    tx_bits = stream[perm].reshape(-1, m)

    symbols = map_bits(const, tx_bits)
    nv = ch.snr_db_to_noise_var(snr_db)
    real = ch.transmit(symbols, config.channel, nv,
                       frame_rng(config.master_seed, frame, _STREAM_CHANNEL))
    h_hat, nv_hat = ch.receiver_view(real, mm,
                                     frame_rng(config.master_seed, frame, _STREAM_CSI))
    llr_flat = det.demap(real.received, h_hat, nv_hat, const, config.demapper).reshape(-1)

    classes = np.array([const.bit_class(i) for i in range(m)], dtype=np.int16)
    class_flat = np.tile(classes, symbols.size)
    llr_stream = np.empty(stream.size)
    llr_stream[perm] = llr_flat
    class_stream = np.empty(stream.size, dtype=np.int16)
    class_stream[perm] = class_flat
    return CodedFrame(info_bits=u, coded_bits=coded,
                      channel_llrs=llr_stream[: coded.size],
                      bit_class=class_stream[: coded.size])


def _frame_records(fr: CodedFrame, decided=None, frame: int = 0) -> det.LlrRecords:
    n = fr.channel_llrs.size
    return det.LlrRecords(
        llr=fr.channel_llrs,
        bit_class=fr.bit_class,
        true_bit=fr.coded_bits.astype(np.int8),
        decided_bit=(np.full(n, -1, dtype=np.int8) if decided is None
                     else decided.astype(np.int8)),
        frame=np.full(n, frame, dtype=np.int64),
        pos=np.arange(n, dtype=np.int64),
    )


def online_factors(config: SimConfig, code: turbo.TurboCode, fr: CodedFrame,
                   frame: int = 0, params: SearchParams = SearchParams()):
    """Per-block factor search: one initial S-MLM iteration gives coded-bit
    decisions, the search runs on the original channel LLRs."""
    if config.bit_source == "decided":
        decided = turbo.single_iteration_decisions(code, fr.channel_llrs)
    else:
        decided = None
    records = _frame_records(fr, decided=decided, frame=frame)
    source = "decided" if config.bit_source == "decided" else "true"
    if config.scaling_mode == "online-2level":
        results = osc.two_level_search_per_class(records, params, source)
        scheme = gmi.TwoLevelScaling({k: (r.plus.s, r.minus.s) for k, r in results.items()})
        factors = {k: 0.5 * (r.plus.s + r.minus.s) for k, r in results.items()}
    else:
        results = osc.search_scale_per_class(records, params, source)
        scheme = gmi.UniformScaling({k: r.s for k, r in results.items()})
        factors = {k: r.s for k, r in results.items()}
    scaled = scheme.factors_for(fr.channel_llrs, fr.bit_class) * fr.channel_llrs
    scaled = np.clip(scaled, -det.LLR_CLIP, det.LLR_CLIP)
    return scaled, factors, results


def train_offline_scheme(config: SimConfig, snr_db: float):
    """Genie training pass for the offline scaling modes, at the same operating point."""
    records = simulate_llr_records(config, snr_db, config.offline_train_symbols,
                                   seed=config.master_seed + 0x0FF1, frame=0)
    if config.scaling_mode == "uniform-offline":
        points = gmi.critical_point(records)
        return gmi.UniformScaling({k: s for k, (s, _) in points.items()})
    hists = gmi.build_histograms(records)
    return gmi.LutScaling({k: gmi.build_lut(h) for k, h in hists.items()})


# ---------------------------------------------------------------------------
# experiments


@dataclass
class ScenarioResult:
    config_hash: str
    master_seed: int
    points: list = field(default_factory=list)

    def to_json(self, path=None):
        payload = {"config_hash": self.config_hash, "master_seed": self.master_seed,
                   "points": self.points}
        if path is None:
            return json.dumps(payload, indent=2)
        with open(path, "w") as f:
            json.dump(payload, f, indent=2)

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("snr_db,fer,ber,frames,frame_errors,stopped_by\n")
            for p in self.points:
                f.write(f"{p['snr_db']},{p['fer']:.8g},{p['ber']:.8g},"
                        f"{p['frames']},{p['frame_errors']},{p['stopped_by']}\n")


def run_fer_experiment(config: SimConfig, progress=None) -> ScenarioResult:
    """Monte Carlo FER/BER over the configured SNR grid with the configured
    decoder and scaling mode; frames accumulate until the stopping rule."""
    const = build_qam(config.modulation)
    code = _make_code(config)
    result = ScenarioResult(config_hash=config.hash(), master_seed=config.master_seed)
    for snr in config.snr_db:
        scheme = None
        if config.scaling_mode in ("uniform-offline", "lut-offline"):
            scheme = train_offline_scheme(config, snr)
        frame_errors = 0
        bit_errors = 0
        frames = 0
        factor_sums = {}
        while frame_errors < config.min_frame_errors and frames < config.max_frames:
            fr = simulate_coded_frame(config, code, const, snr, frames)
            llrs = fr.channel_llrs
            if config.scaling_mode in ("online-1level", "online-2level"):
                llrs, factors, _ = online_factors(config, code, fr, frames)
                for k, v in factors.items():
                    factor_sums[k] = factor_sums.get(k, 0.0) + v
            elif scheme is not None:
                llrs = np.clip(scheme.factors_for(llrs, fr.bit_class) * llrs,
                               -det.LLR_CLIP, det.LLR_CLIP)
            out = turbo.decode(code, llrs, algorithm=config.algorithm,
                               max_iters=config.max_iters,
                               extrinsic_scale=config.extrinsic_scale)
            n_err = int(np.count_nonzero(out.hard != fr.info_bits))
            bit_errors += n_err
            frame_errors += n_err > 0
            frames += 1
            if progress is not None and frames % 200 == 0:
                progress(snr, frames, frame_errors)
        point = {
            "snr_db": snr,
            "fer": frame_errors / frames,
            "ber": bit_errors / (frames * code.k),
            "frames": frames,
            "frame_errors": frame_errors,
            "stopped_by": ("min_frame_errors" if frame_errors >= config.min_frame_errors
                           else "max_frames"),
            "mean_factors": {str(k): v / frames for k, v in sorted(factor_sums.items())},
        }
        result.points.append(point)
    return result


def run_gmi_analysis(config: SimConfig, out_dir=None) -> dict:
    """Per-channel and TOTAL I-curves for the unscaled LLRs and every scaling
    variant, plus the factor tables; CSVs land in out_dir when given."""
    results = {}
    params = SearchParams()
    for snr in config.snr_db:
        records = simulate_llr_records(config, snr)
        base = gmi.total_gmi(records)

        uniform_points = gmi.critical_point(records)
        uniform = gmi.UniformScaling({k: s for k, (s, _) in uniform_points.items()})
        lut = gmi.LutScaling({k: gmi.build_lut(h)
                              for k, h in gmi.build_histograms(records).items()})
        online1 = osc.search_scale_per_class(records, params, bit_source="true")
        online1_scheme = gmi.UniformScaling({k: r.s for k, r in online1.items()})
        online2 = osc.two_level_search_per_class(records, params, bit_source="true")
        online2_scheme = gmi.TwoLevelScaling(
            {k: (r.plus.s, r.minus.s) for k, r in online2.items()})

        variants = {
            "unscaled": base,
            "lut": gmi.total_gmi(gmi.apply_scaling(records, lut)),
            "uniform": gmi.total_gmi(gmi.apply_scaling(records, uniform)),
            "online-1level": gmi.total_gmi(gmi.apply_scaling(records, online1_scheme)),
            "online-2level": gmi.total_gmi(gmi.apply_scaling(records, online2_scheme)),
        }
        factors = {
            "uniform": {k: s for k, (s, _) in uniform_points.items()},
            "consistency": gmi.consistency_mean(records),
            "online-1level": {k: r.s for k, r in online1.items()},
            "online-2level": {k: (r.plus.s, r.minus.s) for k, r in online2.items()},
        }
        results[snr] = {"variants": variants, "factors": factors}

        if out_dir is not None:
            from pathlib import Path
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            tag = f"snr{snr:g}"
            for name, tg in variants.items():
                tg.total.to_csv(out / f"icurve_total_{name}_{tag}.csv")
            for k, curve in base.per_class.items():
                curve.to_csv(out / f"icurve_class{k}_unscaled_{tag}.csv")
            for k, l in lut.luts.items():
                l.to_csv(out / f"lut_class{k}_{tag}.csv")
            with open(out / f"factors_{tag}.csv", "w") as f:
                f.write("method,channel,factor\n")
                for method, d in factors.items():
                    for k, v in sorted(d.items()):
                        if isinstance(v, tuple):
                            f.write(f"{method},{k},{v[0]:.6g}/{v[1]:.6g}\n")
                        else:
                            f.write(f"{method},{k},{v:.6g}\n")
    return results


def run_table1(seed: int = 0, n_symbols: int = 2_000_000, out_path=None) -> dict:
    """Fixed scenario behind the scaling-factor comparison table: 64-QAM,
    max-log detection, i.i.d. Rayleigh at SNR 7 dB, perfect CSI, genie bits."""
    config = SimConfig(modulation=64, channel="rayleigh", snr_db=(7.0,),
                       demapper="maxlog", n_symbols=n_symbols, master_seed=seed)
    records = simulate_llr_records(config, 7.0)

    points = gmi.critical_point(records)
    gmi_row = {k: s for k, (s, _) in points.items()}
    bits = records.bits("true")

    def total_at(s):
        return sum(gmi.icurve_value(records.llr[records.bit_class == k],
                                    bits[records.bit_class == k], s) * 2
                   for k in records.classes())

    from ._search import maximize
    gmi_total, _ = maximize(total_at)
    cc_row = gmi.consistency_mean(records)
    cc_total = gmi.consistency_mean(records, pooled=True)

    table = {"gmi": {**gmi_row, "total": gmi_total},
             "consistency": {**cc_row, "total": cc_total}}
    if out_path is not None:
        classes = sorted(gmi_row)
        with open(out_path, "w") as f:
            header = ",".join(f"bit_class_{k}" for k in classes)
            f.write(f"method,{header},total\n")
            f.write("gmi," + ",".join(f"{gmi_row[k]:.4f}" for k in classes)
                    + f",{gmi_total:.4f}\n")
            f.write("consistency," + ",".join(f"{cc_row[k]:.4f}" for k in classes)
                    + f",{cc_total:.4f}\n")
    return table
