"""Per-block online factor search from decoder decisions.

For a handful of coded frames under a biased noise-variance estimate
(receiver assumes 1.25 * sigma^2), this compares the per-bit-channel factors
found with genie bits against the factors found from the coded-bit decisions
of a single scaled-max-LogMAP iteration, then reports the normalized error.

Run:  python3 demos/online_scaling.py
"""

import numpy as np

from bicm_gmi_lab import harness
from bicm_gmi_lab import online_scaling as osc
from bicm_gmi_lab.constellation import build_qam

SNR_DB = 11.0
N_FRAMES = 20

cfg = harness.SimConfig(modulation=64, channel="rayleigh", snr_db=(SNR_DB,),
                        noise_var_bias=1.25, demapper="maxlog", k_info=1024,
                        rate="0.4", scaling_mode="online-1level",
                        bit_source="decided", master_seed=3)
const = build_qam(64)
code = harness._make_code(cfg)

genie = {k: [] for k in range(3)}
decided = {k: [] for k in range(3)}
for frame in range(N_FRAMES):
    fr = harness.simulate_coded_frame(cfg, code, const, SNR_DB, frame)
    _, dec_factors, _ = harness.online_factors(cfg, code, fr, frame)
    rec = harness._frame_records(fr, frame=frame)
    gen = osc.search_scale_per_class(rec, bit_source="true")
    for k in range(3):
        genie[k].append(gen[k].s)
        decided[k].append(dec_factors[k])
    row = "  ".join(f"{gen[k].s:.3f}/{dec_factors[k]:.3f}" for k in range(3))
    print(f"frame {frame:2d}   genie/decided per channel:  {row}")

print("\nnormalized mean error E{|s - s_hat| / s}:")
for k in range(3):
    nme = osc.normalized_mean_error(genie[k], decided[k])
    print(f"  bit channel {k}: {nme:.4f}")
print("\nThe factors combine two corrections: undoing the 1.25x inflated")
print("noise-variance estimate and compensating the max-log optimism of the")
print("weaker bit channels, so they land well above 1.")
