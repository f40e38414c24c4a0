"""Scaling factors of the max-log bit channels, two ways.

Reproduces the factor comparison at the 64-QAM / Rayleigh / 7 dB working
point: per-channel factors found by maximizing the I-curve (GMI-optimal)
next to the factors implied by averaging the consistency condition over the
LLR histogram. Equivalent to `bicm-gmi-lab table1` but at a smaller sample
size so it runs in a few seconds.

Run:  python3 demos/factor_table.py
"""

from bicm_gmi_lab.harness import run_table1

table = run_table1(seed=0, n_symbols=500_000)

classes = sorted(k for k in table["gmi"] if k != "total")
header = "  ".join(f"ch {k}" for k in classes)
print(f"method         {header}   total")
for method in ("gmi", "consistency"):
    row = "  ".join(f"{table[method][k]:5.3f}" for k in classes)
    print(f"{method:<12}  {row}   {table[method]['total']:5.3f}")

print("\nGMI row: argmax of each bit channel's I-curve.")
print("Consistency row: E{ln(p(l|1)/p(l|0)) / l} over the LLR histogram.")
