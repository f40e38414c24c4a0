"""Command-line entry points: GMI analysis, LUT building, the scaling-factor
table, FER experiments, and a search demo over LLR dump files."""

import json
from pathlib import Path

import click

from . import __version__, detector, gmi, harness
from . import online_scaling as osc


def _load_config(config_path, snr, seed):
    cfg = harness.SimConfig.from_json(config_path) if config_path else harness.SimConfig()
    overrides = {}
    if snr:
        overrides["snr_db"] = tuple(snr)
    if seed is not None:
        overrides["master_seed"] = seed
    if overrides:
        from dataclasses import replace
        cfg = replace(cfg, **overrides)
    return cfg


def _write_manifest(out: Path, command: str, cfg=None, seed=None):
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"command": command, "version": __version__}
    if cfg is not None:
        manifest["config_hash"] = cfg.hash()
        manifest["master_seed"] = cfg.master_seed
        (out / "config.json").write_text(cfg.to_json())
    if seed is not None:
        manifest["master_seed"] = seed
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))


@click.group()
def main():
    """BICM GMI lab."""


@main.command("analyze-gmi")
@click.option("--config", "-c", "config_path", type=click.Path(exists=True))
@click.option("--snr", multiple=True, type=float, help="override the SNR grid (dB)")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default="out")
def analyze_gmi(config_path, snr, seed, out):
    """Emit per-channel and TOTAL I-curves plus factor tables for all scaling variants."""
    cfg = _load_config(config_path, snr, seed)
    out = Path(out)
    _write_manifest(out, "analyze-gmi", cfg)
    harness.run_gmi_analysis(cfg, out_dir=out)
    click.echo(f"GMI analysis written to {out}")


@main.command("build-lut")
@click.option("--config", "-c", "config_path", type=click.Path(exists=True))
@click.option("--snr", multiple=True, type=float)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default="out")
def build_lut(config_path, snr, seed, out):
    """Train per-bit-channel scaling LUTs from a genie dataset and export them."""
    cfg = _load_config(config_path, snr, seed)
    out = Path(out)
    _write_manifest(out, "build-lut", cfg)
    for snr_db in cfg.snr_db:
        records = harness.simulate_llr_records(cfg, snr_db)
        for k, hist in gmi.build_histograms(records).items():
            gmi.build_lut(hist).to_csv(out / f"lut_class{k}_snr{snr_db:g}.csv")
    click.echo(f"LUTs written to {out}")


@main.command("table1")
@click.option("--seed", type=int, default=0)
@click.option("--samples", type=int, default=2_000_000, help="number of symbols")
@click.option("--out", type=click.Path(), default="out")
def table1(seed, samples, out):
    """Scaling factors by GMI maximization and by consistency-condition averaging."""
    out = Path(out)
    _write_manifest(out, "table1", seed=seed)
    table = harness.run_table1(seed=seed, n_symbols=samples, out_path=out / "table1.csv")
    click.echo(json.dumps(table, indent=2))


@main.command("fer")
@click.option("--config", "-c", "config_path", type=click.Path(exists=True))
@click.option("--snr", multiple=True, type=float)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default="out")
def fer(config_path, snr, seed, out):
    """Monte Carlo frame/bit error rates for the configured decoder and scaling mode."""
    cfg = _load_config(config_path, snr, seed)
    out = Path(out)
    _write_manifest(out, "fer", cfg)
    result = harness.run_fer_experiment(cfg)
    result.to_json(out / "fer.json")
    result.to_csv(out / "fer.csv")
    click.echo(f"FER results written to {out}")


@main.command("search-demo")
@click.option("--dump", type=click.Path(exists=True), required=True,
              help="LLR dump file (frame,pos,bit_channel,llr,true_bit)")
@click.option("--out", type=click.Path(), default="out")
def search_demo(dump, out):
    """Run the multiplicative scaling-factor search on a dumped record set."""
    records = detector.load_csv(dump)
    results = osc.search_scale_per_class(records, bit_source="true")
    report = osc.ScalingReport.from_single(results, bit_source="true")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report.to_json(out / "scaling_report.json")
    click.echo(report.to_json())


if __name__ == "__main__":
    main()
