"""Command-line interface.

Exit codes: 0 success, 2 configuration problems, 3 a named pipeline
stage failed (the stage name is printed to stderr).
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from .cogsnet import build_network, export_snapshot_csv
from .config import ConfigError, RunConfig, load_config
from .data_model import QUESTIONS, save_dataset
from .features import PIPELINES, build_feature_matrix
from .opinion_sim import export_trace_csv, label_mispredictions, run_coding
from .pipeline import StageError, run_audit, stage_dataset, stage_network
from .synth import generate_synthetic


def _setup_logging():
    level = os.environ.get("FAIRDYN_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _load(config_path, seed, jobs, out, questions, pipelines) -> RunConfig:
    try:
        cfg = load_config(config_path) if config_path else RunConfig()
        cfg.apply_overrides(
            seed=seed,
            jobs=jobs,
            out_dir=out,
            questions=tuple(questions) if questions else None,
            pipelines=tuple(pipelines) if pipelines else None,
        )
        return cfg
    except (ConfigError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)


common_options = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="TOML or JSON run configuration."),
    click.option("--seed", type=int, default=None, help="Master seed override."),
    click.option("--jobs", type=int, default=None,
                 help="Worker budget (accepted; stages run sequentially)."),
    click.option("--out", type=click.Path(), default=None, help="Output directory."),
    click.option("--questions", multiple=True, type=click.Choice(QUESTIONS),
                 help="Restrict to these questions."),
    click.option("--pipelines", multiple=True, type=click.Choice(PIPELINES),
                 help="Restrict to these feature pipelines."),
]


def with_common(fn):
    for opt in reversed(common_options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Opinion-dynamics misprediction audit toolkit."""
    _setup_logging()


@main.command()
@with_common
def generate(config_path, seed, jobs, out, questions, pipelines):
    """Generate a synthetic dataset and write it to the output directory."""
    cfg = _load(config_path, seed, jobs, out, questions, pipelines)
    dataset = generate_synthetic(cfg.synthetic, seed=cfg.derive_seed("synth"))
    out_dir = Path(cfg.out_dir)
    paths = save_dataset(dataset, out_dir)
    meta = {
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "participants": len(dataset.participants),
        "events": len(dataset.events),
        "files": {k: str(v) for k, v in paths.items()},
    }
    (out_dir / "dataset_meta.json").write_text(json.dumps(meta, indent=1) + "\n")
    click.echo(f"wrote dataset for {len(dataset.participants)} participants to {out_dir}")


@main.command()
@with_common
def audit(config_path, seed, jobs, out, questions, pipelines):
    """Run the full audit pipeline and write the report."""
    cfg = _load(config_path, seed, jobs, out, questions, pipelines)
    try:
        run_audit(cfg)
    except StageError as exc:
        click.echo(str(exc), err=True)
        sys.exit(3)
    click.echo(f"audit report written to {cfg.out_dir}/audit_report.json")


@main.command()
@click.argument("report_path", type=click.Path(exists=True))
def report(report_path):
    """Summarize an existing audit report on stdout."""
    with open(report_path) as fh:
        doc = json.load(fh)
    run = doc.get("run", {})
    click.echo(f"seed={run.get('seed')} config_hash={run.get('config_hash')}")
    for question, block in sorted(doc.get("questions", {}).items()):
        click.echo(f"{question} [{block.get('typology')}]")
        for pipeline, pblock in sorted(block.get("pipelines", {}).items()):
            for sub in pblock.get("subgroups", []):
                tag = " degenerate" if sub.get("degenerate") else ""
                click.echo(
                    f"  {pipeline:9s} {sub['minority_name']:20s} "
                    f"f1={sub['f1_subgroup']:.4f} n={sub['n_subgroup']}{tag}"
                )


@main.command()
@with_common
def simulate(config_path, seed, jobs, out, questions, pipelines):
    """Run the opinion simulation and export traces and labels."""
    cfg = _load(config_path, seed, jobs, out, questions, pipelines)
    try:
        dataset, _members, wave_times = stage_dataset(cfg)
        net = stage_network(cfg, dataset)
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for question in cfg.questions:
            trace = run_coding(
                dataset, net, question, cfg.coding,
                seed=cfg.derive_seed("coding", question), wave_times=wave_times,
            )
            export_trace_csv(trace, out_dir / f"trace_{question}.csv")
            samples = label_mispredictions(trace, dataset, wave_times)
            rate = sum(s.target for s in samples) / max(1, len(samples))
            click.echo(f"{question}: {len(samples)} samples, misprediction {rate:.3f}")
    except StageError as exc:
        click.echo(str(exc), err=True)
        sys.exit(3)


@main.command()
@with_common
def features(config_path, seed, jobs, out, questions, pipelines):
    """Export feature matrices (and a network snapshot) per question."""
    cfg = _load(config_path, seed, jobs, out, questions, pipelines)
    try:
        dataset, _members, wave_times = stage_dataset(cfg)
        net = stage_network(cfg, dataset)
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        export_snapshot_csv(
            net.snapshot_at(net.clock), out_dir / "snapshot_final.csv"
        )
        for question in cfg.questions:
            trace = run_coding(
                dataset, net, question, cfg.coding,
                seed=cfg.derive_seed("coding", question), wave_times=wave_times,
            )
            samples = label_mispredictions(trace, dataset, wave_times)
            for pipeline in cfg.pipelines:
                matrix = build_feature_matrix(
                    dataset, net, samples, pipeline, wave_times,
                    weighted=cfg.weighted_centralities,
                )
                stem = out_dir / f"features_{question}_{pipeline}"
                matrix.to_csv(f"{stem}.csv")
                matrix.save_manifest(f"{stem}_manifest.json")
            click.echo(f"{question}: feature matrices written")
    except StageError as exc:
        click.echo(str(exc), err=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
