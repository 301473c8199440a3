"""End-to-end audit: dataset -> network -> simulation -> labels ->
features -> tuned classifiers -> subgroup fairness report.

Every stage is a named function so failures can be attributed; the
runner persists partial artifacts for the stages that did finish.
"""

from __future__ import annotations

import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import fairness
from ._version import __version__
from .cogsnet import build_network
from .config import PIPELINE_FAMILIES, RunConfig
from .data_model import Dataset, derive_minorities, load_dataset
from .features import build_feature_matrix
from .ml import (
    CVConfig,
    _fit_family,
    default_grid,
    grid_search,
    iterative_subset_selection,
    stratified_split,
)
from .opinion_sim import (
    _default_wave_times,
    export_samples_csv,
    label_mispredictions,
    run_coding,
)
from .synth import generate_synthetic

log = logging.getLogger("fairdyn")

# A deliberately tiny grid for smoke runs.
SMOKE_RF_GRID = {
    "n_estimators": [10],
    "max_features": ["sqrt"],
    "max_depth": [3, 5],
    "min_samples_split": [4],
    "min_samples_leaf": [2],
    "bootstrap": [True],
    "criterion": ["gini"],
}

SMOKE_DT_GRID = {
    "criterion": ["gini"],
    "splitter": ["best"],
    "max_depth": [3, 25],
    "max_features": ["all"],
    "min_samples_leaf": [1, 5],
}


class StageError(RuntimeError):
    """Failure annotated with the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _stage(name):
    def wrap(fn):
        def run(*args, **kwargs):
            log.info("stage %s", name)
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:  # noqa: BLE001 - annotate and rethrow
                raise StageError(name, exc) from exc
        run.__name__ = fn.__name__
        return run
    return wrap


@_stage("dataset")
def stage_dataset(config: RunConfig):
    if config.dataset_paths:
        dataset = load_dataset(config.dataset_paths)
        wave_times = _default_wave_times(dataset)
    else:
        dataset = generate_synthetic(
            config.synthetic, seed=config.derive_seed("synth")
        )
        wave_times = config.synthetic.wave_times()
    memberships = derive_minorities(dataset)
    return dataset, memberships, wave_times


@_stage("network")
def stage_network(config: RunConfig, dataset: Dataset):
    return build_network(dataset, config.cogsnet)


@_stage("simulation")
def stage_simulation(config: RunConfig, dataset, net, question, wave_times):
    trace = run_coding(
        dataset,
        net,
        question,
        config.coding,
        seed=config.derive_seed("coding", question),
        wave_times=wave_times,
    )
    samples = label_mispredictions(trace, dataset, wave_times)
    return trace, samples


@_stage("eda")
def stage_eda(dataset, memberships, samples, question):
    volatility = fairness.opinion_volatility(dataset, memberships, question)
    rates = fairness.minority_opinion_rate(dataset.opinions, memberships, question)
    base = fairness.baseline_misprediction_rate(samples, memberships)
    curve = fairness.misprediction_by_intersectionality(samples, memberships, question)
    return {
        "volatility": [asdict(v) for v in volatility],
        "minority_opinion_rate": rates,
        "baseline_misprediction": {
            group: rate for (q, group), rate in base.items() if q == question
        },
        "intersectionality_curve": [list(p) for p in curve.points],
    }


def _grid_for(config: RunConfig, family: str) -> dict:
    if config.ml.grid == "smoke":
        return SMOKE_DT_GRID if family == "decision_tree" else SMOKE_RF_GRID
    return default_grid(family)


@_stage("features")
def stage_features(config, dataset, net, samples, pipeline, wave_times):
    return build_feature_matrix(
        dataset, net, samples, pipeline, wave_times,
        weighted=config.weighted_centralities,
    )


@_stage("training")
def stage_training(config: RunConfig, matrix, samples, memberships, question,
                   pipeline):
    family = PIPELINE_FAMILIES[pipeline]
    y = np.array([s.target for s in samples], dtype=int)
    cv = CVConfig(
        folds=config.ml.cv_folds,
        test_fraction=config.ml.test_fraction,
        seed=config.derive_seed("cv", f"{question}:{pipeline}"),
    )
    train_idx, test_idx = stratified_split(y, cv)
    x_train, y_train = matrix.x[train_idx], y[train_idx]
    x_test, y_test = matrix.x[test_idx], y[test_idx]

    grid = _grid_for(config, family)
    tuned, entry, _table = grid_search(x_train, y_train, family, grid, cv)
    chosen, cv_f1, subset_table = iterative_subset_selection(
        x_train, y_train, family, tuned, cv, feature_names=matrix.feature_names
    )
    col_idx = [matrix.feature_names.index(n) for n in chosen]
    model = _fit_family(
        x_train[:, col_idx], y_train, family, tuned,
        seed=config.derive_seed("final", f"{question}:{pipeline}"),
        feature_names=chosen,
    )
    test_pids = [matrix.keys[i][0] for i in test_idx]
    subgroups = fairness.subgroup_f1_report(
        model, x_test[:, col_idx], y_test, test_pids, memberships, question,
        pipeline,
    )
    return {
        "model": model,
        "model_family": family,
        "best_params": entry,
        "selected_features": chosen,
        "cv_f1": cv_f1,
        "subset_table": subset_table,
        "subgroups": [asdict(s) for s in subgroups],
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


@_stage("report")
def stage_report(config: RunConfig, question_blocks: dict, out_dir: Path):
    # no wall-clock fields: rerunning a seed must reproduce the report
    # byte for byte
    run_info = {
        "seed": config.seed,
        "config_hash": config.config_hash(),
        "package_version": __version__,
    }
    convention_flags = {
        "minority_pole_wave_policy": "all",
        "centrality_mode": "weighted" if config.weighted_centralities else "unweighted",
        "distance_convention": "inverse-weight",
        "missing_survey_encoding": "zero-plus-indicator",
        "subset_tie_break": "smaller-k",
    }
    report = fairness.compile_audit_report(question_blocks, run_info, convention_flags)
    _write(out_dir / "audit_report.json", fairness.report_to_json(report))
    fairness.report_long_csv(report, out_dir / "audit_report_long.csv")
    return report


def run_audit(config: RunConfig, out_dir=None) -> dict:
    """Full audit over the configured questions and pipelines.

    Writes audit_report.json, audit_report_long.csv, per-question sample
    CSVs, and per-pipeline model JSON into the output directory.
    """
    out_dir = Path(out_dir if out_dir is not None else config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset, memberships, wave_times = stage_dataset(config)
    net = stage_network(config, dataset)
    question_blocks = {}
    for question in config.questions:
        trace, samples = stage_simulation(config, dataset, net, question, wave_times)
        export_samples_csv(samples, out_dir / f"samples_{question}.csv")
        block = {"eda": stage_eda(dataset, memberships, samples, question)}
        pipelines = {}
        for pipeline in config.pipelines:
            matrix = stage_features(
                config, dataset, net, samples, pipeline, wave_times
            )
            result = stage_training(
                config, matrix, samples, memberships, question, pipeline
            )
            model = result.pop("model")
            result.pop("subset_table")
            _write(
                out_dir / f"model_{question}_{pipeline}.json",
                model.to_json() + "\n",
            )
            pipelines[pipeline] = result
        block["pipelines"] = pipelines
        question_blocks[question] = block
    return stage_report(config, question_blocks, out_dir)


def evaluate_persistence_misprediction(dataset, net, question, wave_times, seed=0):
    """Misprediction labels under the frozen (no-interaction) dynamics,
    i.e. the wave-1 persistence predictor."""
    from .opinion_sim import CodingParams

    params = CodingParams(interactions_per_day=0.0)
    trace = run_coding(dataset, net, question, params, seed=seed, wave_times=wave_times)
    return label_mispredictions(trace, dataset, wave_times)
