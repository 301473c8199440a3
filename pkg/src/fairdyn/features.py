"""Survey, topology, and hybrid feature vectors per sample.

Feature matrices are keyed by (participant, question, wave) misprediction
samples: survey columns come from the participant's answers at the
sample's wave, topology columns from the network snapshot at the wave
timestamp.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .cogsnet import TemporalNetwork
from .graph_metrics import CENTRALITY_KINDS, all_centralities

PIPELINES = ("survey", "topology", "hybrid")


@dataclass
class FeatureVector:
    participant_id: str
    pipeline: str
    values: dict  # ordered feature-name -> float
    missing_mask: set = field(default_factory=set)


@dataclass
class FeatureMatrix:
    """Dense design matrix plus per-sample keys, ready for the trees.

    Missing survey answers contribute 0 in the value column and 1 in a
    companion ``*_missing`` indicator column.
    """

    pipeline: str
    feature_names: list
    keys: list  # (participant_id, question, wave) per row
    x: np.ndarray

    def subset(self, names) -> "FeatureMatrix":
        idx = [self.feature_names.index(n) for n in names]
        return FeatureMatrix(
            pipeline=self.pipeline,
            feature_names=list(names),
            keys=self.keys,
            x=self.x[:, idx],
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["participant_id", "question", "wave"] + self.feature_names)
            for (pid, question, wave), row in zip(self.keys, self.x):
                writer.writerow([pid, question, wave] + [repr(v) for v in row])

    def manifest(self) -> dict:
        return {"pipeline": self.pipeline, "columns": self.feature_names}

    def save_manifest(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.manifest(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def survey_feature_columns(dataset) -> list:
    """Deterministic (lexicographic) column list over all attributes."""
    numeric = set()
    categorical = {}
    for p in dataset.participants.values():
        for answers in p.survey_attributes.values():
            for name, value in answers.items():
                if _is_number(value):
                    numeric.add(name)
                else:
                    categorical.setdefault(name, set()).add(str(value))
    cols = [f"survey.{name}" for name in numeric]
    for name, values in categorical.items():
        cols.extend(f"survey.{name}={v}" for v in values)
    cols.extend(f"survey.{name}_missing" for name in set(numeric) | set(categorical))
    return sorted(cols)


def extract_survey_features(dataset, wave: int, columns=None):
    """One FeatureVector per participant from its answers at ``wave``.

    Categoricals are one-hot encoded, numerics pass through; attributes
    without an answer set the companion missing indicator.
    """
    columns = columns if columns is not None else survey_feature_columns(dataset)
    attr_names = {
        c[len("survey."):].split("=")[0].removesuffix("_missing") for c in columns
    }
    out = {}
    for pid in sorted(dataset.participants):
        p = dataset.participants[pid]
        answers = p.survey_attributes.get(wave, {})
        values = {c: 0.0 for c in columns}
        missing = set()
        for name in attr_names:
            value = answers.get(name)
            if value is None:
                key = f"survey.{name}_missing"
                if key in values:
                    values[key] = 1.0
                missing.add(f"survey.{name}")
                continue
            if _is_number(value):
                key = f"survey.{name}"
                if key in values:
                    values[key] = float(value)
            else:
                key = f"survey.{name}={value}"
                if key in values:
                    values[key] = 1.0
        out[pid] = FeatureVector(
            participant_id=pid, pipeline="survey", values=values, missing_mask=missing
        )
    return out


def topology_feature_columns() -> list:
    return [f"topo.{kind}" for kind in CENTRALITY_KINDS]


def extract_topology_features(dataset, net: TemporalNetwork, t: float, weighted=True):
    """Full centrality battery on the snapshot at time t."""
    graph = net.snapshot_at(t)
    battery = all_centralities(graph, weighted=weighted)
    out = {}
    for pid in sorted(dataset.participants):
        values = {
            f"topo.{kind}": float(battery[kind].get(pid, 0.0))
            for kind in CENTRALITY_KINDS
        }
        out[pid] = FeatureVector(participant_id=pid, pipeline="topology", values=values)
    return out


def assemble_hybrid(survey: dict, topo: dict) -> dict:
    """Concatenate the two pipelines; prefixes keep names disjoint."""
    if set(survey) != set(topo):
        missing = set(survey) ^ set(topo)
        raise ValueError(f"participant sets differ: {sorted(missing)[:5]}")
    out = {}
    for pid, sv in survey.items():
        tv = topo[pid]
        values = dict(sv.values)
        values.update(tv.values)
        out[pid] = FeatureVector(
            participant_id=pid,
            pipeline="hybrid",
            values=values,
            missing_mask=set(sv.missing_mask) | set(tv.missing_mask),
        )
    return out


def build_feature_matrix(dataset, net, samples, pipeline: str, wave_times,
                         weighted=True) -> FeatureMatrix:
    """Design matrix for a list of misprediction samples."""
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    waves = sorted({s.wave for s in samples})
    survey_cols = survey_feature_columns(dataset) if pipeline != "topology" else []
    per_wave = {}
    for wave in waves:
        if pipeline == "survey":
            per_wave[wave] = extract_survey_features(dataset, wave, survey_cols)
        elif pipeline == "topology":
            per_wave[wave] = extract_topology_features(
                dataset, net, wave_times[wave], weighted
            )
        else:
            sv = extract_survey_features(dataset, wave, survey_cols)
            tv = extract_topology_features(dataset, net, wave_times[wave], weighted)
            per_wave[wave] = assemble_hybrid(sv, tv)
    first = next(iter(per_wave.values()))
    names = list(next(iter(first.values())).values.keys())
    rows = []
    keys = []
    for s in samples:
        vec = per_wave[s.wave][s.participant_id]
        rows.append([vec.values[n] for n in names])
        keys.append((s.participant_id, s.question, s.wave))
    x = np.array(rows, dtype=float) if rows else np.zeros((0, len(names)))
    return FeatureMatrix(pipeline=pipeline, feature_names=names, keys=keys, x=x)
