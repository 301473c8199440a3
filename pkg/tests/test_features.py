"""Feature extraction tests: survey encoding, topology battery wiring,
hybrid assembly, and design-matrix construction."""

import json

import numpy as np
import pytest

from fairdyn.cogsnet import SECONDS_PER_DAY, CogsnetParams, build_network
from fairdyn.data_model import CommEvent, Dataset, OpinionRecord, Participant
from fairdyn.features import (
    FeatureMatrix,
    PIPELINES,
    assemble_hybrid,
    build_feature_matrix,
    extract_survey_features,
    extract_topology_features,
    survey_feature_columns,
    topology_feature_columns,
)
from fairdyn.graph_metrics import CENTRALITY_KINDS
from fairdyn.opinion_sim import MisclassificationSample

DAY = SECONDS_PER_DAY


def feature_dataset():
    parts = {
        "a": Participant(
            id="a",
            survey_attributes={
                1: {"gender": "Female", "age": 19},
                2: {"gender": "Female"},
            },
            active_waves={1, 2},
        ),
        "b": Participant(
            id="b",
            survey_attributes={1: {"gender": "Male", "age": 21}, 2: {"age": 22}},
            active_waves={1, 2},
        ),
        "c": Participant(id="c", survey_attributes={}, active_waves=set()),
    }
    events = [
        CommEvent("a", "b", 1 * DAY),
        CommEvent("a", "b", 2 * DAY),
        CommEvent("b", "c", 2.5 * DAY),
    ]
    opinions = [
        OpinionRecord(pid, "euthanasia", w, "A")
        for pid in parts
        for w in (1, 2)
    ]
    return Dataset(participants=parts, events=events, opinions=opinions)


def test_survey_columns_deterministic_and_sorted():
    ds = feature_dataset()
    cols = survey_feature_columns(ds)
    assert cols == sorted(cols)
    assert "survey.age" in cols
    assert "survey.gender=Female" in cols
    assert "survey.gender=Male" in cols
    assert "survey.age_missing" in cols
    assert "survey.gender_missing" in cols


def test_survey_encoding_one_hot_and_missing():
    ds = feature_dataset()
    feats = extract_survey_features(ds, wave=2)
    a = feats["a"].values
    assert a["survey.gender=Female"] == 1.0
    assert a["survey.gender=Male"] == 0.0
    assert a["survey.age"] == 0.0 and a["survey.age_missing"] == 1.0
    b = feats["b"].values
    assert b["survey.age"] == 22.0 and b["survey.age_missing"] == 0.0
    assert b["survey.gender_missing"] == 1.0
    c = feats["c"].values
    assert c["survey.age_missing"] == 1.0 and c["survey.gender_missing"] == 1.0


def test_topology_columns_cover_battery():
    cols = topology_feature_columns()
    assert cols == [f"topo.{k}" for k in CENTRALITY_KINDS]
    assert len(cols) == 14


def test_topology_features_all_participants():
    ds = feature_dataset()
    net = build_network(ds, CogsnetParams())
    feats = extract_topology_features(ds, net, t=3 * DAY)
    assert set(feats) == {"a", "b", "c"}
    for vec in feats.values():
        assert set(vec.values) == set(topology_feature_columns())
    # a-b was reinforced twice, b-c once: a's weight sum reflects decay
    assert feats["a"].values["topo.cogsnet_weight_sum"] > 0


def test_hybrid_union_and_mismatch():
    ds = feature_dataset()
    net = build_network(ds, CogsnetParams())
    sv = extract_survey_features(ds, wave=1)
    tv = extract_topology_features(ds, net, t=3 * DAY)
    hy = assemble_hybrid(sv, tv)
    for pid, vec in hy.items():
        assert set(vec.values) == set(sv[pid].values) | set(tv[pid].values)
        assert vec.pipeline == "hybrid"
    with pytest.raises(ValueError):
        assemble_hybrid({k: sv[k] for k in ["a"]}, tv)


def _samples():
    return [
        MisclassificationSample("a", "euthanasia", 2, "A", "A"),
        MisclassificationSample("b", "euthanasia", 2, "A", "B"),
        MisclassificationSample("c", "euthanasia", 2, "A", "AB"),
    ]


@pytest.mark.parametrize("pipeline", PIPELINES)
def test_build_feature_matrix_shapes(pipeline):
    ds = feature_dataset()
    net = build_network(ds, CogsnetParams())
    wave_times = {w: w * 2 * DAY for w in range(1, 7)}
    matrix = build_feature_matrix(ds, net, _samples(), pipeline, wave_times)
    assert matrix.x.shape[0] == 3
    assert matrix.x.shape[1] == len(matrix.feature_names)
    assert matrix.keys == [("a", "euthanasia", 2), ("b", "euthanasia", 2),
                           ("c", "euthanasia", 2)]
    if pipeline == "topology":
        assert matrix.x.shape[1] == 14
    if pipeline == "hybrid":
        survey_cols = [n for n in matrix.feature_names if n.startswith("survey.")]
        topo_cols = [n for n in matrix.feature_names if n.startswith("topo.")]
        assert survey_cols and len(topo_cols) == 14


def test_unknown_pipeline_rejected():
    ds = feature_dataset()
    net = build_network(ds, CogsnetParams())
    with pytest.raises(ValueError):
        build_feature_matrix(ds, net, _samples(), "pca", {w: w for w in range(1, 7)})


def test_subset_and_exports(tmp_path):
    ds = feature_dataset()
    net = build_network(ds, CogsnetParams())
    wave_times = {w: w * 2 * DAY for w in range(1, 7)}
    matrix = build_feature_matrix(ds, net, _samples(), "topology", wave_times)
    sub = matrix.subset(["topo.degree", "topo.pagerank"])
    assert sub.feature_names == ["topo.degree", "topo.pagerank"]
    assert sub.x.shape == (3, 2)
    i = matrix.feature_names.index("topo.degree")
    assert np.array_equal(sub.x[:, 0], matrix.x[:, i])

    csv_path = tmp_path / "m.csv"
    matrix.to_csv(csv_path)
    header = csv_path.read_text().splitlines()[0]
    assert header.startswith("participant_id,question,wave,topo.")

    man_path = tmp_path / "m.json"
    matrix.save_manifest(man_path)
    manifest = json.loads(man_path.read_text())
    assert manifest["pipeline"] == "topology"
    assert manifest["columns"] == matrix.feature_names
