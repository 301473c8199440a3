"""EDA/fairness metric tests against hand-computed fixture values."""

import json

import jsonschema
import numpy as np
import pytest

from fairdyn.data_model import derive_minorities
from fairdyn.fairness import (
    FairnessError,
    REFERENCE_GENERAL_F1,
    REFERENCE_INTERSECTIONALITY,
    baseline_misprediction_rate,
    compile_audit_report,
    load_report_schema,
    minority_opinion_rate,
    minority_pole,
    misprediction_by_intersectionality,
    opinion_volatility,
    participant_volatility,
    report_long_csv,
    report_to_json,
    subgroup_f1_report,
)
from fairdyn.opinion_sim import MisclassificationSample

from conftest import TINY_SEQUENCES, tiny_fixture


def persistence_samples(dataset, question="euthanasia"):
    """Wave-1 persistence predictor labels, built directly."""
    samples = []
    for pid in sorted(dataset.participants):
        base = dataset.opinion(pid, question, 1)
        for wave in range(2, 7):
            truth = dataset.opinion(pid, question, wave)
            if truth == "Missing":
                continue
            samples.append(
                MisclassificationSample(pid, question, wave, truth, base)
            )
    return samples


@pytest.fixture(scope="module")
def fixture_data():
    ds = tiny_fixture()
    return ds, derive_minorities(ds)


def test_minority_pole_is_b(fixture_data):
    ds, _ = fixture_data
    assert minority_pole(ds.opinions, "euthanasia") == "B"


def test_participant_volatility_values(fixture_data):
    ds, _ = fixture_data
    expected = {"t0": 0, "t1": 1, "t2": 2, "t3": 2, "t4": 0,
                "t5": 1, "t6": 0, "t7": 0, "t8": 2, "t9": 0}
    for pid, want in expected.items():
        assert participant_volatility(ds, pid, "euthanasia") == want


def test_group_volatility_exact(fixture_data):
    ds, members = fixture_data
    stats = {s.group: s for s in opinion_volatility(ds, members, "euthanasia")}
    assert stats["Gender"].mean_changes == (0 + 1) / 2
    assert stats["Gender"].n == 2
    assert stats["Gender:majority"].mean_changes == 7 / 8
    assert stats["Ethnicity"].mean_changes == (1 + 2) / 2
    assert stats["Ethnicity:majority"].mean_changes == 5 / 8


def test_minority_opinion_rate_exact(fixture_data):
    ds, members = fixture_data
    rates = minority_opinion_rate(ds.opinions, members, "euthanasia")
    assert rates["Gender"] == 5 / 12
    assert rates["Gender:majority"] == 12 / 47
    assert rates["Ethnicity"] == 7 / 12
    assert rates["Ethnicity:majority"] == 10 / 47
    # nobody holds the FBPrivacy flag in the fixture
    assert "FBPrivacy" not in rates
    assert rates["FBPrivacy:majority"] == 17 / 59


def test_baseline_misprediction_exact(fixture_data):
    ds, members = fixture_data
    samples = persistence_samples(ds)
    rates = baseline_misprediction_rate(samples, members)
    q = "euthanasia"
    assert rates[(q, "Gender")] == 5 / 10
    assert rates[(q, "Gender:majority")] == 6 / 39
    assert rates[(q, "Ethnicity")] == 7 / 10
    assert rates[(q, "Ethnicity:majority")] == 4 / 39


def test_intersectionality_curve_exact(fixture_data):
    ds, members = fixture_data
    curve = misprediction_by_intersectionality(
        persistence_samples(ds), members, "euthanasia"
    )
    assert curve.points == [(0, 4 / 34, 34), (1, 2 / 10, 10), (2, 5 / 5, 5)]


def test_empty_samples_rejected(fixture_data):
    _, members = fixture_data
    with pytest.raises(FairnessError):
        baseline_misprediction_rate([], members)


class _ConstantModel:
    def __init__(self, value):
        self.value = value

    def predict(self, x):
        return np.full(len(x), self.value, dtype=int)


def test_subgroup_f1_report_general_and_restriction(fixture_data):
    _, members = fixture_data
    pids = ["t0", "t1", "t2", "t3", "t4", "t5"]
    y = np.array([1, 1, 0, 0, 1, 0])
    model = _ConstantModel(1)
    reports = subgroup_f1_report(
        model, np.zeros((6, 1)), y, pids, members, "euthanasia", "survey"
    )
    by_name = {r.minority_name: r for r in reports}
    # all-ones predictor: F1 = 2*3 / (2*3 + 3 + 0) = 2/3
    assert by_name["general"].f1_subgroup == pytest.approx(2 / 3)
    assert by_name["general"].paper_reference_f1 == 0.5602
    assert by_name["general"].reference_tag is not None
    # Gender subgroup = t0, t1 -> y [1,1], predicted [1,1] -> F1 1.0
    assert by_name["Gender"].f1_subgroup == 1.0
    assert by_name["Gender"].n_subgroup == 2
    # ParentsIncome subgroup empty -> degenerate
    assert by_name["ParentsIncome"].degenerate is True
    assert by_name["ParentsIncome"].n_subgroup == 0


def test_degenerate_zero_positive_subgroup(fixture_data):
    _, members = fixture_data
    pids = ["t0", "t1"]  # the Gender subgroup
    y = np.array([0, 0])
    reports = subgroup_f1_report(
        _ConstantModel(0), np.zeros((2, 1)), y, pids, members, "euthanasia",
        "topology",
    )
    by_name = {r.minority_name: r for r in reports}
    assert by_name["Gender"].degenerate is True
    assert by_name["Gender"].f1_subgroup == 0.0


def test_reference_tables_shape():
    for pipeline, table in REFERENCE_GENERAL_F1.items():
        assert len(table) == 6
        for v in table.values():
            assert 0.0 < v < 1.0
    assert REFERENCE_INTERSECTIONALITY["euthanasia"]["k5"] == 0.759


def _minimal_report():
    blocks = {
        "euthanasia": {
            "eda": {
                "volatility": [{"group": "Gender", "mean_changes": 0.5, "n": 2}],
                "minority_opinion_rate": {"Gender": 0.4},
                "baseline_misprediction": {"Gender": 0.5},
                "intersectionality_curve": [[0, 0.1, 30], [1, 0.2, 10]],
            },
            "pipelines": {
                "survey": {
                    "model_family": "stratified_rf",
                    "subgroups": [
                        {
                            "minority_name": "general",
                            "f1_subgroup": 0.5,
                            "f1_general": 0.5,
                            "n_subgroup": 10,
                            "n_general": 10,
                            "degenerate": False,
                        }
                    ],
                }
            },
        }
    }
    return compile_audit_report(
        blocks,
        run_info={"seed": 1, "config_hash": "abc"},
        convention_flags={"centrality_mode": "weighted"},
    )


def test_report_schema_validates():
    report = _minimal_report()
    jsonschema.validate(report, load_report_schema())


def test_report_json_deterministic():
    assert report_to_json(_minimal_report()) == report_to_json(_minimal_report())


def test_report_typology_attached_and_unknown_question_rejected():
    report = _minimal_report()
    assert report["questions"]["euthanasia"]["typology"] == "Consensus"
    with pytest.raises(FairnessError):
        compile_audit_report({"badq": {}}, {}, {})


def test_long_csv_round_trip(tmp_path):
    report = _minimal_report()
    path = tmp_path / "long.csv"
    report_long_csv(report, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "question,pipeline,subgroup,metric,value"
    metrics = {line.split(",")[3] for line in lines[1:]}
    assert metrics == {
        "volatility", "minority_opinion_rate", "baseline_misprediction",
        "misprediction_rate", "f1",
    }


def test_fixture_sequences_consistent():
    # guard: the documented sequences in the fixture stay in sync
    ds = tiny_fixture()
    for pid, seq in TINY_SEQUENCES.items():
        for wave, stance in enumerate(seq, start=1):
            want = stance if stance is not None else "Missing"
            assert ds.opinion(pid, "euthanasia", wave) == want
