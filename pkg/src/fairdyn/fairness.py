"""Exploratory and fairness metrics plus audit-report assembly.

Reference F1 scores reported by the original study are embedded as
read-only comparison rows; they are citations, never thresholds, since
the underlying restricted dataset is not available.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data_model import MINORITY_NAMES, QUESTION_TYPOLOGY, QUESTIONS
from .ml import f1

# Published general-population reference F1 per pipeline (best model per
# pipeline: stratified RF for survey and hybrid, decision tree for
# topology). Non-binding citation rows.
REFERENCE_GENERAL_F1 = {
    "survey": {
        "euthanasia": 0.5602,
        "fssocsec": 0.5708,
        "fswelfare": 0.5892,
        "jobguar": 0.5318,
        "marijuana": 0.5757,
        "toomucheqrights": 0.5678,
    },
    "topology": {
        "euthanasia": 0.5524,
        "fssocsec": 0.4555,
        "fswelfare": 0.4410,
        "jobguar": 0.5244,
        "marijuana": 0.5241,
        "toomucheqrights": 0.6225,
    },
    "hybrid": {
        "euthanasia": 0.5147,
        "fssocsec": 0.4839,
        "fswelfare": 0.6021,
        "jobguar": 0.5161,
        "marijuana": 0.7327,
        "toomucheqrights": 0.5835,
    },
}

# Reported misprediction-rate endpoints of the intersectionality curves
# (one minority status -> five concurrent statuses).
REFERENCE_INTERSECTIONALITY = {
    "euthanasia": {"k1": 0.492, "k5": 0.759},
    "jobguar": {"k1": 0.471, "k5": 0.621},
}

REFERENCE_TAG = "published-study-reference (non-binding)"


class FairnessError(ValueError):
    pass


@dataclass
class VolatilityStat:
    question: str
    group: str
    mean_changes: float
    n: int


@dataclass
class IntersectionalityCurve:
    question: str
    points: list  # (intersection_count, misprediction_rate, n)


@dataclass
class SubgroupReport:
    question: str
    minority_name: str
    pipeline: str
    f1_subgroup: float
    f1_general: float
    n_subgroup: int
    n_general: int
    degenerate: bool = False
    paper_reference_f1: float | None = None
    reference_tag: str | None = None


def _membership_index(memberships):
    return {m.participant_id: m for m in memberships}


def _stance_counts(opinions, question, wave_policy):
    counts = {"A": 0, "B": 0, "AB": 0}
    for op in opinions:
        if op.question != question or op.stance == "Missing":
            continue
        if wave_policy == "first" and op.wave != 1:
            continue
        if isinstance(wave_policy, int) and op.wave != wave_policy:
            continue
        counts[op.stance] += 1
    return counts


def minority_pole(opinions, question, wave_policy="all") -> str:
    """The less common of the two poles; AB never defines the pole."""
    counts = _stance_counts(opinions, question, wave_policy)
    if counts["A"] + counts["B"] + counts["AB"] == 0:
        raise FairnessError(f"no recorded answers for question {question!r}")
    return "B" if counts["B"] <= counts["A"] else "A"


def minority_opinion_rate(opinions, memberships, question, wave_policy="all") -> dict:
    """Fraction of each group (flag and complement) holding the globally
    less common pole. Keys are '<name>' and '<name>:majority'."""
    pole = minority_pole(opinions, question, wave_policy)
    members = _membership_index(memberships)
    holders = {}
    for op in opinions:
        if op.question != question or op.stance == "Missing":
            continue
        if wave_policy == "first" and op.wave != 1:
            continue
        if isinstance(wave_policy, int) and op.wave != wave_policy:
            continue
        holders.setdefault(op.participant_id, []).append(op.stance == pole)
    rates = {}
    for name in MINORITY_NAMES:
        for label, want in ((name, True), (f"{name}:majority", False)):
            sel = [
                hit
                for pid, hits in holders.items()
                if pid in members and members[pid].flags.get(name, False) == want
                for hit in hits
            ]
            if sel:
                rates[label] = float(np.mean(sel))
    return rates


def participant_volatility(dataset, participant_id, question) -> int:
    """Stance changes over consecutively answered waves; a Missing wave
    breaks adjacency."""
    changes = 0
    prev = None
    for wave in range(1, 7):
        stance = dataset.opinion(participant_id, question, wave)
        if stance == "Missing":
            prev = None
            continue
        if prev is not None and stance != prev:
            changes += 1
        prev = stance
    return changes


def opinion_volatility(dataset, memberships, question) -> list:
    """Group-mean stance changes for every flag and its complement."""
    members = _membership_index(memberships)
    per_pid = {
        pid: participant_volatility(dataset, pid, question)
        for pid in sorted(dataset.participants)
    }
    stats = []
    for name in MINORITY_NAMES:
        for label, want in ((name, True), (f"{name}:majority", False)):
            vals = [
                v
                for pid, v in per_pid.items()
                if pid in members and members[pid].flags.get(name, False) == want
            ]
            if vals:
                stats.append(
                    VolatilityStat(
                        question=question,
                        group=label,
                        mean_changes=float(np.mean(vals)),
                        n=len(vals),
                    )
                )
    return stats


def baseline_misprediction_rate(samples, memberships) -> dict:
    """(question, group) -> misprediction rate over labeled samples."""
    if not samples:
        raise FairnessError("no misclassification samples")
    members = _membership_index(memberships)
    rates = {}
    questions = sorted({s.question for s in samples})
    for question in questions:
        qs = [s for s in samples if s.question == question]
        for name in MINORITY_NAMES:
            for label, want in ((name, True), (f"{name}:majority", False)):
                sel = [
                    s.target
                    for s in qs
                    if s.participant_id in members
                    and members[s.participant_id].flags.get(name, False) == want
                ]
                if sel:
                    rates[(question, label)] = float(np.mean(sel))
    return rates


def misprediction_by_intersectionality(samples, memberships, question) -> IntersectionalityCurve:
    members = _membership_index(memberships)
    buckets = {}
    for s in samples:
        if s.question != question:
            continue
        m = members.get(s.participant_id)
        if m is None:
            continue
        buckets.setdefault(m.intersection_count, []).append(s.target)
    points = [
        (k, float(np.mean(vals)), len(vals)) for k, vals in sorted(buckets.items())
    ]
    return IntersectionalityCurve(question=question, points=points)


def subgroup_f1_report(model, x_test, y_test, test_pids, memberships, question,
                       pipeline) -> list:
    """General-population F1 plus the restriction to each minority flag."""
    y_test = np.asarray(y_test, dtype=int)
    y_pred = model.predict(x_test)
    general = f1(y_test, y_pred)
    members = _membership_index(memberships)
    reference = REFERENCE_GENERAL_F1.get(pipeline, {}).get(question)
    reports = [
        SubgroupReport(
            question=question,
            minority_name="general",
            pipeline=pipeline,
            f1_subgroup=general,
            f1_general=general,
            n_subgroup=len(y_test),
            n_general=len(y_test),
            paper_reference_f1=reference,
            reference_tag=REFERENCE_TAG if reference is not None else None,
        )
    ]
    for name in MINORITY_NAMES:
        mask = np.array(
            [
                pid in members and members[pid].flags.get(name, False)
                for pid in test_pids
            ]
        )
        n_sub = int(mask.sum())
        if n_sub == 0:
            reports.append(
                SubgroupReport(
                    question=question,
                    minority_name=name,
                    pipeline=pipeline,
                    f1_subgroup=0.0,
                    f1_general=general,
                    n_subgroup=0,
                    n_general=len(y_test),
                    degenerate=True,
                )
            )
            continue
        sub_true = y_test[mask]
        sub_pred = y_pred[mask]
        degenerate = bool(sub_true.sum() == 0 and sub_pred.sum() == 0)
        reports.append(
            SubgroupReport(
                question=question,
                minority_name=name,
                pipeline=pipeline,
                f1_subgroup=f1(sub_true, sub_pred),
                f1_general=general,
                n_subgroup=n_sub,
                n_general=len(y_test),
                degenerate=degenerate,
            )
        )
    return reports


def compile_audit_report(question_blocks: dict, run_info: dict,
                         convention_flags: dict) -> dict:
    """Nested report document; see schemas/audit_report.schema.json."""
    questions = {}
    for question, block in question_blocks.items():
        if question not in QUESTIONS:
            raise FairnessError(f"unknown question {question!r}")
        questions[question] = {
            "typology": QUESTION_TYPOLOGY[question],
            **block,
        }
    return {
        "run": run_info,
        "convention_flags": convention_flags,
        "reference": {
            "general_f1": REFERENCE_GENERAL_F1,
            "intersectionality": REFERENCE_INTERSECTIONALITY,
            "tag": REFERENCE_TAG,
        },
        "questions": questions,
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


def report_long_csv(report: dict, path) -> None:
    """Plot-ready long format: question, pipeline, subgroup, metric, value."""
    rows = []
    for question, block in sorted(report["questions"].items()):
        eda = block.get("eda", {})
        for stat in eda.get("volatility", []):
            rows.append((question, "", stat["group"], "volatility", stat["mean_changes"]))
        for group, rate in sorted(eda.get("minority_opinion_rate", {}).items()):
            rows.append((question, "", group, "minority_opinion_rate", rate))
        for group, rate in sorted(eda.get("baseline_misprediction", {}).items()):
            rows.append((question, "", group, "baseline_misprediction", rate))
        for k, rate, n in eda.get("intersectionality_curve", []):
            rows.append((question, "", f"k={k}", "misprediction_rate", rate))
        for pipeline, pblock in sorted(block.get("pipelines", {}).items()):
            for sub in pblock.get("subgroups", []):
                rows.append(
                    (question, pipeline, sub["minority_name"], "f1", sub["f1_subgroup"])
                )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["question", "pipeline", "subgroup", "metric", "value"])
        writer.writerows(rows)


def load_report_schema() -> dict:
    path = Path(__file__).parent / "schemas" / "audit_report.schema.json"
    with open(path) as fh:
        return json.load(fh)
