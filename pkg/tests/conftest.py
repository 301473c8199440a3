import numpy as np
import pytest

from fairdyn.data_model import (
    DEFAULT_FB_PRIVACY,
    Dataset,
    OpinionRecord,
    Participant,
)
from fairdyn.graphs import WeightedGraph

# Hand-checked 10-participant fixture for the EDA metrics.
#
# Stance sequences (question: euthanasia, waves 1..6; '-' = Missing):
#   t0 A A A A A A   flags {Gender}          volatility 0  mispred 0/5
#   t1 A B B B B B   flags {Gender,Ethnicity} volatility 1  mispred 5/5
#   t2 A A B B A A   flags {Ethnicity}        volatility 2  mispred 2/5
#   t3 B - B A A B   flags {}                 volatility 2  mispred 2/4
#   t4 AB AB AB AB AB AB  {}                  volatility 0  mispred 0/5
#   t5 A A A A A B   {}                       volatility 1  mispred 1/5
#   t6 B B B B B B   {}                       volatility 0  mispred 0/5
#   t7 A A A A A A   {}                       volatility 0  mispred 0/5
#   t8 A AB A A A A  {}                       volatility 2  mispred 1/5
#   t9 A A A A A A   {}                       volatility 0  mispred 0/5
# Pooled stances: A=35, B=17, AB=7 -> minority pole is B.
TINY_SEQUENCES = {
    "t0": ["A", "A", "A", "A", "A", "A"],
    "t1": ["A", "B", "B", "B", "B", "B"],
    "t2": ["A", "A", "B", "B", "A", "A"],
    "t3": ["B", None, "B", "A", "A", "B"],
    "t4": ["AB", "AB", "AB", "AB", "AB", "AB"],
    "t5": ["A", "A", "A", "A", "A", "B"],
    "t6": ["B", "B", "B", "B", "B", "B"],
    "t7": ["A", "A", "A", "A", "A", "A"],
    "t8": ["A", "AB", "A", "A", "A", "A"],
    "t9": ["A", "A", "A", "A", "A", "A"],
}


def tiny_fixture() -> Dataset:
    base_attrs = {
        "fbprivacy": DEFAULT_FB_PRIVACY,
        "english_native": "yes",
        "parents_income_bracket": "75-100k",
        "mother_education": "College graduate",
        "father_education": "College graduate",
        "mother_religion": "Roman Catholic",
        "father_religion": "Roman Catholic",
        "ethnicity": "White/Caucasian",
        "gender": "Male",
    }
    overrides = {
        "t0": {"gender": "Female"},
        "t1": {"gender": "Female", "ethnicity": "Asian"},
        "t2": {"ethnicity": "Asian"},
    }
    participants = {}
    opinions = []
    for pid, seq in TINY_SEQUENCES.items():
        attrs = dict(base_attrs)
        attrs.update(overrides.get(pid, {}))
        participants[pid] = Participant(
            id=pid, survey_attributes={1: attrs}, active_waves={1}
        )
        for wave, stance in enumerate(seq, start=1):
            if stance is not None:
                opinions.append(OpinionRecord(pid, "euthanasia", wave, stance))
    return Dataset(participants=participants, events=[], opinions=opinions)


def random_weighted_graph(n, rng, p=0.45, min_w=0.1, max_w=1.0):
    """Random graph with distinct edge weights (avoids path ties)."""
    g = WeightedGraph()
    for i in range(n):
        g.add_node(f"n{i}")
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                g.add_edge(f"n{i}", f"n{j}", float(rng.uniform(min_w, max_w)))
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
