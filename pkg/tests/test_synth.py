"""Synthetic generator tests: determinism, planted marginals, homophily,
dropout, and the stance process targets."""

import numpy as np
import pytest

from fairdyn.data_model import MINORITY_NAMES, derive_minorities
from fairdyn.fairness import participant_volatility
from fairdyn.synth import (
    DEFAULT_MINORITY_FRACTIONS,
    SyntheticConfig,
    SyntheticConfigError,
    expected_intersection_pmf,
    generate_synthetic,
)


def test_determinism_same_seed():
    cfg = SyntheticConfig(n_participants=30)
    a = generate_synthetic(cfg, seed=5)
    b = generate_synthetic(cfg, seed=5)
    assert [e.sort_key() for e in a.events] == [e.sort_key() for e in b.events]
    assert [(o.participant_id, o.question, o.wave, o.stance) for o in a.opinions] == [
        (o.participant_id, o.question, o.wave, o.stance) for o in b.opinions
    ]
    assert a.provenance == b.provenance


def test_different_seed_differs():
    cfg = SyntheticConfig(n_participants=30)
    a = generate_synthetic(cfg, seed=5)
    b = generate_synthetic(cfg, seed=6)
    assert [e.sort_key() for e in a.events] != [e.sort_key() for e in b.events]


def test_flag_marginals_exact():
    cfg = SyntheticConfig(n_participants=200)
    ds = generate_synthetic(cfg, seed=1)
    members = derive_minorities(ds)
    for name in MINORITY_NAMES:
        count = sum(m.flags[name] for m in members)
        assert count == round(200 * DEFAULT_MINORITY_FRACTIONS[name])


def test_minority_round_trip_with_correlation():
    cfg = SyntheticConfig(n_participants=120, flag_correlation=0.3)
    ds = generate_synthetic(cfg, seed=2)
    members = derive_minorities(ds)
    for m in members:
        assert not m.undetermined
        for name in MINORITY_NAMES:
            count = sum(x.flags[name] for x in members)
            assert count == round(120 * DEFAULT_MINORITY_FRACTIONS[name])


def test_homophily_boosts_shared_flag_pairs():
    cfg = SyntheticConfig(
        n_participants=60, homophily_multiplier=50.0, events_per_participant=30.0
    )
    ds = generate_synthetic(cfg, seed=3)
    members = {m.participant_id: m for m in derive_minorities(ds)}
    shared = 0
    for ev in ds.events:
        a, b = members[ev.source].flags, members[ev.target].flags
        if any(a[n] and b[n] for n in MINORITY_NAMES):
            shared += 1
    assert shared / len(ds.events) > 0.8


def test_dropout_produces_missing_tail():
    cfg = SyntheticConfig(n_participants=80, dropout_hazard=0.2)
    ds = generate_synthetic(cfg, seed=4)
    dropped = 0
    for pid in ds.participants:
        stances = [ds.opinion(pid, "euthanasia", w) for w in range(1, 7)]
        assert stances[0] != "Missing"  # wave 1 always answered
        if "Missing" in stances:
            dropped += 1
            tail = stances[stances.index("Missing"):]
            assert all(s == "Missing" for s in tail)
    assert dropped > 0


def test_planted_misprediction_rate():
    cfg = SyntheticConfig(
        n_participants=400,
        misprediction_targets={"Ethnicity": {"jobguar": 0.7}},
    )
    ds = generate_synthetic(cfg, seed=6)
    members = {m.participant_id: m for m in derive_minorities(ds)}
    hits, total = 0, 0
    for pid, m in members.items():
        if not m.flags["Ethnicity"]:
            continue
        base = ds.opinion(pid, "jobguar", 1)
        for w in range(2, 7):
            total += 1
            hits += ds.opinion(pid, "jobguar", w) != base
    assert hits / total == pytest.approx(0.7, abs=0.05)


def test_planted_volatility():
    cfg = SyntheticConfig(
        n_participants=400,
        volatility_targets={"ParentsEducation": {"jobguar": 1.57}},
        misprediction_base=0.5,
        intersectionality_slope=0.0,
    )
    ds = generate_synthetic(cfg, seed=7)
    members = derive_minorities(ds)
    vals = [
        participant_volatility(ds, m.participant_id, "jobguar")
        for m in members
        if m.flags["ParentsEducation"]
    ]
    assert np.mean(vals) == pytest.approx(1.57, abs=0.25)


def test_minority_opinion_rate_planted():
    cfg = SyntheticConfig(
        n_participants=300,
        minority_opinion_rates={"ParentsReligion": {"euthanasia": 0.6}},
        default_minority_opinion_rate=0.1,
    )
    ds = generate_synthetic(cfg, seed=8)
    members = derive_minorities(ds)
    in_group = [
        ds.opinion(m.participant_id, "euthanasia", 1) == "B"
        for m in members
        if m.flags["ParentsReligion"]
    ]
    assert np.mean(in_group) == pytest.approx(0.6, abs=0.1)


def test_intersection_pmf_is_probability():
    pmf = expected_intersection_pmf(SyntheticConfig())
    assert pmf.sum() == pytest.approx(1.0)
    assert len(pmf) == len(MINORITY_NAMES) + 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_participants": 1},
        {"minority_fractions": {"Gender": 1.5}},
        {"minority_fractions": {"Nope": 0.5}},
        {"flag_correlation": 1.0},
        {"homophily_multiplier": 0.0},
        {"dropout_hazard": 1.0},
        {"misprediction_targets": {"Gender": {"euthanasia": 1.5}}},
        {"volatility_targets": {"Gender": {"badq": 1.0}}},
    ],
)
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(SyntheticConfigError):
        SyntheticConfig(**kwargs).validate()


def test_config_hash_stable_and_sensitive():
    a = SyntheticConfig()
    b = SyntheticConfig()
    c = SyntheticConfig(n_participants=201)
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
