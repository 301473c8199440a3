"""Temporal network reinforcement/decay unit tests."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from fairdyn.cogsnet import (
    SECONDS_PER_DAY,
    CogsnetParams,
    OutOfOrderEventError,
    TemporalNetwork,
    build_network,
    forgetting,
)
from fairdyn.data_model import CommEvent


def ev(a, b, t):
    return CommEvent(source=a, target=b, timestamp=float(t))


def make_net(**kwargs):
    params = CogsnetParams(**kwargs)
    return TemporalNetwork(params=params, participants=["a", "b", "c"])


def test_defaults():
    p = CogsnetParams()
    assert p.mu == 0.4
    assert p.theta == 0.1
    assert p.lam == pytest.approx(math.log(2) / (7 * SECONDS_PER_DAY))


def test_half_life_seven_days():
    p = CogsnetParams()
    assert forgetting(p, 7 * SECONDS_PER_DAY) == pytest.approx(0.5)
    assert forgetting(p, 0.0) == 1.0


def test_first_event_weight_is_mu():
    net = make_net()
    net.process_event(ev("a", "b", 10.0))
    assert net.weight_at("a", "b", 10.0) == pytest.approx(0.4)


def test_two_event_closed_form():
    net = make_net()
    net.process_event(ev("a", "b", 0.0))
    dt = 3 * SECONDS_PER_DAY
    net.process_event(ev("a", "b", dt))
    mu, lam = net.params.mu, net.params.lam
    expected = mu + mu * math.exp(-lam * dt) * (1 - mu)
    assert net.weight_at("a", "b", dt) == pytest.approx(expected, abs=1e-12)


def test_weight_bounded_by_one():
    net = make_net()
    for k in range(50):
        net.process_event(ev("a", "b", k * 100.0))
    assert net.weight_at("a", "b", 5000.0) <= 1.0


def test_prune_below_theta():
    net = make_net()
    net.process_event(ev("a", "b", 0.0))
    # 0.4 * 2^(-t/7d) < 0.1 after 2 half-lives
    t = 15 * SECONDS_PER_DAY
    assert net.weight_at("a", "b", t) == 0.0


def test_pruned_edge_restarts_at_mu():
    net = make_net()
    net.process_event(ev("a", "b", 0.0))
    t = 30 * SECONDS_PER_DAY  # long after pruning
    net.process_event(ev("a", "b", t))
    assert net.weight_at("a", "b", t) == pytest.approx(0.4)


def test_out_of_order_rejected():
    net = make_net()
    net.process_event(ev("a", "b", 100.0))
    with pytest.raises(OutOfOrderEventError):
        net.process_event(ev("a", "c", 50.0))


def test_weight_query_before_last_event_rejected():
    net = make_net()
    net.process_event(ev("a", "b", 100.0))
    with pytest.raises(ValueError):
        net.weight_at("a", "b", 50.0)


def test_edge_key_is_undirected():
    net = make_net()
    net.process_event(ev("a", "b", 0.0))
    net.process_event(ev("b", "a", 10.0))
    assert len(net.edges) == 1


def test_snapshot_contains_live_edges_only():
    net = make_net()
    net.process_event(ev("a", "b", 0.0))
    net.process_event(ev("b", "c", 20 * SECONDS_PER_DAY))
    g = net.snapshot_at(21 * SECONDS_PER_DAY)
    assert set(g.nodes) == {"a", "b", "c"}
    edges = {(u, v) for u, v, _ in g.edges()}
    assert ("b", "c") in edges or ("c", "b") in edges
    assert not any({"a", "b"} == {u, v} for u, v, _ in g.edges())


def test_build_network_ingests_all_events():
    from fairdyn.data_model import Dataset, Participant

    parts = {x: Participant(id=x) for x in ("a", "b")}
    ds = Dataset(participants=parts, events=[ev("a", "b", 5.0)], opinions=[])
    net = build_network(ds, CogsnetParams())
    assert net.clock == 5.0
    assert net.weight_at("a", "b", 5.0) == pytest.approx(0.4)


@settings(max_examples=200, deadline=None)
@given(
    mu=st.floats(0.05, 1.0),
    theta_frac=st.floats(0.01, 0.95),
    lam_days=st.floats(0.5, 30.0),
    gaps=st.lists(st.floats(0.0, 40.0), min_size=1, max_size=12),
)
def test_weights_stay_in_unit_interval(mu, theta_frac, lam_days, gaps):
    params = CogsnetParams(
        mu=mu, theta=mu * theta_frac, lam=math.log(2) / (lam_days * SECONDS_PER_DAY)
    )
    net = TemporalNetwork(params=params, participants=["a", "b"])
    t = 0.0
    for g in gaps:
        t += g * SECONDS_PER_DAY
        net.process_event(ev("a", "b", t))
        w = net.weight_at("a", "b", t)
        assert 0.0 < w <= 1.0 + 1e-12
