"""Cognitively-decaying temporal network.

Edge weights are reinforced by communication events and decay between
events through an exponential forgetting curve; edges whose decayed
weight falls below a removal threshold are pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graphs import WeightedGraph

SECONDS_PER_DAY = 86400.0


class OutOfOrderEventError(ValueError):
    pass


@dataclass(frozen=True)
class CogsnetParams:
    """Reinforcement peak mu, removal threshold theta, forgetting rate
    lam (per second). Defaults are conventions, not measured values."""

    mu: float = 0.4
    theta: float = 0.1
    lam: float = math.log(2) / (7 * SECONDS_PER_DAY)
    forgetting: str = "exponential"

    def __post_init__(self):
        if not (0 < self.mu <= 1):
            raise ValueError(f"mu must be in (0, 1], got {self.mu}")
        if not (0 < self.theta < self.mu):
            raise ValueError(f"theta must be in (0, mu), got {self.theta}")
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.forgetting != "exponential":
            raise ValueError(f"unsupported forgetting kernel: {self.forgetting}")

    @classmethod
    def from_config(cls, cfg: dict) -> "CogsnetParams":
        """Accepts keys mu, theta and lambda_per_day."""
        kwargs = {}
        if "mu" in cfg:
            kwargs["mu"] = float(cfg["mu"])
        if "theta" in cfg:
            kwargs["theta"] = float(cfg["theta"])
        if "lambda_per_day" in cfg:
            kwargs["lam"] = float(cfg["lambda_per_day"]) / SECONDS_PER_DAY
        return cls(**kwargs)

    def forgetting_factor(self, delta_t: float) -> float:
        """e^(-lambda * delta_t); equals 1 at delta_t = 0."""
        if delta_t < 0:
            raise ValueError(f"negative time delta: {delta_t}")
        return math.exp(-self.lam * delta_t)


def forgetting(params: CogsnetParams, delta_t: float) -> float:
    return params.forgetting_factor(delta_t)


@dataclass
class EdgeState:
    weight_at_last_event: float
    last_event_time: float


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


@dataclass
class TemporalNetwork:
    """Event-driven network state. Events must be ingested in
    non-decreasing timestamp order (single writer)."""

    params: CogsnetParams
    participants: list = field(default_factory=list)
    edges: dict = field(default_factory=dict)  # (u, v) sorted -> EdgeState
    clock: float = 0.0

    def process_event(self, event) -> None:
        t = event.timestamp
        if t < self.clock:
            raise OutOfOrderEventError(
                f"event at t={t} precedes network clock t={self.clock}"
            )
        mu = self.params.mu
        key = _pair(event.source, event.target)
        state = self.edges.get(key)
        if state is None or self._decayed(state, t) < self.params.theta:
            # new edge, or a pruned edge restarting from scratch
            self.edges[key] = EdgeState(mu, t)
        else:
            decay = self.params.forgetting_factor(t - state.last_event_time)
            state.weight_at_last_event = mu + state.weight_at_last_event * decay * (1 - mu)
            state.last_event_time = t
        self.clock = t

    def process_events(self, events) -> None:
        for ev in events:
            self.process_event(ev)

    def _decayed(self, state: EdgeState, t: float) -> float:
        return state.weight_at_last_event * self.params.forgetting_factor(
            t - state.last_event_time
        )

    def weight_at(self, u, v, t: float) -> float:
        """Decayed weight of the (u, v) edge at time t; 0 if pruned or absent."""
        state = self.edges.get(_pair(u, v))
        if state is None:
            return 0.0
        if t < state.last_event_time:
            raise ValueError(
                f"query at t={t} precedes last event at t={state.last_event_time}"
            )
        w = self._decayed(state, t)
        return w if w >= self.params.theta else 0.0

    def snapshot_at(self, t: float) -> WeightedGraph:
        """Weighted graph over all participants at time t.

        Edges whose last event lies after t are skipped: the snapshot is
        exact for t >= clock and conservative for earlier queries.
        """
        g = WeightedGraph()
        for p in self.participants:
            g.add_node(p)
        for (u, v), state in sorted(self.edges.items()):
            if state.last_event_time > t:
                continue
            w = self._decayed(state, t)
            if w >= self.params.theta:
                g.add_edge(u, v, w)
        return g


def build_network(dataset, params: CogsnetParams) -> TemporalNetwork:
    """Ingest every event of a dataset into a fresh network."""
    net = TemporalNetwork(params=params, participants=sorted(dataset.participants))
    net.process_events(dataset.events)
    return net


def export_snapshot_csv(graph: WeightedGraph, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "v", "weight"])
        for u, v, w in sorted(graph.edges()):
            writer.writerow([u, v, repr(w)])
