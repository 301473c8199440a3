"""Hybrid opinion dynamics over temporal-network snapshots.

Agents carry a continuous two-component conviction vector and express a
discrete stance (A, B, or the mixed AB) gated by a threshold gamma. A
classical word-adoption game is included as the discrete baseline.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .cogsnet import SECONDS_PER_DAY, TemporalNetwork
from .data_model import Dataset, QUESTIONS


@dataclass(frozen=True)
class CodingParams:
    gamma: float = 0.2
    delta: float = 0.1
    interactions_per_day: float = 1.0
    init_policy: str = "FromWave1"

    def __post_init__(self):
        if not (0 <= self.gamma < 1):
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if not (0 < self.delta <= 1):
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if self.interactions_per_day < 0:
            raise ValueError("interactions_per_day must be non-negative")
        if self.init_policy not in ("FromWave1", "Uniform"):
            raise ValueError(f"unknown init policy {self.init_policy!r}")


@dataclass
class AgentState:
    o_a: float
    o_b: float

    def express(self, gamma: float) -> str:
        return express((self.o_a, self.o_b), gamma)


def express(opinion_vector, gamma: float) -> str:
    """Discrete stance: the dominant side when |o_A - o_B| > gamma,
    otherwise the mixed state AB (boundary inclusive)."""
    o_a, o_b = opinion_vector
    diff = o_a - o_b
    if abs(diff) <= gamma:
        return "AB"
    return "A" if diff > 0 else "B"


def _clamped_add(value: float, delta: float) -> float:
    return min(1.0, value + delta)


def interact(speaker: AgentState, listener: AgentState, params: CodingParams, rng):
    """One speaker->listener exchange; returns updated (speaker, listener).

    The speaker utters its expressed stance (a fair coin resolves AB).
    The listener always reinforces the uttered side; the speaker
    reinforces too when the listener already expressed that side or AB.
    """
    uttered = speaker.express(params.gamma)
    if uttered == "AB":
        uttered = "A" if rng.random() < 0.5 else "B"
    listener_pre = listener.express(params.gamma)
    success = listener_pre in (uttered, "AB")

    d = params.delta
    if uttered == "A":
        new_listener = AgentState(_clamped_add(listener.o_a, d), listener.o_b)
        new_speaker = (
            AgentState(_clamped_add(speaker.o_a, d), speaker.o_b) if success else speaker
        )
    else:
        new_listener = AgentState(listener.o_a, _clamped_add(listener.o_b, d))
        new_speaker = (
            AgentState(speaker.o_a, _clamped_add(speaker.o_b, d)) if success else speaker
        )
    return new_speaker, new_listener


INIT_VECTORS = {"A": (1.0, 0.0), "B": (0.0, 1.0), "AB": (0.5, 0.5)}


@dataclass
class SimulationTrace:
    question: str
    rng_seed: int
    params: CodingParams
    model: str  # "coding" or "naming_game"
    # participant -> list of (timestamp, state), timestamps ascending
    series: dict = field(default_factory=dict)
    horizon: float = 0.0  # last simulated instant; states persist up to it

    def record(self, participant: str, t: float, state: str) -> None:
        seq = self.series.setdefault(participant, [])
        if not seq or seq[-1][1] != state:
            seq.append((t, state))

    def state_at(self, participant: str, t: float) -> str:
        seq = self.series.get(participant)
        if not seq:
            raise KeyError(f"no trace for participant {participant!r}")
        if t < seq[0][0]:
            raise ValueError(
                f"query at t={t} precedes trace start t={seq[0][0]} for {participant!r}"
            )
        times = [ts for ts, _ in seq]
        idx = bisect.bisect_right(times, t) - 1
        return seq[idx][1]

    @property
    def start_time(self) -> float:
        return min(seq[0][0] for seq in self.series.values())

    @property
    def end_time(self) -> float:
        last = max(seq[-1][0] for seq in self.series.values())
        return max(last, self.horizon)


@dataclass(frozen=True)
class MisclassificationSample:
    participant_id: str
    question: str
    wave: int
    ground_truth: str
    predicted: str

    @property
    def target(self) -> bool:
        return self.ground_truth != self.predicted


def _init_states(dataset, question, params, rng):
    states = {}
    for pid in sorted(dataset.participants):
        if params.init_policy == "Uniform":
            vec = (rng.random(), rng.random())
        else:
            stance = dataset.opinion(pid, question, 1)
            vec = INIT_VECTORS.get(stance)
            if vec is None:  # Missing wave-1 answer
                vec = (rng.random(), rng.random())
        states[pid] = AgentState(*vec)
    return states


def _daily_interactions(live_edges, params, rng):
    """Ordered (speaker, listener) draws for one simulated day."""
    out = []
    for (u, v), w in live_edges:
        prob = min(1.0, w * params.interactions_per_day)
        if rng.random() < prob:
            out.append((u, v))
        if rng.random() < prob:
            out.append((v, u))
    return out


def _iterate_days(dataset, net, wave_times, seed, on_day):
    """Replays events day by day between waves 1 and 6 and calls
    ``on_day(t, live_edges, rng)`` after each day's ingestion."""
    rng = np.random.default_rng(seed)
    replay = TemporalNetwork(params=net.params, participants=sorted(dataset.participants))
    events = dataset.events
    ev_idx = 0
    t = wave_times[1]
    end = wave_times[6]
    # events before the first wave shape the initial network
    while ev_idx < len(events) and events[ev_idx].timestamp <= t:
        replay.process_event(events[ev_idx])
        ev_idx += 1
    while True:
        live = []
        for (u, v), state in sorted(replay.edges.items()):
            w = replay._decayed(state, t)
            if w >= net.params.theta:
                live.append(((u, v), w))
        on_day(t, live, rng)
        if t >= end:
            break
        t = min(t + SECONDS_PER_DAY, end)
        while ev_idx < len(events) and events[ev_idx].timestamp <= t:
            replay.process_event(events[ev_idx])
            ev_idx += 1


def run_coding(dataset, net, question, params: CodingParams, seed: int,
               wave_times=None) -> SimulationTrace:
    """Continuous-vector simulation; interactions fire per edge and
    direction each day with probability min(1, weight * rate)."""
    if question not in QUESTIONS:
        raise ValueError(f"unknown question {question!r}")
    wave_times = wave_times or _default_wave_times(dataset)
    rng = np.random.default_rng(seed)
    states = _init_states(dataset, question, params, rng)
    trace = SimulationTrace(question=question, rng_seed=seed, params=params, model="coding")
    for pid, st in states.items():
        trace.record(pid, wave_times[1], st.express(params.gamma))
    trace.horizon = wave_times[6]

    if params.interactions_per_day == 0:
        return trace

    def on_day(t, live, day_rng):
        for speaker_id, listener_id in _daily_interactions(live, params, day_rng):
            sp, li = interact(states[speaker_id], states[listener_id], params, day_rng)
            states[speaker_id] = sp
            states[listener_id] = li
            trace.record(speaker_id, t, sp.express(params.gamma))
            trace.record(listener_id, t, li.express(params.gamma))

    _iterate_days(dataset, net, wave_times, seed, on_day)
    return trace


def _ng_init(dataset, question, rng):
    states = {}
    for pid in sorted(dataset.participants):
        stance = dataset.opinion(pid, question, 1)
        if stance == "Missing":
            stance = ("A", "B", "AB")[rng.integers(0, 3)]
        states[pid] = stance
    return states


def naming_game_step(speaker: str, listener: str, rng) -> tuple:
    """Transition table of the discrete baseline: listeners lacking the
    uttered word add it; listeners holding it collapse both agents."""
    uttered = speaker if speaker != "AB" else ("A" if rng.random() < 0.5 else "B")
    if listener == uttered or listener == "AB":
        return uttered, uttered
    # listener held only the other word: adopt the new one as well
    return speaker, "AB"


def run_naming_game(dataset, net, question, seed: int, wave_times=None,
                    interactions_per_day: float = 1.0) -> SimulationTrace:
    if question not in QUESTIONS:
        raise ValueError(f"unknown question {question!r}")
    wave_times = wave_times or _default_wave_times(dataset)
    params = CodingParams(interactions_per_day=interactions_per_day)
    rng = np.random.default_rng(seed)
    states = _ng_init(dataset, question, rng)
    trace = SimulationTrace(
        question=question, rng_seed=seed, params=params, model="naming_game"
    )
    for pid, st in states.items():
        trace.record(pid, wave_times[1], st)
    trace.horizon = wave_times[6]

    if interactions_per_day == 0:
        return trace

    def on_day(t, live, day_rng):
        for speaker_id, listener_id in _daily_interactions(live, params, day_rng):
            sp, li = naming_game_step(states[speaker_id], states[listener_id], day_rng)
            states[speaker_id] = sp
            states[listener_id] = li
            trace.record(speaker_id, t, sp)
            trace.record(listener_id, t, li)

    _iterate_days(dataset, net, wave_times, seed, on_day)
    return trace


def _default_wave_times(dataset) -> dict:
    """Six equally spaced waves spanning the event history (180-day
    spacing when there are no events)."""
    if dataset.events:
        start = dataset.events[0].timestamp
        end = max(dataset.events[-1].timestamp, start + 1.0)
    else:
        start, end = 0.0, 5 * 180 * SECONDS_PER_DAY
    step = (end - start) / 5
    return {w: start + (w - 1) * step for w in range(1, 7)}


def label_mispredictions(trace: SimulationTrace, dataset: Dataset, wave_times) -> list:
    """One sample per (participant, question, wave>=2) with a recorded
    ground-truth stance; wave 1 seeds the simulation and is excluded."""
    samples = []
    start, end = trace.start_time, trace.end_time
    for wave in range(2, 7):
        t = wave_times[wave]
        if t < start or t > end:
            raise ValueError(
                f"wave {wave} timestamp {t} outside trace range [{start}, {end}]"
            )
    for pid in sorted(trace.series):
        for wave in range(2, 7):
            truth = dataset.opinion(pid, trace.question, wave)
            if truth == "Missing":
                continue
            predicted = trace.state_at(pid, wave_times[wave])
            samples.append(
                MisclassificationSample(
                    participant_id=pid,
                    question=trace.question,
                    wave=wave,
                    ground_truth=truth,
                    predicted=predicted,
                )
            )
    return samples


def export_trace_csv(trace: SimulationTrace, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["participant", "question", "timestamp", "state"])
        for pid in sorted(trace.series):
            for t, state in trace.series[pid]:
                writer.writerow([pid, trace.question, repr(t), state])


def export_samples_csv(samples, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["participant", "question", "wave", "predicted", "truth", "target"])
        for s in samples:
            writer.writerow(
                [s.participant_id, s.question, s.wave, s.predicted, s.ground_truth,
                 int(s.target)]
            )
