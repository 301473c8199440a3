"""Synthetic population generator.

Produces schema-compatible datasets with controllable minority
proportions, flag correlations, homophilous communication events, and a
ground-truth opinion process with per-group minority-opinion-rate,
volatility, and misprediction-proneness targets.

The opinion process is a two-state hidden chain per (participant,
question): "on-track" waves repeat the wave-1 stance, "deviant" waves
hold a stance different from it. The marginal deviant probability p is
the planted misprediction-proneness (relative to a persistence
predictor seeded at wave 1), and the chain's stickiness is solved from
the volatility target V via V = p + 8 p (1 - a), where a is the
deviant->deviant transition probability.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.stats import norm

from .data_model import (
    CommEvent,
    Dataset,
    HIGH_INCOME_BRACKETS,
    INCOME_BRACKETS,
    MINORITY_NAMES,
    OpinionRecord,
    Participant,
    QUESTIONS,
    DEFAULT_FB_PRIVACY,
)
from .cogsnet import SECONDS_PER_DAY


class SyntheticConfigError(ValueError):
    """Infeasible proportions or invalid generator settings."""


DEFAULT_MINORITY_FRACTIONS = {
    "Gender": 0.48,
    "Ethnicity": 0.33,
    "FBPrivacy": 0.19,
    "EnglishNative": 0.16,
    "ParentsIncome": 0.15,
    "ParentsEducation": 0.15,
    "ParentsReligion": 0.40,
}


@dataclass
class SyntheticConfig:
    n_participants: int = 200
    minority_fractions: dict = field(
        default_factory=lambda: dict(DEFAULT_MINORITY_FRACTIONS)
    )
    # uniform off-diagonal correlation of the Gaussian copula driving flags
    flag_correlation: float = 0.0
    homophily_multiplier: float = 2.0
    events_per_participant: float = 40.0
    wave_spacing_days: float = 180.0
    dropout_hazard: float = 0.0
    # stance process targets
    default_minority_opinion_rate: float = 0.25
    minority_opinion_rates: dict = field(default_factory=dict)  # group -> {question: rate}
    default_volatility: float = 1.0
    volatility_targets: dict = field(default_factory=dict)  # group -> {question: mean changes}
    misprediction_base: float = 0.45
    intersectionality_slope: float = 0.05
    misprediction_targets: dict = field(default_factory=dict)  # group -> {question: rate}

    def validate(self):
        if self.n_participants < 2:
            raise SyntheticConfigError("population size must be at least 2")
        for name, frac in self.minority_fractions.items():
            if name not in MINORITY_NAMES:
                raise SyntheticConfigError(f"unknown minority name {name!r}")
            if not (0 <= frac <= 1):
                raise SyntheticConfigError(
                    f"minority fraction for {name} out of [0,1]: {frac}"
                )
        if not (-1 / (len(MINORITY_NAMES) - 1) < self.flag_correlation < 1):
            raise SyntheticConfigError(
                f"flag correlation {self.flag_correlation} gives a non-PSD copula"
            )
        if self.homophily_multiplier <= 0:
            raise SyntheticConfigError("homophily multiplier must be positive")
        if not (0 <= self.dropout_hazard < 1):
            raise SyntheticConfigError("dropout hazard must be in [0,1)")
        for table, lo, hi in (
            (self.minority_opinion_rates, 0.0, 1.0),
            (self.misprediction_targets, 0.0, 1.0),
            (self.volatility_targets, 0.0, 5.0),
        ):
            for group, per_q in table.items():
                if group not in MINORITY_NAMES:
                    raise SyntheticConfigError(f"unknown minority name {group!r}")
                for question, value in per_q.items():
                    if question not in QUESTIONS:
                        raise SyntheticConfigError(f"unknown question {question!r}")
                    if not (lo <= value <= hi):
                        raise SyntheticConfigError(
                            f"target {value} for ({group}, {question}) outside [{lo}, {hi}]"
                        )
        if not (0 <= self.misprediction_base <= 1):
            raise SyntheticConfigError("misprediction base must be in [0,1]")

    @classmethod
    def from_dict(cls, raw: dict) -> "SyntheticConfig":
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def wave_time(self, wave: int) -> float:
        return wave * self.wave_spacing_days * SECONDS_PER_DAY

    def wave_times(self) -> dict:
        return {w: self.wave_time(w) for w in range(1, 7)}


def _sample_flags(config: SyntheticConfig, rng: np.random.Generator) -> dict:
    """Gaussian-copula flag matrix with exact marginal counts.

    Rank-based assignment: for each flag the round(n*f) lowest latent
    scores are flagged, which pins the marginals while keeping the
    copula's correlation structure.
    """
    n = config.n_participants
    k = len(MINORITY_NAMES)
    rho = config.flag_correlation
    cov = np.full((k, k), rho)
    np.fill_diagonal(cov, 1.0)
    if np.linalg.eigvalsh(cov).min() < -1e-9:
        raise SyntheticConfigError("flag correlation matrix is not PSD")
    chol = np.linalg.cholesky(cov + 1e-12 * np.eye(k))
    z = rng.standard_normal((n, k)) @ chol.T
    flags = {}
    for j, name in enumerate(MINORITY_NAMES):
        count = int(round(n * config.minority_fractions.get(name, 0.0)))
        order = np.argsort(z[:, j], kind="stable")
        col = np.zeros(n, dtype=bool)
        col[order[:count]] = True
        flags[name] = col
    return flags


_ETHNIC_MINORITY_OPTIONS = ("Black/African American", "Asian", "Hispanic/Latino", "Other")
_RELIGION_OTHER_OPTIONS = ("Protestant", "Jewish", "None", "Other")
_NON_GRAD_OPTIONS = ("High school", "Some college")
_GRAD_OPTIONS = ("College graduate", "Graduate degree")


def _attributes_for(flags_row: dict, rng: np.random.Generator) -> dict:
    """Survey answers consistent with the sampled flags, so that
    derive_minorities round-trips exactly."""
    attrs = {}
    attrs["gender"] = "Female" if flags_row["Gender"] else "Male"
    attrs["ethnicity"] = (
        str(rng.choice(_ETHNIC_MINORITY_OPTIONS))
        if flags_row["Ethnicity"]
        else "White/Caucasian"
    )
    if flags_row["FBPrivacy"]:
        attrs["fbprivacy"] = "Only I can see my posts"
    else:
        attrs["fbprivacy"] = DEFAULT_FB_PRIVACY
    attrs["english_native"] = "no" if flags_row["EnglishNative"] else "yes"
    if flags_row["ParentsIncome"]:
        attrs["parents_income_bracket"] = str(rng.choice(sorted(HIGH_INCOME_BRACKETS)))
    else:
        attrs["parents_income_bracket"] = str(rng.choice(INCOME_BRACKETS[:12]))
    if flags_row["ParentsEducation"]:
        attrs["mother_education"] = str(rng.choice(_NON_GRAD_OPTIONS))
        attrs["father_education"] = str(rng.choice(_NON_GRAD_OPTIONS))
    else:
        attrs["mother_education"] = str(rng.choice(_GRAD_OPTIONS))
        attrs["father_education"] = str(rng.choice(_NON_GRAD_OPTIONS + _GRAD_OPTIONS))
    if flags_row["ParentsReligion"]:
        attrs["mother_religion"] = str(rng.choice(_RELIGION_OTHER_OPTIONS))
        attrs["father_religion"] = str(
            rng.choice(_RELIGION_OTHER_OPTIONS + ("Roman Catholic",))
        )
    else:
        attrs["mother_religion"] = "Roman Catholic"
        attrs["father_religion"] = "Roman Catholic"
    return attrs


def _events(config, pids, flags, rng) -> list:
    n = len(pids)
    total = int(round(n * config.events_per_participant))
    if total == 0 or n < 2:
        return []
    iu, ju = np.triu_indices(n, k=1)
    flag_mat = np.column_stack([flags[name] for name in MINORITY_NAMES])
    shared = (flag_mat[iu] & flag_mat[ju]).any(axis=1)
    weights = np.where(shared, config.homophily_multiplier, 1.0)
    weights = weights / weights.sum()
    picks = rng.choice(len(iu), size=total, p=weights)
    times = rng.uniform(0.0, config.wave_time(6), size=total)
    flip = rng.random(total) < 0.5
    channels = rng.random(total) < 0.5
    events = []
    for idx, t, fl, ch in zip(picks, times, flip, channels):
        a, b = pids[iu[idx]], pids[ju[idx]]
        if fl:
            a, b = b, a
        events.append(
            CommEvent(source=a, target=b, timestamp=float(t),
                      channel="call" if ch else "text")
        )
    events.sort(key=CommEvent.sort_key)
    return events


def _lookup(table: dict, flags_row: dict, question: str):
    """First matching (group, question) override in fixed group order."""
    for group in MINORITY_NAMES:
        if flags_row.get(group) and group in table and question in table[group]:
            return table[group][question]
    return None


def _deviant_chain_params(p: float, volatility: float):
    """Stickiness (a, b) of the deviant chain for marginal p and target
    volatility V = p + 8 p (1 - a), clipped to the feasible range."""
    if p <= 0:
        return 1.0, 0.0
    a = 1.0 - (volatility - p) / (8.0 * p)
    a_min = max(0.0, (2.0 * p - 1.0) / p)
    a = min(1.0, max(a_min, a))
    b = p * (1.0 - a) / (1.0 - p) if p < 1 else 1.0
    b = min(1.0, max(0.0, b))
    return a, b


def _stances(config, flags_row, intersection_count, question, dropout_wave, rng):
    """Six-wave stance sequence for one (participant, question)."""
    rate = _lookup(config.minority_opinion_rates, flags_row, question)
    if rate is None:
        rate = config.default_minority_opinion_rate
    base = "B" if rng.random() < rate else "A"  # B is the planted minority pole

    p = _lookup(config.misprediction_targets, flags_row, question)
    if p is None:
        p = config.misprediction_base + config.intersectionality_slope * intersection_count
        p = min(0.98, max(0.02, p))
    volatility = _lookup(config.volatility_targets, flags_row, question)
    if volatility is None:
        volatility = config.default_volatility
    a, b = _deviant_chain_params(p, volatility)

    other = [s for s in ("A", "B", "AB") if s != base]
    stances = [base]
    deviant = False
    dev_stance = None
    for wave in range(2, 7):
        if wave == 2:
            enter = rng.random() < p
        else:
            enter = rng.random() < (a if deviant else b)
        if enter and not deviant:
            dev_stance = other[int(rng.random() < 0.5)]
        deviant = enter
        stances.append(dev_stance if deviant else base)
    if dropout_wave is not None:
        for wave in range(dropout_wave, 7):
            stances[wave - 1] = "Missing"
    return stances


def generate_synthetic(config: SyntheticConfig, seed: int) -> Dataset:
    """Deterministic synthetic dataset for a (config, seed) pair."""
    config.validate()
    rng = np.random.default_rng(seed)
    n = config.n_participants
    width = len(str(n - 1))
    pids = [f"p{str(i).zfill(width)}" for i in range(n)]

    flags = _sample_flags(config, rng)
    flag_rows = [
        {name: bool(flags[name][i]) for name in MINORITY_NAMES} for i in range(n)
    ]
    intersection = [sum(row.values()) for row in flag_rows]

    dropout_wave = []
    for i in range(n):
        wave = None
        for w in range(2, 7):
            if rng.random() < config.dropout_hazard:
                wave = w
                break
        dropout_wave.append(wave)

    participants = {}
    for i, pid in enumerate(pids):
        attrs = _attributes_for(flag_rows[i], rng)
        last_wave = (dropout_wave[i] - 1) if dropout_wave[i] is not None else 6
        survey = {w: dict(attrs) for w in range(1, last_wave + 1)}
        participants[pid] = Participant(
            id=pid, survey_attributes=survey, active_waves=set(survey)
        )

    events = _events(config, pids, flags, rng)

    opinions = []
    for i, pid in enumerate(pids):
        for question in QUESTIONS:
            seq = _stances(
                config, flag_rows[i], intersection[i], question, dropout_wave[i], rng
            )
            for wave, stance in enumerate(seq, start=1):
                opinions.append(
                    OpinionRecord(
                        participant_id=pid, question=question, wave=wave, stance=stance
                    )
                )

    provenance = {
        "kind": "synthetic",
        "seed": int(seed),
        "config_hash": config.config_hash(),
    }
    return Dataset(
        participants=participants, events=events, opinions=opinions, provenance=provenance
    )


def expected_intersection_pmf(config: SyntheticConfig) -> np.ndarray:
    """Poisson-binomial pmf of the intersection count under independent
    flags (valid for flag_correlation == 0)."""
    pmf = np.array([1.0])
    for name in MINORITY_NAMES:
        f = config.minority_fractions.get(name, 0.0)
        pmf = np.convolve(pmf, [1 - f, f])
    return pmf


def copula_threshold(fraction: float) -> float:
    """Latent-normal threshold corresponding to a marginal fraction."""
    return float(norm.ppf(fraction)) if 0 < fraction < 1 else float("inf")
