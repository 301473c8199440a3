"""Run configuration: defaults, file loading, hashing, seed streams.

Precedence is CLI flags over config file over built-in defaults; the
CLI passes explicit overrides into ``RunConfig.apply_overrides``.
"""

from __future__ import annotations

import hashlib
import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cogsnet import SECONDS_PER_DAY, CogsnetParams
from .data_model import QUESTIONS
from .features import PIPELINES
from .opinion_sim import CodingParams
from .synth import SyntheticConfig


class ConfigError(ValueError):
    pass


# Model family trained per feature pipeline.
PIPELINE_FAMILIES = {
    "survey": "stratified_rf",
    "topology": "decision_tree",
    "hybrid": "stratified_rf",
}


@dataclass
class MLSettings:
    cv_folds: int = 10
    test_fraction: float = 0.2
    grid: str = "default"  # "default" or "smoke"
    subset_sizes: tuple = (15, 20, 30)

    def validate(self):
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        if not (0 < self.test_fraction < 1):
            raise ConfigError("test_fraction must be in (0, 1)")
        if self.grid not in ("default", "smoke"):
            raise ConfigError(f"unknown grid {self.grid!r}")


@dataclass
class RunConfig:
    seed: int = 0
    questions: tuple = QUESTIONS
    pipelines: tuple = PIPELINES
    out_dir: str = "out"
    jobs: int = 1
    weighted_centralities: bool = True
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    cogsnet: CogsnetParams = field(default_factory=CogsnetParams)
    coding: CodingParams = field(default_factory=CodingParams)
    ml: MLSettings = field(default_factory=MLSettings)
    dataset_paths: dict = field(default_factory=dict)  # optional external data

    def validate(self):
        for q in self.questions:
            if q not in QUESTIONS:
                raise ConfigError(f"unknown question {q!r}")
        for p in self.pipelines:
            if p not in PIPELINES:
                raise ConfigError(f"unknown pipeline {p!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        self.synthetic.validate()
        self.ml.validate()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "questions": list(self.questions),
            "pipelines": list(self.pipelines),
            "out_dir": self.out_dir,
            "jobs": self.jobs,
            "weighted_centralities": self.weighted_centralities,
            "synthetic": self.synthetic.to_dict(),
            "cogsnet": {
                "mu": self.cogsnet.mu,
                "theta": self.cogsnet.theta,
                "lambda_per_day": self.cogsnet.lam * SECONDS_PER_DAY,
                "forgetting": self.cogsnet.forgetting,
            },
            "coding": {
                "gamma": self.coding.gamma,
                "delta": self.coding.delta,
                "interactions_per_day": self.coding.interactions_per_day,
                "init_policy": self.coding.init_policy,
            },
            "ml": {
                "cv_folds": self.ml.cv_folds,
                "test_fraction": self.ml.test_fraction,
                "grid": self.ml.grid,
                "subset_sizes": list(self.ml.subset_sizes),
            },
            "dataset_paths": dict(self.dataset_paths),
        }

    def config_hash(self) -> str:
        # hash only the scientific configuration: where the artifacts land
        # (out_dir) and how the work is scheduled (jobs) must not change
        # the report
        payload = self.to_dict()
        payload.pop("out_dir", None)
        payload.pop("jobs", None)
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def derive_seed(self, stage: str, unit: str = "") -> int:
        """Stable per-stage seed stream decoupled from call order."""
        digest = hashlib.sha256(f"{self.seed}:{stage}:{unit}".encode()).digest()
        return int.from_bytes(digest[:8], "big") % (2**63)

    def rng(self, stage: str, unit: str = "") -> np.random.Generator:
        return np.random.default_rng(self.derive_seed(stage, unit))

    def apply_overrides(self, **overrides) -> "RunConfig":
        """Non-None keyword overrides win over config-file values."""
        cfg = self
        for key, value in overrides.items():
            if value is None:
                continue
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown config field {key!r}")
            object.__setattr__(cfg, key, value)
        cfg.validate()
        return cfg


def _coding_from_dict(d: dict) -> CodingParams:
    return CodingParams(
        gamma=d.get("gamma", 0.2),
        delta=d.get("delta", 0.1),
        interactions_per_day=d.get("interactions_per_day", 1.0),
        init_policy=d.get("init_policy", "FromWave1"),
    )


def _ml_from_dict(d: dict) -> MLSettings:
    return MLSettings(
        cv_folds=d.get("cv_folds", 10),
        test_fraction=d.get("test_fraction", 0.2),
        grid=d.get("grid", "default"),
        subset_sizes=tuple(d.get("subset_sizes", (15, 20, 30))),
    )


def config_from_dict(data: dict) -> RunConfig:
    known = {
        "seed", "questions", "pipelines", "out_dir", "jobs",
        "weighted_centralities", "synthetic", "cogsnet", "coding", "ml",
        "dataset_paths",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(
        seed=int(data.get("seed", 0)),
        questions=tuple(data.get("questions", QUESTIONS)),
        pipelines=tuple(data.get("pipelines", PIPELINES)),
        out_dir=str(data.get("out_dir", "out")),
        jobs=int(data.get("jobs", 1)),
        weighted_centralities=bool(data.get("weighted_centralities", True)),
        synthetic=SyntheticConfig.from_dict(data.get("synthetic", {})),
        cogsnet=CogsnetParams.from_config(data.get("cogsnet", {})),
        coding=_coding_from_dict(data.get("coding", {})),
        ml=_ml_from_dict(data.get("ml", {})),
        dataset_paths=dict(data.get("dataset_paths", {})),
    )
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    """Reads TOML or JSON by extension."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".toml":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    elif path.suffix == ".json":
        with open(path) as fh:
            data = json.load(fh)
    else:
        raise ConfigError(f"unsupported config format {path.suffix!r}")
    return config_from_dict(data)
