"""fairdyn: audit where hybrid opinion dynamics mispredict survey
opinions, and whether those mispredictions are predictable and unfair."""

from ._version import __version__
from .cogsnet import CogsnetParams, TemporalNetwork, build_network
from .config import RunConfig, load_config
from .data_model import Dataset, derive_minorities, load_dataset, save_dataset
from .opinion_sim import CodingParams, label_mispredictions, run_coding, run_naming_game
from .pipeline import run_audit
from .synth import SyntheticConfig, generate_synthetic

__all__ = [
    "CogsnetParams",
    "TemporalNetwork",
    "build_network",
    "RunConfig",
    "load_config",
    "Dataset",
    "derive_minorities",
    "load_dataset",
    "save_dataset",
    "CodingParams",
    "label_mispredictions",
    "run_coding",
    "run_naming_game",
    "run_audit",
    "SyntheticConfig",
    "generate_synthetic",
    "__version__",
]
