"""Coverage-guided metamorphic testing toolkit for neural steering models."""

__version__ = "0.1.0"

from .coverage import (CoverageMap, NeuronId, activated_set, jaccard_distance,
                       merge, neuron_coverage)
from .dataset import Dataset, ingest
from .engine import ActivationTrace, Model, forward
from .modelio import load_model, save_model
from .oracle import (LabeledSet, ViolationRecord, check_metamorphic,
                     filter_transform, mse)
from .search import SearchConfig, SearchResult, guided_search
from .stats import cohens_d, rank_sum_test, spearman
from .transforms import TransformSpec, apply

__all__ = [
    "ActivationTrace", "CoverageMap", "Dataset", "LabeledSet", "Model",
    "NeuronId", "SearchConfig", "SearchResult", "TransformSpec",
    "ViolationRecord", "__version__", "activated_set", "apply",
    "check_metamorphic", "cohens_d", "filter_transform", "forward",
    "guided_search", "ingest", "jaccard_distance", "load_model", "merge",
    "mse", "neuron_coverage", "rank_sum_test", "save_model", "spearman",
]
