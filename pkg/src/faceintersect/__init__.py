"""Subset-separable NMF by facet discovery and facet intersection."""

from .baselines import anchor_words, projected_gradient_nmf
from .completion import PipelineError, PipelineReport, face_intersect, find_remaining_vertices, recover_weights
from .config import AlgoConfig, ConfigError, load_config
from .discovery import find_all_facets, find_one_facet
from .intersection import intersect_sets, intersect_subspaces
from .metrics import matched_w_error, reconstruction_errors
from .model import DataMatrix, Factorization, row_normalize, volume_shrink_step
from .synthetic import check_properly_filled, generate_experiment, lemma1_empirical

__version__ = "0.1.0"

__all__ = [
    "AlgoConfig",
    "ConfigError",
    "DataMatrix",
    "Factorization",
    "PipelineError",
    "PipelineReport",
    "anchor_words",
    "check_properly_filled",
    "face_intersect",
    "find_all_facets",
    "find_one_facet",
    "find_remaining_vertices",
    "generate_experiment",
    "intersect_sets",
    "intersect_subspaces",
    "lemma1_empirical",
    "load_config",
    "matched_w_error",
    "projected_gradient_nmf",
    "recover_weights",
    "reconstruction_errors",
    "row_normalize",
    "volume_shrink_step",
]
