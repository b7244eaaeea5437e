"""Disambiguation of homonymous authors from collaborative and topological
features of co-authorship networks."""

from .classify import (
    CrispKNNClassifier,
    FuzzyKNNClassifier,
    HybridFuzzyKNNClassifier,
    decide,
    fuzzy_membership,
    hybrid_membership,
    train_memberships,
)
from .corpus import AmbiguousCase, CorpusError, PaperRecord, extract_ambiguous_cases, load_corpus
from .evaluate import EvalConfig, SweepResult, accuracy, cross_validate, lambda_sweep, splitting_error
from .features import FeatureMatrix, TopologicalScaler, build_features, fit_transform
from .graph import CollabNetwork, build_network, components
from .lambda_model import RegressionFit, fit_lambda_model, predict_lambda
from .measures import TopoVector, topo_vector
from .relevance import enumerate_subsets, rank_features, relevance_score
from .synth import SynthSpec, generate_corpus, generate_suite

__version__ = "0.1.0"

__all__ = [
    "AmbiguousCase",
    "CollabNetwork",
    "CorpusError",
    "CrispKNNClassifier",
    "EvalConfig",
    "FeatureMatrix",
    "FuzzyKNNClassifier",
    "HybridFuzzyKNNClassifier",
    "PaperRecord",
    "RegressionFit",
    "SweepResult",
    "SynthSpec",
    "TopoVector",
    "TopologicalScaler",
    "accuracy",
    "build_features",
    "build_network",
    "components",
    "cross_validate",
    "decide",
    "enumerate_subsets",
    "extract_ambiguous_cases",
    "fit_lambda_model",
    "fit_transform",
    "fuzzy_membership",
    "generate_corpus",
    "generate_suite",
    "hybrid_membership",
    "lambda_sweep",
    "load_corpus",
    "predict_lambda",
    "rank_features",
    "relevance_score",
    "splitting_error",
    "topo_vector",
    "train_memberships",
]
