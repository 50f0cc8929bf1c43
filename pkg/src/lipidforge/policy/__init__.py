"""Policy network over (state, action) fingerprints and its training."""

from .core import (
    Adam,
    FeatureCache,
    PolicyPrior,
    TrainingDiverged,
    TrainingPair,
    TrainReport,
    aggregate_visits,
    batch_loss_and_grads,
    featurize,
    featurize_batch,
    make_training_pairs,
    pairwise_loss,
    priors,
    search_probabilities,
    softmax,
    train,
)
from .network import DEFAULT_HIDDEN, INPUT_WIDTH, PolicyNetwork, WeightFileError, load_weights, save_weights

__all__ = [
    "Adam", "DEFAULT_HIDDEN", "FeatureCache", "INPUT_WIDTH", "PolicyNetwork", "PolicyPrior", "TrainReport",
    "TrainingDiverged", "TrainingPair", "WeightFileError", "aggregate_visits", "batch_loss_and_grads",
    "featurize", "featurize_batch", "load_weights", "make_training_pairs", "pairwise_loss", "priors",
    "save_weights", "search_probabilities", "softmax", "train",
]
