"""Risk-aware top-k collaborative ranking.

Builds ranked lotteries over candidate items from non-negative latent
features, scores choices with an exponential-risk expected utility, selects
recommendations greedily under risk-seeking, risk-neutral or risk-averse
attitudes, and benchmarks them with NDCG, MAP and topic coverage.
"""

from .data import Dataset, ParseError, RatingTriple, make_dataset, parse_genres, parse_ratings
from .experiment import (
    DEFAULT_STRATEGIES,
    ExperimentConfig,
    StageError,
    StrategySpec,
    run_experiment,
    subsample,
)
from .factorization import FactorModel, item_means, load_model, save_model, train_wnmf
from .metrics import (
    EvalConfig,
    EvalReport,
    evaluate_split,
    map_at_k,
    ndcg_at_k,
    topic_coverage_at_k,
)
from .preference import (
    SimilarityFn,
    item_set_similarity,
    lottery,
    position_weights,
    similarity,
)
from .selection import (
    brute_force_best_set,
    brute_force_select,
    greedy_select,
    greedy_select_Z,
    pointwise_topk,
)
from .splits import SplitSpec, TrainTestSplit, load_splits, make_splits, save_splits
from .synthetic import clustered_ratings, synthetic_dataset, write_movielens_files
from .utility import ObservedProfile, RiskConfig, objective_F, risk_g, utility_Z

__version__ = "0.1.0"

__all__ = [
    "Dataset", "ParseError", "RatingTriple", "make_dataset", "parse_genres",
    "parse_ratings", "SplitSpec", "TrainTestSplit", "make_splits", "save_splits",
    "load_splits", "FactorModel", "train_wnmf", "item_means", "save_model",
    "load_model", "SimilarityFn", "similarity", "item_set_similarity",
    "position_weights", "lottery", "RiskConfig", "ObservedProfile", "risk_g",
    "utility_Z", "objective_F", "greedy_select", "greedy_select_Z",
    "brute_force_select", "brute_force_best_set", "pointwise_topk",
    "EvalConfig", "EvalReport", "ndcg_at_k", "map_at_k", "topic_coverage_at_k",
    "evaluate_split", "ExperimentConfig", "StrategySpec", "DEFAULT_STRATEGIES",
    "StageError", "run_experiment", "subsample", "clustered_ratings",
    "synthetic_dataset", "write_movielens_files", "__version__",
]
