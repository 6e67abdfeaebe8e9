"""Dynamic-K implicit-feedback recommendation.

Learns item scorers jointly with per-user decision boundaries, so each
user receives however many items clear their own bar (possibly none),
instead of a fixed top-N.
"""

from .data import (
    IdMap,
    Interaction,
    InteractionLog,
    SplitDataset,
    filter_min_counts,
    parse_movielens,
    parse_tafeng,
    reindex,
    temporal_split,
)
from .metrics import EvalReport, cover_ratio, evaluate_run, ndcg_at_k, precision_recall_f1
from .model import FactorModel, basket_representation, init_model, score_hrm, score_mf
from .objectives import (
    LabeledExample,
    RankingTriple,
    boundary_penalty,
    bpr_pair_loss,
    hinge_loss,
    hybrid_weighting,
    logistic_loss,
    margin,
)
from .recommend import RecommendationList, recommend_dynamic_k, recommend_top_n
from .trainer import TrainConfig, TrainReport, joint_train, train_epoch_schedule

__version__ = "0.1.0"

__all__ = [
    "EvalReport",
    "FactorModel",
    "IdMap",
    "Interaction",
    "InteractionLog",
    "LabeledExample",
    "RankingTriple",
    "RecommendationList",
    "SplitDataset",
    "TrainConfig",
    "TrainReport",
    "basket_representation",
    "boundary_penalty",
    "bpr_pair_loss",
    "cover_ratio",
    "evaluate_run",
    "filter_min_counts",
    "hinge_loss",
    "hybrid_weighting",
    "init_model",
    "joint_train",
    "logistic_loss",
    "margin",
    "ndcg_at_k",
    "parse_movielens",
    "parse_tafeng",
    "precision_recall_f1",
    "recommend_dynamic_k",
    "recommend_top_n",
    "reindex",
    "score_hrm",
    "score_mf",
    "temporal_split",
    "train_epoch_schedule",
]
