"""Multiview boosting driven by PAC-Bayesian C-Bound control."""

from .boost import (
    ALGORITHMS,
    BoostTrace,
    MVAdaBoostClassifier,
    MVBoostClassifier,
    MVMajorityVote,
    MVUniformVoteClassifier,
    PBMVBoostClassifier,
    mv_adaboost,
    mv_uniform_vote,
    mvboost_uniform_rho,
    pb_mvboost,
    predict,
    predict_margin,
)
from .cbound_opt import optimize_view_weights, project_simplex
from .data import (
    MultiviewDataset,
    load_idx,
    load_manifest,
    split_image_views,
    synth_multiview,
    write_manifest,
)
from .weak import WeakVoter, train_tree, weighted_error

__version__ = "0.1.0"
