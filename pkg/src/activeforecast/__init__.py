"""Prediction with expert advice under label-efficient (active) querying."""

from .core import SparseVector, abs_loss, clip_unit, sparse_dot
from .experts import ExpertKind, ExpertPool, LinearExpert, expert_predict, pool_evaluate, train_expert, train_pool
from .forecasters import ForecasterState, ewaf_predict, gf_predict, run_forecaster, update_losses, weighted_average
from .active import (
    ActiveState,
    QueryPolicy,
    active_predict,
    active_step,
    aewaf_condition,
    agf_condition,
    run_active,
    run_active_on_predictions,
)
from .analysis import (
    RunResult,
    Summary,
    active_bound,
    default_eta,
    full_information_bound,
    regret,
    summarize,
    tuned_active_params,
)
from .dataio import Dataset, SplitSpec, label_normalize, load_dataset, parse_sparse_text, permutations, split

__version__ = "0.1.0"
