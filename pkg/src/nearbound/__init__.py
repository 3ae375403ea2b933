"""Boundary-experience condensation and nearest-boundary policy distillation.

Pipeline: collect (state, action) experience from a teacher policy in a
simulated environment, prune the pool to its boundary points, fit a
nearest-boundary student (brute / KD-tree / ball-tree backends), and compare
it against depth-capped decision-tree baselines on similarity, experience
reduction, and accumulated reward.
"""

from .condensation import (
    CondensationResult,
    PointClass,
    classify_point,
    condense,
    nearest_enemy,
    simplex_interior_oracle,
    witness_set,
)
from .envs import EnvDescriptor, Environment, Transition, make_env
from .evaluate import (
    EvaluationReport,
    RunConfig,
    SimilarityReport,
    reduction_stats,
    rollout_return,
    run_experiment_suite,
    similarity_eval,
    similarity_metrics,
)
from .experience import (
    Experience,
    ExperiencePool,
    dedupe,
    distance,
    read_pool,
    write_pool,
)
from .neighbors import Explanation, NearestBoundaryModel, fit, predict
from .teachers import collect, external_teacher, scripted_teacher, train_q_teacher
from .trees import DecisionTreeModel, fit_tree, predict_tree

__version__ = "0.1.0"
