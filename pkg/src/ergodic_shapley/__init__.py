"""Shapley value estimation by ergodic (paired, negatively correlated) sampling."""

from .analysis import (
    BinaryJoint,
    binary_rho,
    binary_rho_min,
    crossover_points,
    improvement_ratio,
    m1_upper_bound,
    mst_reference_joint,
    pair_count,
    paired_variance,
)
from .estimators import (
    EstimateReport,
    EstimatorConfig,
    block_samples,
    ergodic_estimate,
    optk2_estimate,
    replicate,
    simple_mc,
)
from .exceptions import BudgetError, CapacityError, InputError
from .game_core import (
    Coalition,
    FunctionGame,
    Game,
    PlayerOrder,
    PositionPermutation,
    apply_transformation,
    brute_force_shapley,
    cyclic_shift,
    marginal_contribution,
    random_order,
    reversal,
    transposition,
)
from .games import GAME_IDS, exact_shapley, make_game, mst_value
from .greedy_matching import CovarianceTable, MatchingResult, covariance_table, greedy_min_matching, learn_transformation

__version__ = "0.1.0"
