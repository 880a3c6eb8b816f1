"""Numerical laboratory for parametric optimization continuity."""

__version__ = "0.1.0"

from .checkers import (
    CheckerParams,
    CheckerVerdict,
    Witness,
    characterize_continuity,
    check_fptusc,
    check_k_inf_compact,
    check_kn_inf_compact,
    check_lisc,
    check_lmsc,
    check_lsc_fn,
    check_usc_fn,
    replay_witness,
)
from .corpus import corpus_instantiate, corpus_list, corpus_verify
from .errors import BergelabError
from .exact import ExactScalar
from .extreal import ExtReal, NEG_INF, POS_INF, ext_add, ext_max, ext_min
from .grid import Grid1D
from .inventory import (
    InventoryModel,
    ValueTable,
    backward_induction,
    continuity_modulus,
    exhaustive_value,
    feasible_orders,
    never_order_bound,
    transition,
)
from .loader import load_problem
from .minimax import (
    MinimaxParams,
    MinimaxProblem,
    MinimaxProfile,
    check_a_lsc,
    check_b_fptlisc,
    check_b_fptlmsc,
    check_b_uniform_fptusc,
    duality_values,
    load_minimax,
    minimax_at,
    minimax_profile,
    solution_sets_at,
    swap_transform,
    worst_loss_at,
)
from .multifunction import Interval, MultifunctionSpec, constant_map
from .problem import (
    ProblemSpec,
    ValueProfile,
    bar_transform,
    hat_transform,
    modified_problem,
    solutions_at,
    value_at,
    value_profile,
)
from .reporting import emit_plot_data, render_plot

__all__ = [
    "BergelabError",
    "CheckerParams",
    "CheckerVerdict",
    "ExactScalar",
    "ExtReal",
    "Grid1D",
    "Interval",
    "InventoryModel",
    "MinimaxParams",
    "MinimaxProblem",
    "MinimaxProfile",
    "MultifunctionSpec",
    "NEG_INF",
    "POS_INF",
    "ProblemSpec",
    "ValueProfile",
    "ValueTable",
    "Witness",
    "backward_induction",
    "bar_transform",
    "characterize_continuity",
    "check_a_lsc",
    "check_b_fptlisc",
    "check_b_fptlmsc",
    "check_b_uniform_fptusc",
    "check_fptusc",
    "check_k_inf_compact",
    "check_kn_inf_compact",
    "check_lisc",
    "check_lmsc",
    "check_lsc_fn",
    "check_usc_fn",
    "constant_map",
    "continuity_modulus",
    "corpus_instantiate",
    "corpus_list",
    "corpus_verify",
    "duality_values",
    "emit_plot_data",
    "exhaustive_value",
    "ext_add",
    "ext_max",
    "ext_min",
    "feasible_orders",
    "hat_transform",
    "load_minimax",
    "load_problem",
    "minimax_at",
    "minimax_profile",
    "modified_problem",
    "never_order_bound",
    "render_plot",
    "replay_witness",
    "solution_sets_at",
    "solutions_at",
    "swap_transform",
    "transition",
    "value_at",
    "value_profile",
    "worst_loss_at",
]
