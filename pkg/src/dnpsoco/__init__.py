"""Smoothed online convex optimization with the Discounted-Normal-Predictor."""

from ._accel import BACKEND
from .bit_predictor import (
    DnpState,
    Mode,
    cor1_reward_bound,
    cor1_scaled_state,
    dnp_new,
    dnp_predict,
    dnp_update,
    per_step_change_bound,
    run_stream,
    thm1_reward_bound,
)
from .combiner import Combiner, combine_point, combiner_round, expert_cost, relative_loss_bit
from .dnp_core import DnpParams, confidence, erf, g_tilde, make_params
from .environments import (
    BitStream,
    SplitMix64,
    TargetSchedule,
    adversarial_bits,
    distance_loss,
    drift_targets,
    piecewise_targets,
)
from .evaluation import (
    BestFixedOracle,
    RunTrace,
    adaptive_profile,
    best_fixed_oracle,
    dynamic_profile,
    dynamic_regret,
    interval_regret,
    switching_cost,
)
from .oco import OGD, BallDomain, LossRecord, ogd_step, ogd_step_size, project, thm4_regret_bound, thm5_dynamic_bound
from .smoothed_ogd import (
    ScheduleError,
    SmoothedOGD,
    StackSchedule,
    build_stack,
    make_schedule,
    stack_round,
    thm2_bound,
    thm3_bound,
)

__version__ = "0.1.0"
