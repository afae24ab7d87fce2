"""Linear bandit policies: accelerated OFUL / LinTS and their exact-scan baselines."""
from .base import BanditPolicy, Selection
from .confidence import EtaScheme, beta, eta_for_horizon, gamma, lints_regret_bound, oful_regret_bound
from .lints import LevelLadder, LinTsExactPolicy, LinTsPolicy, LinTsState, largest_firing_level, lints_baseline_select, lints_init, lints_select
from .oful import OfulExactPolicy, OfulPolicy, OfulState, eliminate_and_advance, oful_baseline_select, oful_init, oful_select
from .sampler import TsSampler, sample_perturbation

__all__ = [
    "BanditPolicy",
    "EtaScheme",
    "LevelLadder",
    "LinTsExactPolicy",
    "LinTsPolicy",
    "LinTsState",
    "OfulExactPolicy",
    "OfulPolicy",
    "OfulState",
    "Selection",
    "TsSampler",
    "beta",
    "eliminate_and_advance",
    "eta_for_horizon",
    "gamma",
    "largest_firing_level",
    "lints_baseline_select",
    "lints_init",
    "lints_regret_bound",
    "lints_select",
    "oful_baseline_select",
    "oful_init",
    "oful_regret_bound",
    "oful_select",
    "sample_perturbation",
]
