"""Sum-rate maximization for RIS-assisted D2D links sharing cellular and mm-wave spectrum."""

from .channel import ChannelRealization, draw_channels
from .coalition import form_coalitions, is_nash_stable, prefers_switch
from .harness import ExperimentSpec, ResultRecord, run_sweep, summarize
from .optimizer import SchemeId, SolveResult, maximize_sum_rate
from .params import SimParams
from .phase_search import optimize_phases
from .power import allocate_power
from .rate import Partition, State, System, compute_sinr, is_feasible, system_sum_rate
from .ris import PhaseConfig, effective_gain, phase_codebook
from .scenario import Scenario, generate_scenario

__all__ = [
    "ChannelRealization",
    "ExperimentSpec",
    "Partition",
    "PhaseConfig",
    "ResultRecord",
    "Scenario",
    "SchemeId",
    "SimParams",
    "SolveResult",
    "State",
    "System",
    "allocate_power",
    "compute_sinr",
    "draw_channels",
    "effective_gain",
    "form_coalitions",
    "generate_scenario",
    "is_feasible",
    "is_nash_stable",
    "maximize_sum_rate",
    "optimize_phases",
    "phase_codebook",
    "prefers_switch",
    "run_sweep",
    "summarize",
    "system_sum_rate",
]
