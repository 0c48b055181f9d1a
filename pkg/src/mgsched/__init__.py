"""Generation scheduling for microgrids with combined heat and power units.

Offline optimum, competitive online policies with look-ahead, bound
calculators, brute-force oracles and a trace-driven experiment harness.
"""

from .bounds import CrBound, alpha, cr_bound, g_lookahead
from .errors import ConfigError, DataError, UnsupportedSettingError, ValidationError
from .layering import LayeredTraces, slice_demands
from .model import (
    CostBreakdown,
    ExternalSupplySpec,
    GeneratorSpec,
    Schedule,
    SlotInput,
    Trace,
    Violation,
    baseline_cost,
    dispatch,
    net_demand,
    psi,
    reference_params,
    total_cost,
    validate_schedule,
)
from .offline import critical_segments, delta_process, dp_offline, ofa, ofa_multi
from .online import (
    OnlineState,
    Policy,
    chase_gen_step,
    chase_multi_run,
    chase_s_lk_step,
    chase_s_plus_step,
    chase_s_step,
    rhc_step,
    run_policy,
)

__all__ = [
    "CrBound",
    "alpha",
    "cr_bound",
    "g_lookahead",
    "ConfigError",
    "DataError",
    "UnsupportedSettingError",
    "ValidationError",
    "LayeredTraces",
    "slice_demands",
    "CostBreakdown",
    "ExternalSupplySpec",
    "GeneratorSpec",
    "Schedule",
    "SlotInput",
    "Trace",
    "Violation",
    "baseline_cost",
    "dispatch",
    "net_demand",
    "psi",
    "reference_params",
    "total_cost",
    "validate_schedule",
    "critical_segments",
    "delta_process",
    "dp_offline",
    "ofa",
    "ofa_multi",
    "OnlineState",
    "Policy",
    "chase_gen_step",
    "chase_multi_run",
    "chase_s_lk_step",
    "chase_s_plus_step",
    "chase_s_step",
    "rhc_step",
    "run_policy",
]
