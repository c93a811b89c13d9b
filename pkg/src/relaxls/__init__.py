"""relaxls: interlaced least-squares parameter estimators with regressor
extension and mixing, for linear, monotone-nonlinear and switched
regression equations, plus a scenario simulation CLI."""

from . import _core
from .regression import (
    ConfigurationError,
    DimensionError,
    ExcitationReport,
    MonotoneMap,
    RegressionSample,
    ScalarRegression,
    adjugate,
    check_lipschitz,
    check_monotonicity,
    identifiability_check,
    identity_map,
    ie_check_ct,
    ie_check_dt,
    mix,
)
from .ct import CtEstimatorState, CtGains, ct_linear_step, ct_step
from .dt import (
    DtEstimatorState,
    DtGains,
    SwitchSchedule,
    SwitchedDtState,
    dt_linear_step,
    dt_step,
    sigma_margin,
    switched_step,
)
from .scenarios import DisturbanceSpec, ScenarioConfig, TraceRecord, run_scenario

__version__ = "0.1.0"
__all__ = [
    "ConfigurationError", "DimensionError", "ExcitationReport", "MonotoneMap",
    "RegressionSample", "ScalarRegression", "adjugate", "check_lipschitz",
    "check_monotonicity", "identifiability_check", "identity_map",
    "ie_check_ct", "ie_check_dt", "mix", "CtEstimatorState", "CtGains",
    "ct_linear_step", "ct_step", "DtEstimatorState", "DtGains",
    "SwitchSchedule", "SwitchedDtState", "dt_linear_step", "dt_step",
    "sigma_margin", "switched_step", "DisturbanceSpec", "ScenarioConfig",
    "TraceRecord", "run_scenario", "_core",
]
