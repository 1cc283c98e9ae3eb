"""Tunable-CUBIC congestion control sandbox."""

from .cubic import (
    CubicParams,
    CubicState,
    decode_params,
    default_params,
    encode_params,
    init_state,
)
from .netsim import LinkConfig, Simulator, TelemetrySample, telemetry_to_csv
from .scenarios import (
    ExperimentResult,
    FlowSpec,
    Scenario,
    jain_fairness,
    load_scenario,
    run_scenario,
    transfer_time,
)
from .transport import MSS, Flow, RouteParams
from .predictor import PredictedTrace, PredictorModel, peak_window, trace_to_csv
from .control import ControlError, LiveRun, ParamUpdate, serve, validate_update

__all__ = [
    "CubicParams", "CubicState", "decode_params", "default_params",
    "encode_params", "init_state",
    "LinkConfig", "Simulator", "TelemetrySample", "telemetry_to_csv",
    "ExperimentResult", "FlowSpec", "Scenario", "jain_fairness",
    "load_scenario", "run_scenario", "transfer_time",
    "MSS", "Flow", "RouteParams",
    "PredictedTrace", "PredictorModel", "peak_window", "trace_to_csv",
    "ControlError", "LiveRun", "ParamUpdate", "serve", "validate_update",
]

__version__ = "0.1.0"
