"""
Protocol definitions for nlevel-factor.

Pydantic models for config files, reports and figure checks.
"""

from nlevel_factor.protocol.types import (
    CheckResult,
    CommandName,
    CrossingEventModel,
    EventsFile,
    FactorizeReport,
    FigureReport,
    GraphConfig,
    MeanFieldReport,
    ModelConfig,
    OutputConfig,
    ProjectReport,
    RunConfig,
    SweepConfig,
    load_model_config,
    load_run_config,
    parse_model_config,
    parse_sweep_config,
    read_structured,
)

__all__ = [
    "CheckResult",
    "CommandName",
    "CrossingEventModel",
    "EventsFile",
    "FactorizeReport",
    "FigureReport",
    "GraphConfig",
    "MeanFieldReport",
    "ModelConfig",
    "OutputConfig",
    "ProjectReport",
    "RunConfig",
    "SweepConfig",
    "load_model_config",
    "load_run_config",
    "parse_model_config",
    "parse_sweep_config",
    "read_structured",
]
