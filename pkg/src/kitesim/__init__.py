"""kitesim: deterministic simulator, winch controllers, and ground-station
service for a kite-based tethered flying robot."""

from .config import (
    Config,
    ConfigError,
    ControllerConfig,
    PhysicalConstants,
    SimClock,
    WinchParams,
    load_config,
    validate_config,
)
from .wind import WindScenario, wind_at, scenario_sweep
from .physics import KiteState, WinchState
from .controllers import ControllerState, Mode
from .scenarios import ScenarioSpec, builtin_scenario, resolve_scenario
from .station import RunManifest, SimulationRun, run_scenario

__version__ = "0.1.0"
