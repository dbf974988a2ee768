"""Tree-based connectivity-preserving swarm simulator."""

from ._core import (
    ConfigError,
    Params,
    SimulationFault,
    connected,
    default_params,
    fiedler_value,
    load_params,
    max_mission_time,
    run,
    sweep_csv,
    tree_force,
)

__all__ = [
    "ConfigError",
    "Params",
    "SimulationFault",
    "connected",
    "default_params",
    "fiedler_value",
    "load_params",
    "max_mission_time",
    "run",
    "sweep_csv",
    "tree_force",
]
