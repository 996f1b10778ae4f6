"""Energy-aware radio network simulator with BFS, diameter and minimum-cut protocols."""
from .constants import DEFAULT_PROFILE, ConstantsProfile, load_profile, parse_profile
from .graph import Graph, GraphError
from .radio import (CollisionModel, EnergyLedger, ModelConfig, RadioNetwork, RoundAction,
                    algorithm_energy, run_protocol, step_round)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_PROFILE", "ConstantsProfile", "load_profile", "parse_profile", "Graph", "GraphError",
    "CollisionModel", "EnergyLedger", "ModelConfig", "RadioNetwork", "RoundAction", "algorithm_energy",
    "run_protocol", "step_round",
]
