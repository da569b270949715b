from .harness import SimClient, SimHarness
from .scenario import ScenarioError, ScenarioRunner, parse_scenario, replay_actions, run_scenario

__all__ = [
    "SimClient",
    "SimHarness",
    "ScenarioError",
    "ScenarioRunner",
    "parse_scenario",
    "replay_actions",
    "run_scenario",
]
