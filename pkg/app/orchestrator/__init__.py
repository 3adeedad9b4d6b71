"""Orchestrator package initialization."""
from app.orchestrator.scenario_orchestrator import (
    ScenarioOrchestrator,
    ScenarioResult,
    scenario_orchestrator,
    run_scenario,
)

__all__ = ['ScenarioOrchestrator', 'ScenarioResult', 'scenario_orchestrator', 'run_scenario']
