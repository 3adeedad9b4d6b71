"""Planner that expands a named ablation into sweep points over a base scenario."""
from typing import Any, Dict, List
import logging
import uuid

from pydantic import ValidationError

from app.exceptions import ConfigurationError
from app.models.plan_schemas import AblationPlan, SweepPoint
from app.models.schemas import ScenarioConfig
from app.orchestrator.scenario_orchestrator import KNOWN_METHODS

logger = logging.getLogger(__name__)

BASELINES = ["AR", "ARKF", "KPIN"]

# name -> (config field, grid, methods)
ABLATIONS: Dict[str, tuple] = {
    "strategies": ("strategy", ["S1/S2/S3"], ["S1", "S2", "KPIN"]),
    "gru_update": ("gru_update", [True], ["KPIN", "KPIN_MLP"]),
    "batch_size": ("n_b", [1, 5, 10, 20], ["KPIN"]),
    "snr_sweep": ("snr_db", [0.0, 10.0, 20.0, 30.0], BASELINES),
    "aging_sweep": ("k", [0.5, 1.0, 2.0], BASELINES),
    "antenna_sweep": ("n_rx", [2, 4, 8], BASELINES),
    "train_length": ("train_length", [200, 400, 800], ["ARKF", "KPIN"]),
    "label_noise": ("label_noise", [0.0, 0.1, 0.3], ["S1", "S2", "KPIN"]),
}
GRU_HORIZONS = [10, 25, 50]


class AblationPlanner:
    """Builds validated ablation plans."""

    def __init__(self):
        self.names = sorted(ABLATIONS)

    def plan(self, name: str, base: ScenarioConfig) -> AblationPlan:
        """
        Create the sweep plan of a named ablation.

        Args:
            name: One of strategies, gru_update, batch_size, snr_sweep, aging_sweep,
                antenna_sweep, train_length, label_noise
            base: Scenario every point starts from

        Returns:
            Ablation plan with one sweep point per grid value
        """
        if name not in ABLATIONS:
            raise ConfigurationError(f"Unknown ablation '{name}'; expected one of {self.names}")
        axis, grid, methods = ABLATIONS[name]

        points: List[SweepPoint] = []
        for value in grid:
            overrides = self._overrides(axis, value)
            if not self._admissible(base, overrides):
                logger.warning(f"Skipping {axis}={value}: not admissible for the base scenario")
                continue
            horizons = [h for h in GRU_HORIZONS if h <= base.horizon] if name == "gru_update" else []
            points.append(SweepPoint(
                point_id=f"{name}_{len(points)}",
                axis=axis,
                value=value,
                overrides=overrides,
                methods=list(methods),
                horizons=horizons,
            ))

        plan = AblationPlan(
            plan_id=self._create_plan_id(name),
            name=name,
            axis=axis,
            points=points,
            metadata={"base_config_hash": base.config_hash()},
        )
        if not self._validate_plan(plan, base):
            raise ConfigurationError(f"Ablation '{name}' produced an invalid plan for this base scenario")
        logger.info(f"Planned ablation {name}: {len(points)} points over {axis}")
        return plan

    def _overrides(self, axis: str, value: Any) -> Dict[str, Any]:
        if axis == "strategy":
            return {}
        if axis == "label_noise":
            return {"label_noise": value or None}
        return {axis: value}

    def _admissible(self, base: ScenarioConfig, overrides: Dict[str, Any]) -> bool:
        try:
            point_config(base, overrides)
        except (ValidationError, ValueError):
            return False
        return True

    def _create_plan_id(self, name: str) -> str:
        """Generate unique plan ID."""
        return f"{name}_{uuid.uuid4().hex[:8]}"

    def _validate_plan(self, plan: AblationPlan, base: ScenarioConfig) -> bool:
        """
        Validate that a plan is well-formed.

        Args:
            plan: Ablation plan to validate
            base: Base scenario

        Returns:
            True if plan is valid
        """
        if not plan.points:
            logger.warning("Plan has no points")
            return False

        for point in plan.points:
            unknown = set(point.methods) - set(KNOWN_METHODS)
            if unknown:
                logger.warning(f"Point {point.point_id} has unknown methods: {unknown}")
                return False
            if any(h > base.horizon for h in point.horizons):
                logger.warning(f"Point {point.point_id} asks for a horizon beyond L={base.horizon}")
                return False

        return True


def point_config(base: ScenarioConfig, overrides: Dict[str, Any]) -> ScenarioConfig:
    """Base scenario with the overrides of one sweep point applied and re-validated."""
    return ScenarioConfig(**{**base.model_dump(), **overrides})


# Global ablation planner instance
ablation_planner = AblationPlanner()
