"""Executor that runs an ablation plan through the scenario pipeline."""
from typing import Dict, List, Optional
import logging

import numpy as np
import pandas as pd

from app.harness.ablation_planner import ablation_planner, point_config
from app.metrics.evaluation import nmse_at_horizons, to_db
from app.models.plan_schemas import AblationPlan, SweepPoint
from app.models.schemas import EvalReport, ScenarioConfig
from app.orchestrator.scenario_orchestrator import run_scenario

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["axis", "value", "method", "seed", "horizon", "nmse_db", "rate", "epoch_ms"]


class AblationExecutor:
    """Runs every sweep point of a plan and collects a long-format table."""

    def execute(self, plan: AblationPlan, base: ScenarioConfig, max_workers: Optional[int] = None) -> pd.DataFrame:
        """
        Execute an ablation plan.

        Args:
            plan: Plan from the ablation planner
            base: Base scenario
            max_workers: Worker-pool width for the seeds of each point

        Returns:
            Table with one row per (point, method, seed, horizon)
        """
        rows: List[Dict] = []
        for point in plan.points:
            cfg = point_config(base, point.overrides)
            logger.info(f"Ablation {plan.name}: {point.axis}={point.value}")
            result = run_scenario(cfg, point.methods, max_workers=max_workers)
            for report in result.reports:
                rows.extend(self._rows(point, report, cfg.horizon))
        return pd.DataFrame(rows, columns=TABLE_COLUMNS)

    def _rows(self, point: SweepPoint, report: EvalReport, horizon: int) -> List[Dict]:
        base_row = {
            "axis": point.axis,
            "value": point.value,
            "method": report.method,
            "seed": report.seed,
            "rate": report.rate_bits_per_s_per_hz,
            "epoch_ms": report.epoch_ms,
        }
        rows = [{**base_row, "horizon": horizon, "nmse_db": report.nmse_db}]
        if point.horizons:
            linear = 10.0 ** (np.asarray(report.nse_per_step_db) / 10.0)
            for h, value in zip(point.horizons, nmse_at_horizons(linear, point.horizons)):
                if h != horizon:
                    rows.append({**base_row, "horizon": h, "nmse_db": float(to_db(value))})
        return rows


# Global ablation executor instance
ablation_executor = AblationExecutor()


def run_ablation(name: str, base: ScenarioConfig, max_workers: Optional[int] = None) -> pd.DataFrame:
    """Plan and execute a named ablation over a base scenario."""
    plan = ablation_planner.plan(name, base)
    return ablation_executor.execute(plan, base, max_workers=max_workers)
