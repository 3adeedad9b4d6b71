"""Ablation harness package initialization."""
from app.harness.ablation_planner import AblationPlanner, ablation_planner, point_config
from app.harness.ablation_executor import AblationExecutor, ablation_executor, run_ablation

__all__ = [
    'AblationPlanner',
    'ablation_planner',
    'point_config',
    'AblationExecutor',
    'ablation_executor',
    'run_ablation',
]
