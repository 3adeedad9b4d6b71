"""Models package initialization."""
from app.models.schemas import (
    DynamicCondition,
    SurrogateChannelParams,
    PilotConfig,
    TrainConfig,
    ScenarioConfig,
    EvalReport,
)
from app.models.plan_schemas import SweepPoint, AblationPlan

__all__ = [
    'DynamicCondition',
    'SurrogateChannelParams',
    'PilotConfig',
    'TrainConfig',
    'ScenarioConfig',
    'EvalReport',
    'SweepPoint',
    'AblationPlan',
]
