"""Pydantic schemas for ablation planning and execution."""
from pydantic import BaseModel, Field
from typing import List, Dict, Any
from datetime import datetime


class SweepPoint(BaseModel):
    """Individual point of an ablation sweep."""
    point_id: str = Field(..., description="Unique identifier for this point")
    axis: str = Field(..., description="Name of the swept axis")
    value: Any = Field(..., description="Axis value at this point")
    overrides: Dict[str, Any] = Field(default_factory=dict, description="ScenarioConfig fields replaced at this point")
    methods: List[str] = Field(..., description="Methods evaluated at this point")
    horizons: List[int] = Field(default_factory=list, description="Extra horizons reported from the same rollout")


class AblationPlan(BaseModel):
    """Complete ablation plan with sweep points and metadata."""
    plan_id: str = Field(..., description="Unique identifier for this plan")
    name: str = Field(..., description="Ablation name")
    axis: str = Field(..., description="Axis swept by this plan")
    points: List[SweepPoint] = Field(..., description="Ordered sweep points")
    metadata: Dict[str, Any] = Field(default_factory=dict, description="Additional plan-specific metadata")
    created_at: datetime = Field(default_factory=datetime.utcnow, description="When this plan was created")
