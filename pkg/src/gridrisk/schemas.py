"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ComponentInfo(BaseModel):
    id: int
    kind: str
    from_bus: int
    to_bus: int


class NetworkResponse(BaseModel):
    buses: int
    branches: int
    lines: int
    transformers: int
    base_mva: float
    total_demand: float
    maintainable: list[ComponentInfo]


class StatsResponse(BaseModel):
    n: int
    y0: float
    baseline_risk: float
    network_hash: str
    model_hash: str
    master_seed: int | None
    truncated_samples: int


class RiskRequest(BaseModel):
    maintained: list[int] = Field(default_factory=list)
    y0: float = 0.0
    beta: float = Field(default=0.95, gt=0.0, lt=1.0)
    eps_bar: float = Field(default=0.1, gt=0.0)


class RiskResponse(BaseModel):
    risk: float
    baseline_risk: float
    reduction_ratio: float | None
    epsilon_hat: float | None
    interval: tuple[float, float]
    required_n: int | None
    n: int


class SensitivityRequest(BaseModel):
    y0: float = 0.0
    beta: float = Field(default=0.95, gt=0.0, lt=1.0)


class SensitivityRow(BaseModel):
    component: int
    risk: float
    reduction_ratio: float | None


class SensitivityResponse(BaseModel):
    baseline_risk: float
    rows: list[SensitivityRow]
    mean: SensitivityRow
    y0: float
    n: int


class OptimizeRequest(BaseModel):
    alg: str = Field(pattern="^(enum|one|two)$")
    m_max: int = Field(ge=1)
    m_k: int | None = None
    y0: float = 0.0
    beta: float = Field(default=0.95, gt=0.0, lt=1.0)
    eps_bar: float = Field(default=0.1, gt=0.0)


class CredibilityPayload(BaseModel):
    risk: float
    variance: float
    per_sample_variance: float
    epsilon_hat: float | None
    beta: float
    interval: tuple[float, float]
    required_n: int | None
    n: int
    absolute_half_width: float
    nonzero_samples: int
    normality_warning: bool


class RoundPayload(BaseModel):
    round: int
    n: int
    strategy: list[int]
    risk: float
    epsilon_hat: float | None
    required_n: int | None


class OptimizeResponse(BaseModel):
    strategy: list[int]
    risk: float
    baseline_risk: float
    reduction_ratio: float | None
    scenarios_evaluated: int
    scenarios_total: int
    algorithm: str
    credibility: CredibilityPayload | None
    history: list[RoundPayload]
    converged: bool
