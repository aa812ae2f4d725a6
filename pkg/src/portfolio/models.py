import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from src.artifacts import VersionedDocument


class ChoiceSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    choice_id: str
    p: float = Field(ge=0.0, le=1.0)
    steps: PositiveInt = 1


class SuccessDistribution(BaseModel):
    """Per-choice success probabilities of one instance, with selection weights."""

    model_config = ConfigDict(frozen=True)

    samples: tuple[ChoiceSample, ...] = Field(min_length=1)
    weights: tuple[float, ...] | None = None

    @model_validator(mode="after")
    def check_weights(self):
        if self.weights is None:
            return self
        if len(self.weights) != len(self.samples):
            raise ValueError("One weight per sample is required")
        if any(w < 0 for w in self.weights):
            raise ValueError("Weights must be non-negative")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"Weights must sum to 1, got {math.fsum(self.weights)!r}")
        return self

    @classmethod
    def from_probabilities(
        cls, probabilities: list[float], weights: list[float] | None = None
    ) -> "SuccessDistribution":
        return cls(
            samples=tuple(
                ChoiceSample(choice_id=f"choice-{k:04d}", p=p)
                for k, p in enumerate(probabilities)
            ),
            weights=tuple(weights) if weights is not None else None,
        )

    @property
    def probabilities(self) -> list[float]:
        return [s.p for s in self.samples]

    @property
    def resolved_weights(self) -> list[float]:
        if self.weights is not None:
            return list(self.weights)
        return [1.0 / len(self.samples)] * len(self.samples)


class StrategyStats(BaseModel):
    """Number of measurements until success: mean, variance, deviation."""

    mean: float
    variance: float
    std: float
    divergent: bool = False
    mean_iterations: float | None = None


class EquivalenceReport(BaseModel):
    quantum_probability: float
    weighted_probability: float
    difference: float
    choice_probabilities: list[float]


class ScalingPoint(BaseModel):
    probability: float
    rounds: int


class ScalingFit(BaseModel):
    slope: float
    intercept: float
    points: list[ScalingPoint]


class SampleRecord(BaseModel):
    instance_id: str
    choice_id: str
    p: float
    steps: int


class InstanceStatsRecord(BaseModel):
    instance_id: str
    solution_count: int
    single_mean: float
    single_std: float
    single_divergent: bool
    single_mean_iterations: float | None
    mixed_mean: float
    mixed_std: float
    mixed_mean_iterations: float | None
    jensen_gap: float | None


class HistogramDocument(VersionedDocument):
    schema_name: str = Field(default="histogram/1", alias="schema")
    choices_source: str
    excluded_unsat_count: int
    samples: list[SampleRecord]
    stats: list[InstanceStatsRecord]


class AmplifyRecord(VersionedDocument):
    schema_name: str = Field(default="amplify/1", alias="schema")
    instance_id: str
    portfolio_id: str
    rounds: int
    portfolio_probability: float
    amplified_probability: float
    closed_form_probability: float


Strategy = Literal["single", "mixed"]
