import math

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, computed_field


class ProblemAngle(BaseModel):
    """Rotation angle of amplitude amplification for a solution fraction S/N."""

    model_config = ConfigDict(frozen=True)

    fraction: float = Field(gt=0.0, le=1.0)

    @computed_field
    @property
    def theta(self) -> float:
        return math.asin(math.sqrt(self.fraction))

    @classmethod
    def from_counts(cls, solutions: int, total: int) -> "ProblemAngle":
        return cls(fraction=solutions / total)


class FrontierPoint(BaseModel):
    """Mean/risk summary of restarting after every `t` iterations."""

    model_config = ConfigDict(frozen=True)

    t: PositiveInt
    p: float = Field(gt=0.0, le=1.0)
    mean: float
    second_moment: float
    std: float
    sharpe: float
    efficient: bool = False


class ProbabilityPoint(BaseModel):
    t: int
    p: float


class FrontierSummary(BaseModel):
    fraction: float
    certainty_t: int | None
    certainty_mean: float | None
    optimal_t: int
    optimal_mean: float
    optimal_p: float
    optimal_sharpe: float
    mean_ratio: float | None
    continuous_mean: float | None
