from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from src.artifacts import VersionedDocument
from src.portfolio.models import ChoiceSample, StrategyStats
from src.qsim.models import PhaseChoice


class TrainingConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    train_n: int = Field(ge=3)
    train_count: PositiveInt
    ratio: float = Field(default=4.25, gt=0.0)
    restarts: PositiveInt = 1
    budget: PositiveInt = 500
    seed: int = Field(ge=0, lt=2**64)
    steps: PositiveInt | None = None
    rho_terms: PositiveInt = 3
    tau_terms: PositiveInt = 3
    initial_step: float = Field(default=0.5, gt=0.0)
    min_step: float = Field(default=1e-4, gt=0.0)


class PortfolioSet(VersionedDocument):
    """Phase choices to draw from; optimized sets carry their training config."""

    schema_name: str = Field(default="portfolio/1", alias="schema")
    choices: list[PhaseChoice] = Field(min_length=1)
    config: TrainingConfig | None = None

    @model_validator(mode="after")
    def check_provenance(self):
        if self.config is not None and any(c.provenance is None for c in self.choices):
            raise ValueError("Optimized portfolios need provenance on every choice")
        return self


class ChoiceStats(BaseModel):
    choice_id: str
    p: float
    mean: float | None
    std: float | None


class InstanceEvaluation(BaseModel):
    instance_id: str
    seed: int
    solution_count: int
    samples: list[ChoiceSample]
    choice_stats: list[ChoiceStats]
    single: StrategyStats
    mixed: StrategyStats
    jensen_gap: float | None
    mixed_not_worse: bool


class EvaluationAggregate(BaseModel):
    test_n: int
    ratio: float
    portfolio_id: str
    instance_count: int
    median_single_mean: float
    median_mixed_mean: float
    median_jensen_gap: float | None
    median_single_iterations: float | None
    median_mixed_iterations: float | None
    excluded_unsat_count: int


class EvaluationReport(VersionedDocument):
    schema_name: str = Field(default="report/1", alias="schema")
    records: list[InstanceEvaluation]
    aggregate: EvaluationAggregate


class PortfolioComparison(BaseModel):
    median_mixed_means: dict[str, float]
    median_single_means: dict[str, float]
    best: str


class ComparisonReport(VersionedDocument):
    schema_name: str = Field(default="comparison/1", alias="schema")
    reports: dict[str, EvaluationReport]
    comparison: PortfolioComparison
