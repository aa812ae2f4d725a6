from typing import Annotated, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

# One truth value per variable: bit i of the integer is variable i.
Assignment = Annotated[int, Field(ge=0)]


class Clause(BaseModel):
    """OR of literals over distinct variables; `negated[j]` flips `variables[j]`."""

    model_config = ConfigDict(frozen=True)

    variables: tuple[int, ...] = Field(min_length=1)
    negated: tuple[bool, ...]

    @model_validator(mode="after")
    def check_literals(self):
        if len(self.variables) != len(self.negated):
            raise ValueError("variables and negated must have the same length")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"Clause repeats a variable: {self.variables}")
        if any(v < 0 for v in self.variables):
            raise ValueError(f"Variable indices must be non-negative: {self.variables}")
        return self

    @property
    def arity(self) -> int:
        return len(self.variables)

    @classmethod
    def from_literals(cls, literals: Sequence[int]) -> "Clause":
        """Build from signed 1-based DIMACS literals."""
        return cls(
            variables=tuple(abs(lit) - 1 for lit in literals),
            negated=tuple(lit < 0 for lit in literals),
        )

    def literals(self) -> list[int]:
        return [-(v + 1) if neg else v + 1 for v, neg in zip(self.variables, self.negated)]


class SatInstance(BaseModel):
    """CNF formula over variables 0..n-1."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1, le=30)
    clauses: tuple[Clause, ...] = ()

    @model_validator(mode="after")
    def check_variables(self):
        for index, clause in enumerate(self.clauses):
            if max(clause.variables) >= self.n:
                raise ValueError(
                    f"Clause {index} references variable {max(clause.variables)} >= n={self.n}"
                )
        return self

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def size(self) -> int:
        return 1 << self.n

    @classmethod
    def from_literals(cls, n: int, clauses: Sequence[Sequence[int]]) -> "SatInstance":
        return cls(n=n, clauses=tuple(Clause.from_literals(c) for c in clauses))


class SolutionSet(BaseModel):
    """Marked assignments of an n-variable search space."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1, le=30)
    solutions: frozenset[Assignment]

    @model_validator(mode="after")
    def check_range(self):
        if self.solutions and max(self.solutions) >= 1 << self.n:
            raise ValueError(f"Assignment out of range for n={self.n}")
        return self


class LabeledInstance(BaseModel):
    """Generated instance with its id, seed and enumerated solutions."""

    model_config = ConfigDict(frozen=True)

    instance_id: str
    seed: int
    instance: SatInstance
    solutions: frozenset[Assignment]
