import math

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveInt,
    field_validator,
    model_validator,
)


class ChoiceProvenance(BaseModel):
    """Where an optimized phase choice came from."""

    model_config = ConfigDict(frozen=True)

    train_n: int
    seed: int
    restart: int
    objective: float


class PhaseChoice(BaseModel):
    """
    Size-independent parameters of one quantum heuristic.

    Conflict phases are pi * P_rho(c/m) and mixing phases pi * P_tau(b/n),
    where P_x is the polynomial with coefficients x (constant term first).
    `steps` is the trial length; None means one step per variable.
    """

    model_config = ConfigDict(frozen=True)

    rho: tuple[float, ...] = (0.0, 0.0, 0.0)
    tau: tuple[float, ...] = (0.0, 0.0, 0.0)
    steps: PositiveInt | None = None
    provenance: ChoiceProvenance | None = None

    @field_validator("rho", "tau")
    @classmethod
    def check_finite(cls, coefficients: tuple[float, ...]) -> tuple[float, ...]:
        if not coefficients:
            raise ValueError("At least one coefficient is required")
        if not all(math.isfinite(c) for c in coefficients):
            raise ValueError(f"Coefficients must be finite: {coefficients}")
        return coefficients

    @classmethod
    def identity(cls, rho_terms: int = 3, tau_terms: int = 3) -> "PhaseChoice":
        """One step with zero phases: leaves the uniform superposition untouched."""
        return cls(rho=(0.0,) * rho_terms, tau=(0.0,) * tau_terms, steps=1)

    def negated(self) -> "PhaseChoice":
        return self.model_copy(
            update={
                "rho": tuple(-c for c in self.rho),
                "tau": tuple(-c for c in self.tau),
            }
        )

    def resolved_steps(self, n: int) -> int:
        return self.steps if self.steps is not None else n

    def coefficients(self) -> np.ndarray:
        return np.array(self.rho + self.tau, dtype=np.float64)

    def with_coefficients(self, values: np.ndarray) -> "PhaseChoice":
        r = len(self.rho)
        return self.model_copy(
            update={
                "rho": tuple(float(v) for v in values[:r]),
                "tau": tuple(float(v) for v in values[r:]),
            }
        )


class StateVector(BaseModel):
    """2^qubits complex amplitudes; basis index k * 2^n + i holds selector k, assignment i."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    amplitudes: np.ndarray
    qubits: int = Field(ge=1)

    @field_validator("amplitudes", mode="before")
    @classmethod
    def as_complex(cls, value) -> np.ndarray:
        return np.ascontiguousarray(value, dtype=np.complex128).reshape(-1)

    @model_validator(mode="after")
    def check_length(self):
        if self.amplitudes.shape[0] != 1 << self.qubits:
            raise ValueError(
                f"Expected {1 << self.qubits} amplitudes for {self.qubits} qubits, "
                f"got {self.amplitudes.shape[0]}"
            )
        return self

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2
