"""Oracles built independently of the library's fast paths."""

import numpy as np
from scipy.linalg import hadamard

from src.qsim.models import PhaseChoice
from src.sat_core import service as sat_service
from src.sat_core.models import SatInstance


def forced_instance(n: int, forced: int) -> SatInstance:
    """3-SAT instance whose solutions are exactly the assignments with variables 0..forced-1 true."""
    clauses = []
    for i in range(forced):
        a, b = (i + 1) % n, (i + 2) % n
        for sa in (1, -1):
            for sb in (1, -1):
                clauses.append([i + 1, sa * (a + 1), sb * (b + 1)])
    return SatInstance.from_literals(n, clauses)


def polynomial(coefficients, x):
    return sum(c * x**j for j, c in enumerate(coefficients))


def dense_mixing(n: int, tau) -> np.ndarray:
    size = 1 << n
    walsh = hadamard(size) / np.sqrt(size)
    weights = np.array([bin(j).count("1") for j in range(size)])
    diagonal = np.diag(np.exp(1j * np.pi * polynomial(tau, weights / n)))
    return walsh @ diagonal @ walsh


def dense_conflict_phase(instance: SatInstance, rho) -> np.ndarray:
    counts = np.array([sat_service.conflicts(instance, a) for a in range(instance.size)])
    x = counts / instance.m if instance.m else np.zeros(instance.size)
    return np.diag(np.exp(1j * np.pi * polynomial(rho, x)))


def dense_trial_operator(instance: SatInstance, choice: PhaseChoice) -> np.ndarray:
    step = dense_mixing(instance.n, choice.tau) @ dense_conflict_phase(instance, choice.rho)
    return np.linalg.matrix_power(step, choice.resolved_steps(instance.n))


def dense_trial_probability(
    instance: SatInstance, choice: PhaseChoice, solutions
) -> float:
    size = instance.size
    start = np.full(size, size**-0.5, dtype=np.complex128)
    final = dense_trial_operator(instance, choice) @ start
    return float(sum(abs(final[s]) ** 2 for s in solutions))
