from typing import Iterable

import numpy as np
from loguru import logger
from numpy.polynomial import polynomial

from src.config import settings
from src.exceptions import (
    DimensionMismatchError,
    InputError,
    QubitLimitExceeded,
    UnsolvableInstanceError,
)
from src.qsim.models import PhaseChoice, StateVector
from src.sat_core import service as sat_service
from src.sat_core.models import SatInstance, SolutionSet


def check_qubits(q: int, max_qubits: int | None = None) -> int:
    limit = settings.MAX_QUBITS if max_qubits is None else max_qubits
    if q < 1:
        raise InputError(message=f"Qubit count must be positive, got {q}")
    if q > limit:
        raise QubitLimitExceeded(debug=f"q={q} > MAX_QUBITS={limit}")
    return q


def uniform_state(q: int, max_qubits: int | None = None) -> StateVector:
    """
    Equal superposition of all 2^q basis states.

    Raises:
        QubitLimitExceeded: If q is above the configured memory guard.
    """
    check_qubits(q, max_qubits)
    size = 1 << q
    return StateVector(
        amplitudes=np.full(size, size**-0.5, dtype=np.complex128), qubits=q
    )


def measurement_distribution(state: StateVector) -> np.ndarray:
    return state.probabilities()


def walsh_hadamard(amplitudes: np.ndarray) -> np.ndarray:
    """
    Normalized fast Walsh-Hadamard transform along the last axis.

    Costs O(n 2^n) per row and is its own inverse.
    """
    a = np.array(amplitudes, dtype=np.complex128)
    lead, size = a.shape[:-1], a.shape[-1]
    if size & (size - 1):
        raise DimensionMismatchError(debug=f"Length {size} is not a power of two")

    h = 1
    while h < size:
        pairs = a.reshape(*lead, size // (2 * h), 2, h)
        x, y = pairs[..., 0, :], pairs[..., 1, :]
        a = np.stack((x + y, x - y), axis=-2).reshape(*lead, size)
        h *= 2
    return a * size**-0.5


def conflict_phases(instance: SatInstance, rho: Iterable[float]) -> np.ndarray:
    """exp(i pi P_rho(c/m)) for every assignment's conflict count c."""
    counts = sat_service.conflict_table(instance)
    x = counts / instance.m if instance.m else np.zeros(counts.shape)
    return np.exp(1j * np.pi * polynomial.polyval(x, tuple(rho)))


def walsh_phases(n: int, tau: Iterable[float]) -> np.ndarray:
    """exp(i pi P_tau(b/n)) for every Walsh index of bit weight b."""
    weights = np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.float64)
    return np.exp(1j * np.pi * polynomial.polyval(weights / n, tuple(tau)))


def apply_conflict_phase(
    state: StateVector, instance: SatInstance, rho: Iterable[float]
) -> StateVector:
    """
    Multiply each assignment's amplitude by exp(i pi P_rho(c/m)).

    Raises:
        DimensionMismatchError: If the state does not have instance.n qubits.
    """
    _check_register(state, instance.n)
    return StateVector(
        amplitudes=state.amplitudes * conflict_phases(instance, rho),
        qubits=state.qubits,
    )


def apply_hamming_mixing(
    state: StateVector, tau: Iterable[float], n: int
) -> StateVector:
    """
    Apply W D W, whose matrix elements depend only on Hamming distance.

    D is diagonal in the Walsh basis with entries exp(i pi P_tau(b/n)).

    Raises:
        DimensionMismatchError: If the state does not have n qubits.
    """
    _check_register(state, n)
    return StateVector(
        amplitudes=_mix(state.amplitudes, walsh_phases(n, tau)), qubits=state.qubits
    )


def apply_trial(
    amplitudes: np.ndarray,
    instance: SatInstance,
    choice: PhaseChoice,
    inverse: bool = False,
) -> np.ndarray:
    """
    Run the trial operator (or its inverse) on the last axis of `amplitudes`.

    One step is the conflict phase followed by Hamming mixing. The inverse
    runs the steps in reverse order with both phase polynomials negated.

    Parameters:
        amplitudes (np.ndarray): Array whose last axis has length 2^n.
        instance (SatInstance): Formula supplying conflict counts.
        choice (PhaseChoice): Phase polynomials and trial length.
        inverse (bool): Apply U^dagger instead of U.

    Returns:
        np.ndarray: New array of the same shape.
    """
    if amplitudes.shape[-1] != instance.size:
        raise DimensionMismatchError(
            debug=f"last axis {amplitudes.shape[-1]} != 2^{instance.n}"
        )

    steps = choice.resolved_steps(instance.n)
    kick = conflict_phases(instance, choice.rho)
    mixing = walsh_phases(instance.n, choice.tau)

    a = np.array(amplitudes, dtype=np.complex128)
    if inverse:
        kick, mixing = kick.conj(), mixing.conj()
        for _ in range(steps):
            a = _mix(a, mixing) * kick
    else:
        for _ in range(steps):
            a = _mix(a * kick, mixing)
    return a


def evolve(state: StateVector, instance: SatInstance, choice: PhaseChoice) -> StateVector:
    _check_register(state, instance.n)
    return StateVector(
        amplitudes=apply_trial(state.amplitudes, instance, choice), qubits=state.qubits
    )


def evolve_inverse(
    state: StateVector, instance: SatInstance, choice: PhaseChoice
) -> StateVector:
    _check_register(state, instance.n)
    return StateVector(
        amplitudes=apply_trial(state.amplitudes, instance, choice, inverse=True),
        qubits=state.qubits,
    )


def heuristic_trial(instance: SatInstance, choice: PhaseChoice) -> StateVector:
    """
    One trial of the phase heuristic, starting from the uniform superposition.

    Parameters:
        instance (SatInstance): Formula to search.
        choice (PhaseChoice): Phase parameters and trial length.

    Returns:
        StateVector: The state right before measurement.
    """
    logger.debug(
        f"Heuristic trial n={instance.n} steps={choice.resolved_steps(instance.n)}"
    )
    return evolve(uniform_state(instance.n), instance, choice)


def grover_trial(target: SatInstance | SolutionSet, t: int) -> StateVector:
    """
    Uniform state followed by `t` amplitude-amplification iterations.

    Each iteration flips the sign of solution amplitudes, then inverts every
    amplitude about the mean.

    Parameters:
        target (SatInstance | SolutionSet): Formula (solutions enumerated) or explicit marked set.
        t (int): Iteration count, t >= 0.

    Returns:
        StateVector: The amplified state.

    Raises:
        UnsolvableInstanceError: If there are no marked states.
    """
    if t < 0:
        raise InputError(message=f"Iteration count must be non-negative, got {t}")
    if isinstance(target, SatInstance):
        target = SolutionSet(n=target.n, solutions=sat_service.solutions_bruteforce(target))
    if not target.solutions:
        raise UnsolvableInstanceError(message="Amplitude amplification needs at least one marked state")

    state = uniform_state(target.n)
    a = state.amplitudes
    marked = _solution_mask(target.n, target.solutions)
    for _ in range(t):
        a[marked] *= -1
        a = 2 * a.mean() - a
    return StateVector(amplitudes=a, qubits=target.n)


def success_probability(
    state: StateVector, solutions: Iterable[int], selector_qubits: int = 0
) -> float:
    """
    Probability that measuring the assignment register yields a solution.

    Selector qubits (the high bits of the basis index) are marginalized.

    Parameters:
        state (StateVector): State over n + selector_qubits qubits.
        solutions (Iterable[int]): Satisfying assignments.
        selector_qubits (int): Number of selector qubits.

    Returns:
        float: Total probability of solution assignments.
    """
    n = state.qubits - selector_qubits
    if n < 1 or selector_qubits < 0:
        raise DimensionMismatchError(
            debug=f"qubits={state.qubits}, selector_qubits={selector_qubits}"
        )
    marginal = state.probabilities().reshape(1 << selector_qubits, 1 << n).sum(axis=0)
    mask = _solution_mask(n, solutions)
    return float(min(1.0, marginal[mask].sum()))


def _mix(amplitudes: np.ndarray, mixing: np.ndarray) -> np.ndarray:
    return walsh_hadamard(walsh_hadamard(amplitudes) * mixing)


def _solution_mask(n: int, solutions: Iterable[int]) -> np.ndarray:
    mask = np.zeros(1 << n, dtype=bool)
    indices = np.fromiter(solutions, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= 1 << n):
        raise InputError(message=f"Solution index out of range for n={n}")
    mask[indices] = True
    return mask


def _check_register(state: StateVector, n: int) -> None:
    if state.qubits != n:
        raise DimensionMismatchError(debug=f"state has {state.qubits} qubits, expected {n}")
