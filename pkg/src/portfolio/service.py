import math
from typing import Iterator, Sequence

import numpy as np
from loguru import logger

from src.config import settings
from src.exceptions import (
    DegenerateStrategyError,
    EquivalenceViolation,
    InfeasibleError,
    InputError,
    InvalidWeightsError,
    UnsolvableInstanceError,
)
from src.portfolio.models import (
    ChoiceSample,
    EquivalenceReport,
    InstanceStatsRecord,
    ScalingFit,
    ScalingPoint,
    Strategy,
    StrategyStats,
    SuccessDistribution,
)
from src.qsim import service as qsim_service
from src.qsim.models import PhaseChoice, StateVector
from src.sat_core import service as sat_service
from src.sat_core.models import SatInstance
from src.utils.parallel import ordered_map
from src.utils.seeding import make_rng


def success_distribution(
    instance: SatInstance,
    choices: Sequence[PhaseChoice],
    solutions: frozenset[int] | None = None,
    choice_ids: Sequence[str] | None = None,
) -> SuccessDistribution:
    """
    Success probability of one trial for each phase choice.

    Parameters:
        instance (SatInstance): Solvable formula.
        choices (Sequence[PhaseChoice]): Choices to evaluate.
        solutions (frozenset[int] | None): Known solutions; enumerated when omitted.
        choice_ids (Sequence[str] | None): Sample ids, "choice-0000"... by default.

    Returns:
        SuccessDistribution: One sample per choice, uniform weights.

    Raises:
        UnsolvableInstanceError: If the instance has no solution.
    """
    solutions = _require_solutions(instance, solutions)
    if choice_ids is None:
        choice_ids = [f"choice-{k:04d}" for k in range(len(choices))]
    if len(choice_ids) != len(choices):
        raise InputError(message="One id per choice is required")

    def evaluate(choice: PhaseChoice) -> float:
        state = qsim_service.heuristic_trial(instance, choice)
        return qsim_service.success_probability(state, solutions)

    probabilities = ordered_map(evaluate, choices)
    return SuccessDistribution(
        samples=tuple(
            ChoiceSample(choice_id=cid, p=p, steps=choice.resolved_steps(instance.n))
            for cid, p, choice in zip(choice_ids, probabilities, choices)
        )
    )


def single_choice_stats(
    dist: SuccessDistribution, floor: float | None = None
) -> StrategyStats:
    """
    Measurements to success when one choice is drawn once and kept for every trial.

    Mean is <1/p>; variance is <(1-p)/p^2> + (<1/p^2> - <1/p>^2). Samples below
    the floor make the mean diverge: they are dropped, the remaining weights
    renormalized, and the result flagged divergent.

    Parameters:
        dist (SuccessDistribution): Per-choice success probabilities.
        floor (float | None): Divergence floor, defaults to settings.DIVERGENCE_FLOOR.

    Returns:
        StrategyStats: Statistics, conditional on p >= floor when divergent.
    """
    floor = settings.DIVERGENCE_FLOOR if floor is None else floor
    kept = [
        (w, s.p, s.steps)
        for w, s in zip(dist.resolved_weights, dist.samples)
        if s.p >= floor
    ]
    divergent = len(kept) < len(dist.samples)
    if divergent:
        logger.warning(
            f"{len(dist.samples) - len(kept)} of {len(dist.samples)} choices have p < {floor}"
        )
    if not kept:
        return StrategyStats(
            mean=math.inf, variance=math.inf, std=math.inf, divergent=True
        )

    total = math.fsum(w for w, _, _ in kept)
    mean = math.fsum(w / p for w, p, _ in kept) / total
    inverse_square = math.fsum(w / p**2 for w, p, _ in kept) / total
    within = math.fsum(w * (1 - p) / p**2 for w, p, _ in kept) / total
    variance = max(0.0, within + inverse_square - mean**2)
    return StrategyStats(
        mean=mean,
        variance=variance,
        std=math.sqrt(variance),
        divergent=divergent,
        mean_iterations=math.fsum(w * steps / p for w, p, steps in kept) / total,
    )


def mixed_strategy_stats(dist: SuccessDistribution) -> StrategyStats:
    """
    Measurements to success when a fresh choice is drawn for every trial.

    Each trial then succeeds with probability <p>, so the count is geometric
    with mean 1/<p> and deviation sqrt(1 - <p>)/<p>.

    Raises:
        DegenerateStrategyError: If <p> = 0.
    """
    weights = dist.resolved_weights
    mean_p = math.fsum(w * s.p for w, s in zip(weights, dist.samples))
    if mean_p <= 0:
        raise DegenerateStrategyError(message="Every choice has zero success probability")

    mean_steps = math.fsum(w * s.steps for w, s in zip(weights, dist.samples))
    variance = (1 - mean_p) / mean_p**2
    return StrategyStats(
        mean=1 / mean_p,
        variance=variance,
        std=math.sqrt(variance),
        mean_iterations=mean_steps / mean_p,
    )


def mixed_not_worse(single: StrategyStats, mixed: StrategyStats) -> bool:
    """
    Whether redrawing a choice every trial needs no more measurements than committing to one.

    Divergent single-choice statistics are conditional on p >= floor; the
    unconditional single-choice mean is then unbounded, so mixing always wins.
    """
    if single.divergent:
        return True
    # equal distributions may differ in the last bit
    return mixed.mean <= single.mean * (1 + 1e-12)


def jensen_gap(dist: SuccessDistribution) -> float:
    """
    <1/p> - 1/<p>, non-negative and zero only for a constant distribution.

    Raises:
        DegenerateStrategyError: If any sample has p = 0.
    """
    if any(s.p <= 0 for s in dist.samples):
        raise DegenerateStrategyError(message="Jensen gap needs strictly positive samples")
    weights = dist.resolved_weights
    inverse_mean = math.fsum(w / s.p for w, s in zip(weights, dist.samples))
    mean_p = math.fsum(w * s.p for w, s in zip(weights, dist.samples))
    return inverse_mean - 1 / mean_p


def sample_measurement_counts(
    dist: SuccessDistribution, strategy: Strategy, rounds: int, seed: int
) -> np.ndarray:
    """
    Monte Carlo draws of the number of measurements until success.

    "single" draws a choice once per run and keeps it; "mixed" draws a new
    choice for every trial, which makes each trial succeed with <p>.
    """
    rng = make_rng(seed)
    weights = np.asarray(dist.resolved_weights)
    probabilities = np.asarray(dist.probabilities)

    if strategy == "single":
        picks = rng.choice(len(probabilities), size=rounds, p=weights)
        chosen = probabilities[picks]
        if (chosen <= 0).any():
            raise DegenerateStrategyError(message="A drawn choice never succeeds")
        return rng.geometric(chosen)

    mean_p = float(weights @ probabilities)
    if mean_p <= 0:
        raise DegenerateStrategyError(message="Every choice has zero success probability")
    return rng.geometric(mean_p, size=rounds)


def instance_summary(
    instance_id: str, dist: SuccessDistribution, solution_count: int
) -> InstanceStatsRecord:
    single = single_choice_stats(dist)
    mixed = mixed_strategy_stats(dist)
    gap = None if single.divergent else jensen_gap(dist)
    return InstanceStatsRecord(
        instance_id=instance_id,
        solution_count=solution_count,
        single_mean=single.mean,
        single_std=single.std,
        single_divergent=single.divergent,
        single_mean_iterations=single.mean_iterations,
        mixed_mean=mixed.mean,
        mixed_std=mixed.std,
        mixed_mean_iterations=mixed.mean_iterations,
        jensen_gap=gap,
    )


def pad_portfolio(
    choices: Sequence[PhaseChoice],
    weights: Sequence[complex] | None = None,
    pad: bool = True,
) -> tuple[list[PhaseChoice], np.ndarray, int]:
    """
    Fill the selector register up to a power of two.

    Unused slots hold the identity choice at zero weight.

    Returns:
        tuple: (choices, amplitude weights, selector width s).

    Raises:
        InvalidWeightsError: If the weights are not a unit vector.
        InputError: If padding is refused and the count is not a power of two.
    """
    if not choices:
        raise InputError(message="A portfolio needs at least one choice")
    k = len(choices)
    if weights is None:
        amplitudes = np.full(k, k**-0.5, dtype=np.complex128)
    else:
        amplitudes = np.asarray(weights, dtype=np.complex128)
        if amplitudes.shape != (k,):
            raise InvalidWeightsError(message="One weight per choice is required")
    norm_sq = float(np.sum(np.abs(amplitudes) ** 2))
    if abs(norm_sq - 1.0) > 1e-10:
        raise InvalidWeightsError(debug=f"sum |w|^2 = {norm_sq!r}")

    s = (k - 1).bit_length()
    slots = 1 << s
    if slots != k and not pad:
        raise InputError(message=f"{k} choices do not fill a selector register")

    rho_terms, tau_terms = len(choices[0].rho), len(choices[0].tau)
    padded = list(choices) + [PhaseChoice.identity(rho_terms, tau_terms)] * (slots - k)
    amplitudes = np.concatenate([amplitudes, np.zeros(slots - k, dtype=np.complex128)])
    return padded, amplitudes, s


def selector_unitary(weights: np.ndarray) -> np.ndarray:
    """
    Unitary V with V|0> = weights, built from a complex Householder reflection.
    """
    size = weights.shape[0]
    phase = np.exp(1j * np.angle(weights[0])) if weights[0] != 0 else 1.0
    target = weights / phase
    u = np.zeros(size, dtype=np.complex128)
    u[0] = 1.0
    u -= target
    norm_sq = float(np.vdot(u, u).real)
    reflection = np.eye(size, dtype=np.complex128)
    if norm_sq > 1e-30:
        reflection -= 2.0 * np.outer(u, u.conj()) / norm_sq
    return phase * reflection


def prepare_portfolio(
    rows: np.ndarray,
    instance: SatInstance,
    choices: Sequence[PhaseChoice],
    selector: np.ndarray,
) -> np.ndarray:
    """
    Operator A on a (2^s, 2^n) joint array: selector preparation, Hadamard on
    the assignment register, then each selector row's trial.
    """
    rows = qsim_service.walsh_hadamard(selector @ rows)
    return np.stack(
        [qsim_service.apply_trial(row, instance, c) for row, c in zip(rows, choices)]
    )


def unprepare_portfolio(
    rows: np.ndarray,
    instance: SatInstance,
    choices: Sequence[PhaseChoice],
    selector: np.ndarray,
) -> np.ndarray:
    """Operator A^-1: the steps of prepare_portfolio undone in reverse order."""
    rows = np.stack(
        [
            qsim_service.apply_trial(row, instance, c, inverse=True)
            for row, c in zip(rows, choices)
        ]
    )
    return selector.conj().T @ qsim_service.walsh_hadamard(rows)


def portfolio_state(
    instance: SatInstance,
    choices: Sequence[PhaseChoice],
    weights: Sequence[complex] | None = None,
) -> StateVector:
    """
    Superposition of all choices' trial outputs, tagged by selector qubits.

    The result is sum_k w_k sum_i c_i^(k) |i, k>, stored with the selector as
    the high bits of the basis index.

    Parameters:
        instance (SatInstance): Formula to search.
        choices (Sequence[PhaseChoice]): Portfolio members.
        weights (Sequence[complex] | None): Amplitude weights; uniform 1/sqrt(K) by default.

    Returns:
        StateVector: State over n + s qubits.
    """
    padded, amplitudes, s = pad_portfolio(choices, weights)
    qsim_service.check_qubits(instance.n + s)

    rows = np.zeros((1 << s, instance.size), dtype=np.complex128)
    rows[0, 0] = 1.0
    rows = prepare_portfolio(rows, instance, padded, selector_unitary(amplitudes))
    return StateVector(amplitudes=rows.reshape(-1), qubits=instance.n + s)


def equivalence_check(
    instance: SatInstance,
    choices: Sequence[PhaseChoice],
    weights: Sequence[complex] | None = None,
    solutions: frozenset[int] | None = None,
    tolerance: float | None = None,
) -> EquivalenceReport:
    """
    Compare the quantum portfolio's success probability with sum_k |w_k|^2 p_k.

    Raises:
        EquivalenceViolation: If they differ by more than the tolerance.
    """
    tolerance = settings.EQUIVALENCE_TOLERANCE if tolerance is None else tolerance
    solutions = _require_solutions(instance, solutions)
    padded, amplitudes, s = pad_portfolio(choices, weights)

    state = portfolio_state(instance, choices, weights)
    quantum = qsim_service.success_probability(state, solutions, selector_qubits=s)

    per_choice = [
        qsim_service.success_probability(
            qsim_service.heuristic_trial(instance, c), solutions
        )
        for c in choices
    ]
    weighted = math.fsum(
        abs(w) ** 2 * p for w, p in zip(amplitudes[: len(choices)], per_choice)
    )
    difference = abs(quantum - weighted)
    if difference > tolerance:
        raise EquivalenceViolation(debug=f"|{quantum!r} - {weighted!r}| > {tolerance}")

    return EquivalenceReport(
        quantum_probability=quantum,
        weighted_probability=weighted,
        difference=difference,
        choice_probabilities=per_choice,
    )


def amplified_closed_form(portfolio_probability: float, a: int) -> float:
    theta = math.asin(math.sqrt(portfolio_probability))
    return math.sin((2 * a + 1) * theta) ** 2


def amplified_portfolio(
    instance: SatInstance,
    choices: Sequence[PhaseChoice],
    weights: Sequence[complex] | None = None,
    a: int = 0,
    solutions: frozenset[int] | None = None,
) -> float:
    """
    Success probability after `a` rounds of amplitude amplification on the portfolio.

    The portfolio preparation plays the role of the initial operator A; one
    round is Q = -A S_0 A^-1 S_sol.

    Parameters:
        instance (SatInstance): Formula to search.
        choices (Sequence[PhaseChoice]): Portfolio members.
        weights (Sequence[complex] | None): Amplitude weights.
        a (int): Amplification rounds, a >= 0.
        solutions (frozenset[int] | None): Known solutions.

    Returns:
        float: Probability of measuring a solution.

    Raises:
        DegenerateStrategyError: If the portfolio never succeeds.
    """
    if a < 0:
        raise InputError(message=f"Round count must be non-negative, got {a}")
    probability = 0.0
    for round_index, probability in enumerate(
        _amplification_rounds(instance, choices, weights, solutions)
    ):
        if round_index == a:
            break
    return probability


def rounds_to_threshold(
    instance: SatInstance,
    choices: Sequence[PhaseChoice],
    weights: Sequence[complex] | None = None,
    threshold: float = 0.5,
    max_rounds: int | None = None,
    solutions: frozenset[int] | None = None,
) -> tuple[int, float]:
    """
    Fewest amplification rounds reaching success probability >= threshold.

    Returns:
        tuple[int, float]: (rounds, portfolio probability p-bar).

    Raises:
        InfeasibleError: If the threshold is not reached within max_rounds.
    """
    rounds = _amplification_rounds(instance, choices, weights, solutions)
    portfolio_p = next(rounds)
    if max_rounds is None:
        max_rounds = math.ceil(math.pi / (4 * math.asin(math.sqrt(portfolio_p)))) + 1

    probability = portfolio_p
    for a in range(max_rounds + 1):
        if probability >= threshold:
            return a, portfolio_p
        probability = next(rounds)
    raise InfeasibleError(
        message=f"Success probability {threshold} not reached in {max_rounds} rounds"
    )


def amplification_scaling(
    cases: Sequence[tuple[SatInstance, Sequence[PhaseChoice], Sequence[complex] | None]],
    threshold: float = 0.5,
) -> ScalingFit:
    """
    Log-log fit of rounds-to-threshold against the portfolio probability p-bar.

    A slope near -1/2 shows the 1/sqrt(p-bar) scaling of amplified portfolios.
    Cases already above the threshold (zero rounds) are skipped.
    """
    points = []
    for instance, choices, weights in cases:
        rounds, portfolio_p = rounds_to_threshold(instance, choices, weights, threshold)
        if rounds == 0:
            logger.warning(f"Skipping case with p-bar={portfolio_p:.4g} above threshold")
            continue
        points.append(ScalingPoint(probability=portfolio_p, rounds=rounds))

    if len(points) < 2:
        raise InfeasibleError(message="Scaling fit needs at least two usable cases")

    x = np.log([pt.probability for pt in points])
    y = np.log([pt.rounds for pt in points])
    slope, intercept = np.polyfit(x, y, 1)
    return ScalingFit(slope=float(slope), intercept=float(intercept), points=points)


def _amplification_rounds(
    instance: SatInstance,
    choices: Sequence[PhaseChoice],
    weights: Sequence[complex] | None,
    solutions: frozenset[int] | None,
) -> Iterator[float]:
    """Yield the success probability after 0, 1, 2, ... rounds."""
    solutions = _require_solutions(instance, solutions)
    padded, amplitudes, s = pad_portfolio(choices, weights)
    qsim_service.check_qubits(instance.n + s)
    selector = selector_unitary(amplitudes)
    marked = np.zeros(instance.size, dtype=bool)
    marked[list(solutions)] = True

    rows = np.zeros((1 << s, instance.size), dtype=np.complex128)
    rows[0, 0] = 1.0
    rows = prepare_portfolio(rows, instance, padded, selector)

    def probability() -> float:
        return float(min(1.0, np.sum(np.abs(rows[:, marked]) ** 2)))

    portfolio_p = probability()
    if portfolio_p <= 0:
        raise DegenerateStrategyError(message="Portfolio success probability is zero")
    yield portfolio_p

    while True:
        rows[:, marked] *= -1
        rows = unprepare_portfolio(rows, instance, padded, selector)
        rows[0, 0] *= -1
        rows = -prepare_portfolio(rows, instance, padded, selector)
        yield probability()


def _require_solutions(
    instance: SatInstance, solutions: frozenset[int] | None
) -> frozenset[int]:
    if solutions is None:
        solutions = sat_service.solutions_bruteforce(instance)
    if not solutions:
        raise UnsolvableInstanceError()
    return solutions
