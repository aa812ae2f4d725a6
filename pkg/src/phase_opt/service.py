import hashlib
import json
from typing import Sequence

import numpy as np
from loguru import logger

from src.exceptions import InputError
from src.phase_opt.models import (
    ChoiceStats,
    ComparisonReport,
    EvaluationAggregate,
    EvaluationReport,
    InstanceEvaluation,
    PortfolioComparison,
    PortfolioSet,
    TrainingConfig,
)
from src.portfolio import service as portfolio_service
from src.qsim import service as qsim_service
from src.qsim.models import ChoiceProvenance, PhaseChoice
from src.sat_core import service as sat_service
from src.sat_core.models import LabeledInstance
from src.utils.parallel import ordered_map
from src.utils.seeding import Stream, derive_seed, make_rng


def random_choice(
    rng: np.random.Generator,
    rho_terms: int = 3,
    tau_terms: int = 3,
    steps: int | None = None,
) -> PhaseChoice:
    """Phase choice with every coefficient uniform in [-1, 1]."""
    return PhaseChoice(
        rho=tuple(float(c) for c in rng.uniform(-1.0, 1.0, size=rho_terms)),
        tau=tuple(float(c) for c in rng.uniform(-1.0, 1.0, size=tau_terms)),
        steps=steps,
    )


def random_choices(
    count: int, seed: int, steps: int | None = None, rho_terms: int = 3, tau_terms: int = 3
) -> list[PhaseChoice]:
    rng = make_rng(derive_seed(seed, Stream.RANDOM_CHOICES, 0))
    return [random_choice(rng, rho_terms, tau_terms, steps) for _ in range(count)]


def objective(choice: PhaseChoice, instances: Sequence[LabeledInstance]) -> float:
    """
    Mean single-trial success probability of `choice` over solvable instances.

    Raises:
        InputError: If no instances are given.
    """
    if not instances:
        raise InputError(message="Objective needs at least one training instance")

    def evaluate(item: LabeledInstance) -> float:
        state = qsim_service.heuristic_trial(item.instance, choice)
        return qsim_service.success_probability(state, item.solutions)

    values = ordered_map(evaluate, instances)
    return float(np.mean(values))


def training_instances(config: TrainingConfig) -> list[LabeledInstance]:
    instances, _ = sat_service.solvable_instances(
        config.train_n, config.train_count, config.ratio, config.seed, Stream.TRAINING
    )
    return instances


def optimize(
    config: TrainingConfig,
    initial: PhaseChoice,
    instances: Sequence[LabeledInstance] | None = None,
    restart: int = 0,
) -> PhaseChoice:
    """
    Coordinate pattern search on the phase polynomial coefficients.

    Every sweep tries +step and -step on each coefficient, moves to the best
    improvement, and halves the step when nothing improves. Stops once
    `config.budget` objective evaluations are spent or the step falls below
    `config.min_step`. The trial length is never changed.

    Parameters:
        config (TrainingConfig): Budget, step sizes and training set definition.
        initial (PhaseChoice): Starting point.
        instances (Sequence[LabeledInstance] | None): Training set; generated from config when omitted.
        restart (int): Restart index recorded in the provenance.

    Returns:
        PhaseChoice: Best choice found, with provenance. Its objective is never below the initial one.
    """
    if instances is None:
        instances = training_instances(config)

    x = initial.coefficients()
    best = objective(initial, instances)
    evaluations = 1
    step = config.initial_step

    while evaluations < config.budget and step >= config.min_step:
        candidate_best, candidate_x = best, None
        for i in range(x.size):
            for sign in (1.0, -1.0):
                if evaluations >= config.budget:
                    break
                trial_x = x.copy()
                trial_x[i] += sign * step
                value = objective(initial.with_coefficients(trial_x), instances)
                evaluations += 1
                if value > candidate_best:
                    candidate_best, candidate_x = value, trial_x

        if candidate_x is None:
            step /= 2
        else:
            x, best = candidate_x, candidate_best

    logger.info(
        f"Restart {restart}: objective {best:.6f} after {evaluations} evaluations"
    )
    return initial.with_coefficients(x).model_copy(
        update={
            "provenance": ChoiceProvenance(
                train_n=config.train_n,
                seed=config.seed,
                restart=restart,
                objective=best,
            )
        }
    )


def build_portfolio(config: TrainingConfig) -> PortfolioSet:
    """
    Optimize from `config.restarts` random starting points and keep the distinct optima.

    Optima whose coefficients all agree within 1e-6 are kept once (the first).
    """
    instances = training_instances(config)
    logger.info(
        f"Training on {len(instances)} instances with n={config.train_n}, "
        f"{config.restarts} restarts"
    )

    def run(restart: int) -> PhaseChoice:
        rng = make_rng(derive_seed(config.seed, Stream.INITIAL_CHOICES, restart))
        initial = random_choice(rng, config.rho_terms, config.tau_terms, config.steps)
        return optimize(config, initial, instances, restart)

    optima = ordered_map(run, range(config.restarts))

    distinct: list[PhaseChoice] = []
    for choice in optima:
        if not any(
            np.max(np.abs(choice.coefficients() - kept.coefficients())) <= 1e-6
            for kept in distinct
        ):
            distinct.append(choice)

    logger.info(f"Portfolio holds {len(distinct)} distinct choices")
    return PortfolioSet(choices=distinct, config=config)


def portfolio_id(portfolio: PortfolioSet) -> str:
    canonical = json.dumps(
        [[list(c.rho), list(c.tau), c.steps] for c in portfolio.choices],
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def evaluate_instance(
    portfolio: PortfolioSet, item: LabeledInstance
) -> InstanceEvaluation:
    dist = portfolio_service.success_distribution(
        item.instance, portfolio.choices, item.solutions
    )
    single = portfolio_service.single_choice_stats(dist)
    mixed = portfolio_service.mixed_strategy_stats(dist)
    gap = None if single.divergent else portfolio_service.jensen_gap(dist)

    choice_stats = [
        ChoiceStats(
            choice_id=s.choice_id,
            p=s.p,
            mean=1 / s.p if s.p > 0 else None,
            std=(1 - s.p) ** 0.5 / s.p if s.p > 0 else None,
        )
        for s in dist.samples
    ]
    return InstanceEvaluation(
        instance_id=item.instance_id,
        seed=item.seed,
        solution_count=len(item.solutions),
        samples=list(dist.samples),
        choice_stats=choice_stats,
        single=single,
        mixed=mixed,
        jensen_gap=gap,
        mixed_not_worse=portfolio_service.mixed_not_worse(single, mixed),
    )


def evaluate_portfolio(
    portfolio: PortfolioSet,
    instances: Sequence[LabeledInstance],
    excluded: int,
    test_n: int,
    ratio: float,
) -> EvaluationReport:
    records = [evaluate_instance(portfolio, item) for item in instances]
    gaps = [r.jensen_gap for r in records if r.jensen_gap is not None]
    aggregate = EvaluationAggregate(
        test_n=test_n,
        ratio=ratio,
        portfolio_id=portfolio_id(portfolio),
        instance_count=len(records),
        median_single_mean=float(np.median([r.single.mean for r in records])),
        median_mixed_mean=float(np.median([r.mixed.mean for r in records])),
        median_jensen_gap=float(np.median(gaps)) if gaps else None,
        median_single_iterations=_median_or_none(
            [r.single.mean_iterations for r in records]
        ),
        median_mixed_iterations=_median_or_none([r.mixed.mean_iterations for r in records]),
        excluded_unsat_count=excluded,
    )
    return EvaluationReport(records=records, aggregate=aggregate)


def cross_size_eval(
    portfolio: PortfolioSet,
    test_n: int,
    test_count: int,
    seed: int,
    ratio: float = 4.25,
) -> EvaluationReport:
    """
    Evaluate a portfolio on fresh solvable instances of a (usually larger) size.

    Test instances come from the EVALUATION seed stream, disjoint from the
    training stream. Per instance the report holds the success distribution,
    single-choice statistics per choice, single and mixed strategy statistics
    and the Jensen gap; the aggregate block holds medians across instances.

    Raises:
        InfeasibleError: If not enough satisfiable test instances are found.
    """
    instances, excluded = sat_service.solvable_instances(
        test_n, test_count, ratio, seed, Stream.EVALUATION
    )
    logger.info(f"Evaluating portfolio on {len(instances)} instances with n={test_n}")
    return evaluate_portfolio(portfolio, instances, excluded, test_n, ratio)


def compare_portfolios(
    portfolios: dict[str, PortfolioSet],
    test_n: int,
    test_count: int,
    seed: int,
    ratio: float = 4.25,
) -> ComparisonReport:
    """
    Evaluate several portfolios on one shared test set and report which has
    the smallest median mixed-strategy mean. The ordering is reported, not enforced.
    """
    if not portfolios:
        raise InputError(message="No portfolios to compare")
    instances, excluded = sat_service.solvable_instances(
        test_n, test_count, ratio, seed, Stream.EVALUATION
    )
    reports = {
        label: evaluate_portfolio(portfolio, instances, excluded, test_n, ratio)
        for label, portfolio in portfolios.items()
    }
    mixed = {label: r.aggregate.median_mixed_mean for label, r in reports.items()}
    single = {label: r.aggregate.median_single_mean for label, r in reports.items()}
    best = min(mixed, key=lambda label: (mixed[label], label))
    logger.info(f"Smallest median mixed mean: {best} ({mixed[best]:.4g})")
    return ComparisonReport(
        reports=reports,
        comparison=PortfolioComparison(
            median_mixed_means=mixed, median_single_means=single, best=best
        ),
    )


def _median_or_none(values: list[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.median(present)) if present else None
