import math
from functools import cache
from typing import Sequence

import numpy as np
from loguru import logger
from scipy.optimize import bisect

from src.config import settings
from src.exceptions import DegenerateStrategyError, InputError, RegimeError
from src.restart_analytics.models import (
    FrontierPoint,
    FrontierSummary,
    ProbabilityPoint,
    ProblemAngle,
)


def success_probability(t: int, angle: ProblemAngle) -> float:
    """
    Probability of measuring a solution after `t` amplification iterations.

    Parameters:
        t (int): Number of iterations, t >= 0.
        angle (ProblemAngle): Angle with sin^2(theta) = S/N.

    Returns:
        float: sin^2((2t + 1) theta), clamped to [0, 1].
    """
    if t < 0:
        raise InputError(message=f"Iteration count must be non-negative, got {t}")
    p = math.sin((2 * t + 1) * angle.theta) ** 2
    return min(1.0, max(0.0, p))


def certainty_iterations(angle: ProblemAngle) -> int:
    """
    Iteration count that brings the state closest to the solution subspace.

    Parameters:
        angle (ProblemAngle): Problem angle in the small-solution regime.

    Returns:
        int: The positive t minimizing |(2t + 1) theta - pi/2|.

    Raises:
        RegimeError: If the solution fraction exceeds 1/2.
    """
    if angle.fraction > 0.5:
        raise RegimeError(
            message="Certainty iterations are only defined for S/N <= 1/2",
            debug=f"fraction={angle.fraction}",
        )

    estimate = math.pi / (4 * angle.theta) - 0.5
    candidates = {max(1, math.floor(estimate)), max(1, math.ceil(estimate))}
    return min(
        sorted(candidates),
        key=lambda t: abs((2 * t + 1) * angle.theta - math.pi / 2),
    )


def expected_iterations(
    t: int, angle: ProblemAngle, floor: float | None = None
) -> float:
    """
    Expected total iterations when measuring after every `t` iterations.

    Parameters:
        t (int): Iterations per trial, t >= 1.
        angle (ProblemAngle): Problem angle.
        floor (float | None): Probability floor, defaults to settings.PROBABILITY_FLOOR.

    Returns:
        float: t / p_t.

    Raises:
        DegenerateStrategyError: If p_t is below the floor.
    """
    if t < 1:
        raise InputError(message=f"Iterations per trial must be positive, got {t}")
    p = _checked_probability(t, angle, floor)
    return t / p


def sharpe_ratio(
    mean: float, std: float, p: float, tolerance: float | None = None
) -> float:
    tolerance = settings.CERTAINTY_TOLERANCE if tolerance is None else tolerance
    if std == 0.0 or 1.0 - p <= tolerance:
        return math.inf
    return mean / std


def frontier_point(
    t: int, angle: ProblemAngle, floor: float | None = None
) -> FrontierPoint:
    """
    Mean, second moment, deviation and Sharpe ratio of the restart strategy `t`.

    The second moment t^2 (2 - 3p + p^2) / ((1 - p) p^2) is evaluated in its
    factored form t^2 (2 - p) / p^2, which stays finite at p = 1.
    """
    p = _checked_probability(t, angle, floor)
    mean = t / p
    second_moment = t * t * (2.0 - p) / (p * p)
    std = mean * math.sqrt(1.0 - p)
    return FrontierPoint(
        t=t,
        p=p,
        mean=mean,
        second_moment=second_moment,
        std=std,
        sharpe=sharpe_ratio(mean, std, p),
    )


def sharpe(point: FrontierPoint) -> float:
    """
    Return-to-risk ratio mean / std of a restart strategy.

    Returns:
        float: math.inf when the trial is (numerically) certain to succeed,
        otherwise 1 / sqrt(1 - p).
    """
    return sharpe_ratio(point.mean, point.std, point.p)


def optimal_restart(
    angle: ProblemAngle, t_max: int, floor: float | None = None
) -> FrontierPoint:
    """
    Restart strategy with the smallest expected number of iterations.

    Parameters:
        angle (ProblemAngle): Problem angle.
        t_max (int): Largest iteration count considered; must reach the certainty point.
        floor (float | None): Probability floor.

    Returns:
        FrontierPoint: Minimal-mean point over t in [1, t_max]; smallest t on ties.

    Raises:
        RegimeError: If t_max is below certainty_iterations(angle).
        DegenerateStrategyError: If every candidate has p_t below the floor.
    """
    if angle.fraction <= 0.5:
        t_star = certainty_iterations(angle)
        if t_max < t_star:
            raise RegimeError(
                message="t_max must reach the certainty iteration count",
                debug=f"t_max={t_max}, certainty={t_star}",
            )
    return _best_point(angle, t_max, floor)


def frontier(
    angle: ProblemAngle, t_max: int, floor: float | None = None
) -> list[FrontierPoint]:
    """
    Every restart strategy t in [1, t_max] with its efficient-frontier flag.

    A point is efficient when no other point has mean <= and std <= with at
    least one strict inequality. Points whose success probability is below the
    floor have no finite moments and are left out.

    Returns:
        list[FrontierPoint]: Points ordered by t.
    """
    if t_max < 1:
        raise InputError(message=f"t_max must be positive, got {t_max}")

    floor = settings.PROBABILITY_FLOOR if floor is None else floor
    points = []
    for t in range(1, t_max + 1):
        if success_probability(t, angle) < floor:
            logger.debug(f"Skipping degenerate restart point t={t}")
            continue
        points.append(frontier_point(t, angle, floor))

    flags = efficient_flags([pt.mean for pt in points], [pt.std for pt in points])
    return [pt.model_copy(update={"efficient": flag}) for pt, flag in zip(points, flags)]


def efficient_flags(means: Sequence[float], stds: Sequence[float]) -> list[bool]:
    """
    Pareto flags for minimizing both coordinates.

    Sorting by (mean, std) puts every potential dominator of a point strictly
    before it; a point is dominated exactly when one of those has std <= its std.
    """
    order = np.lexsort((np.asarray(stds), np.asarray(means)))
    flags = [False] * len(order)
    best_std = math.inf
    i = 0
    while i < len(order):
        # Identical (mean, std) pairs never dominate each other.
        j = i
        key = (means[order[i]], stds[order[i]])
        while j < len(order) and (means[order[j]], stds[order[j]]) == key:
            j += 1
        dominated = best_std <= key[1]
        for k in order[i:j]:
            flags[k] = not dominated
        best_std = min(best_std, key[1])
        i = j
    return flags


def probability_curve(angle: ProblemAngle, t_max: int) -> list[ProbabilityPoint]:
    return [
        ProbabilityPoint(t=t, p=success_probability(t, angle))
        for t in range(0, t_max + 1)
    ]


@cache
def restart_phase_root() -> float:
    """Root z of tan(z/2) = z on (1.6, 3.1), the continuous-limit optimal phase."""
    return float(bisect(lambda z: math.tan(z / 2) - z, 1.6, 3.1, xtol=1e-10))


def continuous_optimal_mean(angle: ProblemAngle) -> float:
    """Small-angle optimal expected waiting time z / (4 theta sin^2(z/2))."""
    z = restart_phase_root()
    return z / (4 * angle.theta * math.sin(z / 2) ** 2)


def max_sharpe_point(points: Sequence[FrontierPoint]) -> FrontierPoint:
    if not points:
        raise InputError(message="No frontier points given")
    return max(points, key=lambda pt: (pt.sharpe, -pt.t))


def preferred_strategy(
    points: Sequence[FrontierPoint], risk_aversion: float
) -> FrontierPoint:
    """
    Efficient point minimizing mean + risk_aversion * std.

    risk_aversion = 0 selects the mean optimum; large values select the
    lowest-deviation strategy, as wanted for real-time use.
    """
    if risk_aversion < 0:
        raise InputError(message=f"risk_aversion must be non-negative, got {risk_aversion}")
    candidates = [pt for pt in points if pt.efficient] or list(points)
    if not candidates:
        raise InputError(message="No frontier points given")
    return min(candidates, key=lambda pt: (pt.mean + risk_aversion * pt.std, pt.t))


def overrun_probability(point: FrontierPoint, trials: int) -> float:
    """Probability that more than `trials` trials (trials * t iterations) are needed."""
    if trials < 0:
        raise InputError(message=f"trials must be non-negative, got {trials}")
    return (1.0 - point.p) ** trials


def summarize(angle: ProblemAngle, t_max: int) -> FrontierSummary:
    """
    Certainty strategy, best restart strategy within t_max and their mean ratio.

    Raises:
        DegenerateStrategyError: If no t in [1, t_max] has a usable success probability.
    """
    best = _best_point(angle, t_max, None)

    certainty_t = certainty_mean = mean_ratio = continuous_mean = None
    if angle.fraction <= 0.5:
        certainty_t = certainty_iterations(angle)
        certainty_mean = expected_iterations(certainty_t, angle)
        mean_ratio = best.mean / certainty_mean
        continuous_mean = continuous_optimal_mean(angle)

    return FrontierSummary(
        fraction=angle.fraction,
        certainty_t=certainty_t,
        certainty_mean=certainty_mean,
        optimal_t=best.t,
        optimal_mean=best.mean,
        optimal_p=best.p,
        optimal_sharpe=best.sharpe,
        mean_ratio=mean_ratio,
        continuous_mean=continuous_mean,
    )


def _checked_probability(t: int, angle: ProblemAngle, floor: float | None) -> float:
    floor = settings.PROBABILITY_FLOOR if floor is None else floor
    p = success_probability(t, angle)
    if p < floor:
        raise DegenerateStrategyError(
            debug=f"t={t}, p={p!r}, floor={floor!r}",
        )
    return p


def _best_point(
    angle: ProblemAngle, t_max: int, floor: float | None
) -> FrontierPoint:
    if t_max < 1:
        raise InputError(message=f"t_max must be positive, got {t_max}")

    floor = settings.PROBABILITY_FLOOR if floor is None else floor
    ts = np.arange(1, t_max + 1, dtype=np.float64)
    ps = np.clip(np.sin((2 * ts + 1) * angle.theta) ** 2, 0.0, 1.0)
    valid = ps >= floor
    if not valid.any():
        raise DegenerateStrategyError(debug=f"All p_t below {floor!r} for t <= {t_max}")

    means = np.full_like(ts, np.inf)
    means[valid] = ts[valid] / ps[valid]
    best_t = int(ts[int(np.argmin(means))])
    logger.debug(f"Optimal restart t={best_t} for fraction={angle.fraction}")
    return frontier_point(best_t, angle, floor)
