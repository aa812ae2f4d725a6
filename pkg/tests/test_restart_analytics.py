import math

import numpy as np
import pytest

from src.exceptions import DegenerateStrategyError, InputError, RegimeError
from src.restart_analytics import service
from src.restart_analytics.models import FrontierPoint, ProblemAngle


def series_moments(t: int, p: float, tol: float = 1e-14) -> tuple[float, float]:
    """Truncated geometric sums for E[k t] and E[(k t)^2]."""
    k_max = int(math.ceil(math.log(tol) / math.log1p(-p))) + 2 if p < 1 else 1
    k = np.arange(1, k_max + 1, dtype=np.float64)
    weights = p * (1 - p) ** (k - 1)
    return float(np.sum(k * t * weights)), float(np.sum((k * t) ** 2 * weights))


@pytest.fixture
def one_in_a_million() -> ProblemAngle:
    return ProblemAngle(fraction=1e-6)


def test_probability_without_iterations_is_the_fraction():
    angle = ProblemAngle(fraction=0.04)
    assert service.success_probability(0, angle) == pytest.approx(0.04, rel=1e-12)
    assert service.success_probability(0, ProblemAngle(fraction=1.0)) == 1.0


def test_probability_matches_closed_form():
    angle = ProblemAngle(fraction=0.04)
    expected = math.sin(7 * math.asin(0.2)) ** 2
    assert service.success_probability(3, angle) == pytest.approx(expected, abs=1e-12)


def test_negative_iterations_rejected():
    with pytest.raises(InputError):
        service.success_probability(-1, ProblemAngle(fraction=0.1))


def test_certainty_iterations_one_in_a_million(one_in_a_million):
    assert service.certainty_iterations(one_in_a_million) == 785
    assert service.success_probability(785, one_in_a_million) == pytest.approx(1.0, abs=1e-5)


def test_certainty_iterations_quarter_fraction():
    angle = ProblemAngle(fraction=0.25)
    assert service.certainty_iterations(angle) == 1
    assert service.success_probability(1, angle) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("fraction", [1e-4, 3e-3, 0.01, 0.2])
def test_certainty_iterations_agree_with_scan(fraction):
    angle = ProblemAngle(fraction=fraction)
    scan = range(1, 4 * int(1 / math.sqrt(fraction)) + 4)
    best = min(scan, key=lambda t: abs((2 * t + 1) * angle.theta - math.pi / 2))
    assert service.certainty_iterations(angle) == best


def test_certainty_iterations_outside_regime():
    with pytest.raises(RegimeError) as exc:
        service.certainty_iterations(ProblemAngle(fraction=0.6))
    assert exc.value.exit_code == 3


def test_fraction_must_be_positive():
    with pytest.raises(ValueError):
        ProblemAngle(fraction=0.0)


def test_expected_iterations_certain_trial():
    assert service.expected_iterations(1, ProblemAngle(fraction=0.25)) == pytest.approx(1.0)


def test_expected_iterations_match_series():
    angle = ProblemAngle(fraction=1e-2)
    p = service.success_probability(5, angle)
    mean, _ = series_moments(5, p)
    assert service.expected_iterations(5, angle) == pytest.approx(mean, rel=1e-9)


def test_expected_iterations_degenerate():
    angle = ProblemAngle(fraction=0.5)
    with pytest.raises(DegenerateStrategyError) as exc:
        service.expected_iterations(1, angle, floor=0.9)
    assert exc.value.exit_code == 4


def test_restart_beats_certainty(one_in_a_million):
    best = service.optimal_restart(one_in_a_million, 785)
    certainty_mean = service.expected_iterations(785, one_in_a_million)

    assert best.mean == pytest.approx(690, rel=0.01)
    assert best.mean / certainty_mean == pytest.approx(0.879, rel=0.005)
    assert best.p == pytest.approx(0.8446, abs=0.002)
    assert best.sharpe == pytest.approx(2.54, abs=0.02)


def test_restart_optimum_is_exhaustive_minimum():
    angle = ProblemAngle(fraction=1e-4)
    t_max = service.certainty_iterations(angle)
    best = service.optimal_restart(angle, t_max)
    means = [service.expected_iterations(t, angle) for t in range(1, t_max + 1)]
    assert best.mean == pytest.approx(min(means), rel=1e-12)
    assert best.t == 1 + int(np.argmin(means))


def test_restart_optimum_quarter_fraction():
    assert service.optimal_restart(ProblemAngle(fraction=0.25), 1).t == 1


def test_restart_optimum_requires_certainty_horizon(one_in_a_million):
    with pytest.raises(RegimeError):
        service.optimal_restart(one_in_a_million, 100)


@pytest.mark.parametrize("fraction", [1e-5, 1e-6, 1e-7])
def test_restart_ratio_in_small_angle_limit(fraction):
    angle = ProblemAngle(fraction=fraction)
    t_star = service.certainty_iterations(angle)
    summary = service.summarize(angle, t_star)
    assert summary.mean_ratio == pytest.approx(0.879, rel=0.005)
    assert summary.optimal_mean == pytest.approx(0.690 / math.sqrt(fraction), rel=0.01)


def test_restart_phase_root():
    z = service.restart_phase_root()
    assert z == pytest.approx(2.3311, abs=1e-4)
    assert math.tan(z / 2) == pytest.approx(z, rel=1e-8)


def test_discrete_optimum_near_continuous_phase(one_in_a_million):
    best = service.optimal_restart(one_in_a_million, 785)
    half_phase = (2 * best.t + 1) * one_in_a_million.theta
    assert abs(half_phase - service.restart_phase_root() / 2) <= 2 * one_in_a_million.theta
    assert service.continuous_optimal_mean(one_in_a_million) == pytest.approx(best.mean, rel=0.01)


def test_moments_match_series(rng):
    checked = 0
    while checked < 1000:
        angle = ProblemAngle(fraction=float(rng.uniform(1e-3, 0.5)))
        t = int(rng.integers(1, 61))
        p = service.success_probability(t, angle)
        if p < 0.05 or 1 - p < 1e-3:
            continue
        point = service.frontier_point(t, angle)
        mean, second = series_moments(t, p)

        assert point.mean == pytest.approx(mean, rel=1e-9)
        assert point.second_moment == pytest.approx(second, rel=1e-9)
        assert abs(point.second_moment - point.mean**2 - point.std**2) <= 1e-9 * point.second_moment
        checked += 1


def test_sharpe_identity():
    angle = ProblemAngle(fraction=0.5)
    point = service.frontier_point(1, angle)
    assert point.p == pytest.approx(0.5)
    assert service.sharpe(point) == pytest.approx(math.sqrt(2))
    assert point.sharpe == pytest.approx(1 / math.sqrt(1 - point.p))


def test_sharpe_infinite_when_certain(one_in_a_million):
    assert service.frontier_point(1, ProblemAngle(fraction=0.25)).sharpe == math.inf
    assert service.frontier_point(785, one_in_a_million).sharpe == math.inf


def test_frontier_single_point():
    points = service.frontier(ProblemAngle(fraction=0.25), 1)
    assert len(points) == 1
    assert points[0].efficient
    assert points[0].std == pytest.approx(0.0, abs=1e-7)


def test_frontier_one_in_a_million(one_in_a_million):
    points = service.frontier(one_in_a_million, 785)
    assert [pt.t for pt in points] == list(range(1, 786))

    certain = points[-1]
    assert certain.efficient
    assert certain.std < 1.0
    assert certain.std == min(pt.std for pt in points)

    cheapest = min(points, key=lambda pt: pt.mean)
    assert cheapest.efficient


def test_frontier_flags_match_brute_force():
    points = service.frontier(ProblemAngle(fraction=1e-3), 40)

    for pt in points:
        dominated = any(
            other.mean <= pt.mean
            and other.std <= pt.std
            and (other.mean < pt.mean or other.std < pt.std)
            for other in points
        )
        assert pt.efficient is not dominated


def test_inefficient_points_are_dominated_by_efficient_ones(one_in_a_million):
    points = service.frontier(one_in_a_million, 785)
    efficient = [pt for pt in points if pt.efficient]
    for pt in points:
        if pt.efficient:
            continue
        assert any(e.mean <= pt.mean and e.std <= pt.std for e in efficient)


def test_efficient_flags_ties_are_kept():
    assert service.efficient_flags([1.0, 1.0, 2.0], [1.0, 1.0, 0.5]) == [True, True, True]
    assert service.efficient_flags([1.0, 2.0], [1.0, 1.0]) == [True, False]


def test_frontier_skips_degenerate_points():
    # theta = pi/4: every p_t is 1/2, never below the floor
    assert len(service.frontier(ProblemAngle(fraction=0.5), 10)) == 10
    # fraction 1: p_t = sin^2((2t+1) pi/2) = 1 for all t
    assert len(service.frontier(ProblemAngle(fraction=1.0), 3)) == 3


def test_probability_curve_starts_at_fraction():
    curve = service.probability_curve(ProblemAngle(fraction=0.01), 20)
    assert [pt.t for pt in curve] == list(range(21))
    assert curve[0].p == pytest.approx(0.01)
    assert all(0.0 <= pt.p <= 1.0 for pt in curve)


def test_max_sharpe_prefers_certainty(one_in_a_million):
    points = service.frontier(one_in_a_million, 785)
    assert service.max_sharpe_point(points).t == 785


def test_preferred_strategy_trades_mean_for_risk(one_in_a_million):
    points = service.frontier(one_in_a_million, 785)
    best = service.optimal_restart(one_in_a_million, 785)

    assert service.preferred_strategy(points, 0.0).t == best.t
    assert service.preferred_strategy(points, 1e6).t == 785
    with pytest.raises(InputError):
        service.preferred_strategy(points, -1.0)


def test_overrun_probability():
    point = FrontierPoint(t=10, p=0.5, mean=20.0, second_moment=600.0, std=14.1, sharpe=1.41)
    assert service.overrun_probability(point, 0) == 1.0
    assert service.overrun_probability(point, 3) == pytest.approx(0.125)


def test_probability_is_periodic():
    # theta = pi/8: (2t+1) theta advances by pi every 4 iterations
    angle = ProblemAngle(fraction=math.sin(math.pi / 8) ** 2)
    for t in range(12):
        assert service.success_probability(t + 4, angle) == pytest.approx(
            service.success_probability(t, angle), abs=1e-12
        )


def test_expected_iterations_times_probability():
    angle = ProblemAngle(fraction=3e-3)
    for t in range(1, 30):
        assert service.expected_iterations(t, angle) * service.success_probability(t, angle) == pytest.approx(t)


def test_out_of_range_arguments_are_input_errors():
    angle = ProblemAngle(fraction=0.01)
    point = service.frontier_point(1, angle)
    calls = [
        lambda: service.expected_iterations(0, angle),
        lambda: service.frontier(angle, 0),
        lambda: service.optimal_restart(ProblemAngle(fraction=0.75), 0),
        lambda: service.max_sharpe_point([]),
        lambda: service.preferred_strategy([], 0.0),
        lambda: service.overrun_probability(point, -1),
    ]
    for call in calls:
        with pytest.raises(InputError) as exc:
            call()
        assert exc.value.exit_code == 3
