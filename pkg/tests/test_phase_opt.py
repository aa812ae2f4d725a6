import numpy as np
import pytest

from src.artifacts import dump_document
from src.exceptions import InputError
from src.phase_opt import service
from src.phase_opt.models import PortfolioSet, TrainingConfig
from src.qsim import service as qsim_service
from src.qsim.models import ChoiceProvenance, PhaseChoice
from src.sat_core import service as sat_service
from src.utils.seeding import make_rng


@pytest.fixture
def small_config() -> TrainingConfig:
    return TrainingConfig(train_n=6, train_count=4, restarts=3, budget=40, seed=7)


@pytest.fixture
def small_instances(small_config):
    return service.training_instances(small_config)


def test_random_choice_ranges():
    choice = service.random_choice(make_rng(1), rho_terms=4, tau_terms=2, steps=5)
    assert len(choice.rho) == 4 and len(choice.tau) == 2
    assert choice.steps == 5
    assert all(-1.0 <= c <= 1.0 for c in choice.rho + choice.tau)


def test_random_choices_are_seeded():
    assert service.random_choices(5, 3) == service.random_choices(5, 3)
    assert service.random_choices(5, 3) != service.random_choices(5, 4)


def test_objective_of_identity_is_solution_fraction(small_instances):
    expected = np.mean([len(item.solutions) / 64 for item in small_instances])
    assert service.objective(PhaseChoice.identity(), small_instances) == pytest.approx(expected)


def test_objective_single_instance(small_instances):
    choice = service.random_choice(make_rng(2))
    item = small_instances[0]
    state = qsim_service.heuristic_trial(item.instance, choice)
    assert service.objective(choice, [item]) == pytest.approx(
        qsim_service.success_probability(state, item.solutions)
    )
    assert 0.0 <= service.objective(choice, small_instances) <= 1.0


def test_objective_needs_instances():
    with pytest.raises(InputError):
        service.objective(PhaseChoice(), [])


def test_training_instances_are_solvable(small_config, small_instances):
    assert len(small_instances) == small_config.train_count
    assert all(item.solutions and item.instance.n == 6 for item in small_instances)


def test_budget_of_one_returns_initial(small_config, small_instances):
    config = small_config.model_copy(update={"budget": 1})
    initial = service.random_choice(make_rng(3))
    result = service.optimize(config, initial, small_instances)

    assert result.rho == initial.rho
    assert result.tau == initial.tau
    assert result.provenance.objective == pytest.approx(service.objective(initial, small_instances))


def test_optimize_never_worsens(small_config, small_instances):
    initial = service.random_choice(make_rng(4))
    result = service.optimize(small_config, initial, small_instances, restart=2)

    assert service.objective(result, small_instances) >= service.objective(initial, small_instances)
    assert result.provenance == ChoiceProvenance(
        train_n=6, seed=7, restart=2, objective=service.objective(result, small_instances)
    )
    assert result.steps == initial.steps


def test_optimize_is_deterministic(small_config, small_instances):
    initial = service.random_choice(make_rng(5))
    first = service.optimize(small_config, initial, small_instances)
    second = service.optimize(small_config, initial, small_instances)
    assert first == second


def test_build_portfolio(small_config):
    portfolio = service.build_portfolio(small_config)

    assert 1 <= len(portfolio.choices) <= small_config.restarts
    assert portfolio.config == small_config
    assert all(c.provenance is not None and c.provenance.train_n == 6 for c in portfolio.choices)
    for i, a in enumerate(portfolio.choices):
        for b in portfolio.choices[i + 1 :]:
            assert np.max(np.abs(a.coefficients() - b.coefficients())) > 1e-6


def test_build_portfolio_single_restart(small_config):
    portfolio = service.build_portfolio(small_config.model_copy(update={"restarts": 1}))
    assert len(portfolio.choices) == 1
    assert portfolio.choices[0].provenance.restart == 0


def test_build_portfolio_is_reproducible(small_config):
    first = service.build_portfolio(small_config)
    second = service.build_portfolio(small_config)
    assert dump_document(first) == dump_document(second)


def test_optimized_portfolio_requires_provenance(small_config):
    with pytest.raises(ValueError):
        PortfolioSet(choices=[PhaseChoice()], config=small_config)


def test_portfolio_id_depends_on_choices():
    a = PortfolioSet(choices=[PhaseChoice.identity()])
    b = PortfolioSet(choices=[PhaseChoice(steps=2)])
    assert service.portfolio_id(a) == service.portfolio_id(a.model_copy())
    assert service.portfolio_id(a) != service.portfolio_id(b)
    assert len(service.portfolio_id(a)) == 12


def test_identity_portfolio_evaluation():
    portfolio = PortfolioSet(choices=[PhaseChoice.identity(), PhaseChoice(steps=3)])
    report = service.cross_size_eval(portfolio, test_n=8, test_count=3, seed=12)

    assert report.schema_name == "report/1"
    assert report.aggregate.instance_count == 3
    assert report.aggregate.test_n == 8
    for record in report.records:
        fraction = record.solution_count / 256
        assert [s.p for s in record.samples] == pytest.approx([fraction, fraction], abs=1e-12)
        assert record.single.mean == pytest.approx(1 / fraction)
        assert record.mixed.mean == pytest.approx(record.single.mean)
        assert record.jensen_gap == pytest.approx(0.0, abs=1e-9)
        assert record.mixed_not_worse
        assert record.choice_stats[0].mean == pytest.approx(1 / fraction)
    assert report.aggregate.median_mixed_mean == pytest.approx(report.aggregate.median_single_mean)


def test_evaluation_uses_unseen_instances(small_config):
    training = {item.seed for item in service.training_instances(small_config)}
    portfolio = PortfolioSet(choices=[PhaseChoice.identity()])
    report = service.cross_size_eval(portfolio, test_n=6, test_count=4, seed=small_config.seed)
    assert training.isdisjoint({record.seed for record in report.records})


def test_random_portfolio_evaluation_mixed_not_worse():
    portfolio = PortfolioSet(choices=service.random_choices(6, 9))
    report = service.cross_size_eval(portfolio, test_n=8, test_count=3, seed=2)
    for record in report.records:
        assert record.mixed_not_worse
        assert record.jensen_gap is None or record.jensen_gap >= -1e-12
        if not record.single.divergent:
            assert record.mixed.mean <= record.single.mean + 1e-9


def test_evaluation_is_reproducible():
    portfolio = PortfolioSet(choices=service.random_choices(3, 5))
    first = service.cross_size_eval(portfolio, 7, 2, 1)
    second = service.cross_size_eval(portfolio, 7, 2, 1)
    assert dump_document(first) == dump_document(second)


def test_compare_portfolios():
    portfolios = {
        "0:identity": PortfolioSet(choices=[PhaseChoice.identity()]),
        "1:random": PortfolioSet(choices=service.random_choices(4, 1)),
    }
    report = service.compare_portfolios(portfolios, test_n=7, test_count=2, seed=3)

    assert report.schema_name == "comparison/1"
    assert set(report.reports) == set(portfolios)
    mixed = report.comparison.median_mixed_means
    assert report.comparison.best == min(mixed, key=mixed.get)
    with pytest.raises(InputError):
        service.compare_portfolios({}, 7, 2, 3)


@pytest.fixture(scope="module")
def portfolio_n8() -> PortfolioSet:
    config = TrainingConfig(train_n=8, train_count=20, restarts=10, budget=500, seed=2024)
    return service.build_portfolio(config)


@pytest.fixture(scope="module")
def portfolio_n12() -> PortfolioSet:
    config = TrainingConfig(train_n=12, train_count=20, restarts=10, budget=500, seed=2024)
    return service.build_portfolio(config)


@pytest.mark.slow
def test_trained_portfolio_transfers_to_larger_instances(portfolio_n8):
    portfolio = portfolio_n8
    assert all(choice.provenance.train_n == 8 for choice in portfolio.choices)

    trained = service.cross_size_eval(portfolio, test_n=14, test_count=20, seed=2025)
    baseline = service.cross_size_eval(
        PortfolioSet(choices=service.random_choices(len(portfolio.choices), 2025)),
        test_n=14,
        test_count=20,
        seed=2025,
    )
    assert all(record.mixed_not_worse for record in trained.records)
    assert trained.aggregate.median_mixed_mean < baseline.aggregate.median_mixed_mean


def test_objective_ignores_variable_names(small_instances):
    choice = service.random_choice(make_rng(6))
    permutation = [3, 0, 5, 1, 4, 2]
    relabeled = [
        item.model_copy(
            update={
                "instance": sat_service.relabel(item.instance, permutation),
                "solutions": sat_service.solutions_bruteforce(
                    sat_service.relabel(item.instance, permutation)
                ),
            }
        )
        for item in small_instances
    ]
    assert service.objective(choice, relabeled) == pytest.approx(
        service.objective(choice, small_instances), abs=1e-12
    )


@pytest.mark.slow
def test_single_restart_beats_typical_random_choice():
    config = TrainingConfig(train_n=8, train_count=20, restarts=1, budget=500, seed=31)
    instances = service.training_instances(config)
    initial = service.random_choice(make_rng(32))

    trained = service.optimize(config, initial, instances)
    random_objectives = [
        service.objective(choice, instances) for choice in service.random_choices(200, 33)
    ]

    assert trained.provenance.objective > service.objective(initial, instances)
    assert trained.provenance.objective > np.median(random_objectives)


@pytest.mark.slow
def test_trained_portfolio_beats_random_portfolio_at_training_size(portfolio_n12):
    assert all(choice.provenance.train_n == 12 for choice in portfolio_n12.choices)
    random_portfolio = PortfolioSet(
        choices=service.random_choices(len(portfolio_n12.choices), 2026)
    )
    report = service.compare_portfolios(
        {"trained": portfolio_n12, "random": random_portfolio},
        test_n=12,
        test_count=20,
        seed=2026,
    )

    mixed = report.comparison.median_mixed_means
    assert mixed["trained"] < mixed["random"]
    assert report.comparison.best == "trained"


@pytest.mark.slow
def test_portfolios_from_two_training_sizes_on_larger_instances(portfolio_n8, portfolio_n12):
    report = service.compare_portfolios(
        {"0:n8": portfolio_n8, "1:n12": portfolio_n12},
        test_n=20,
        test_count=20,
        seed=2027,
    )

    assert set(report.comparison.median_mixed_means) == {"0:n8", "1:n12"}
    for evaluation in report.reports.values():
        assert evaluation.aggregate.test_n == 20
        assert evaluation.aggregate.instance_count == 20
        assert all(record.mixed_not_worse for record in evaluation.records)
        assert all(record.mixed.mean > 0 for record in evaluation.records)
    assert report.comparison.best in {"0:n8", "1:n12"}
