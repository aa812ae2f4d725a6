from pathlib import Path

import click
from loguru import logger

from src.artifacts import load_document, run_manifest, write_document
from src.exceptions import InfeasibleError, InputError
from src.phase_opt import service as phase_service
from src.phase_opt.models import PortfolioSet
from src.portfolio import service as portfolio_service
from src.portfolio.models import AmplifyRecord, HistogramDocument, SampleRecord
from src.qsim.models import PhaseChoice
from src.sat_core import service as sat_service
from src.sat_core.dimacs import load_dimacs


def parse_choices_source(source: str) -> int:
    """Number K from a "random:K" choices source."""
    kind, _, count = source.partition(":")
    if kind != "random" or not count.isdigit() or int(count) < 1:
        raise click.BadParameter(f"expected 'random:K', got '{source}'", param_hint="--choices")
    return int(count)


@click.command("histogram")
@click.option("--instances", "instances_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--choices", "choices_source", default=None, help="'random:K' for K random phase choices.")
@click.option("--portfolio", "portfolio_file", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), required=True)
@click.option("--steps", type=click.IntRange(min=1), default=None, help="Trial length of random choices (default: n).")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def histogram_command(
    instances_dir: Path,
    choices_source: str | None,
    portfolio_file: Path | None,
    seed: int,
    steps: int | None,
    out: Path,
):
    """
    Success-probability samples and single/mixed statistics per instance.
    """
    if (choices_source is None) == (portfolio_file is None):
        raise click.UsageError("Give exactly one of --choices or --portfolio")
    instances_dir, out = Path(instances_dir), Path(out)

    if portfolio_file is not None:
        choices = load_document(portfolio_file, PortfolioSet).choices
        source = f"portfolio:{Path(portfolio_file).name}"
    else:
        count = parse_choices_source(choices_source)
        choices = phase_service.random_choices(count, seed, steps)
        source = choices_source

    paths = sorted(instances_dir.glob("*.cnf"))
    if not paths:
        raise InputError(message=f"No .cnf files in '{instances_dir}'")

    parameters = {
        "instances_dir": instances_dir,
        "choices_source": choices_source,
        "portfolio_file": portfolio_file,
        "seed": seed,
        "steps": steps,
        "out": out,
    }
    with run_manifest("histogram", parameters, out, seeds={"root": seed}) as manifest:
        samples, stats, excluded = [], [], 0
        for path in paths:
            instance = load_dimacs(path)
            solutions = sat_service.solutions_bruteforce(instance)
            if not solutions:
                logger.warning(f"Excluding unsatisfiable instance {path.name}")
                excluded += 1
                continue
            dist = portfolio_service.success_distribution(instance, choices, solutions)
            samples.extend(
                SampleRecord(instance_id=path.stem, choice_id=s.choice_id, p=s.p, steps=s.steps)
                for s in dist.samples
            )
            stats.append(portfolio_service.instance_summary(path.stem, dist, len(solutions)))

        if not stats:
            raise InfeasibleError(message="No satisfiable instances to evaluate")

        document = HistogramDocument(
            choices_source=source,
            excluded_unsat_count=excluded,
            samples=samples,
            stats=stats,
        )
        write_document(out, document)
        manifest.outputs.append(str(out))

    click.echo(str(out))


@click.command("amplify")
@click.option("--instance", "instance_file", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--portfolio", "portfolio_file", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--rounds", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def amplify_command(instance_file: Path, portfolio_file: Path, rounds: int, out: Path):
    """
    Success probability of a uniformly weighted quantum portfolio after amplitude amplification.
    """
    instance_file, out = Path(instance_file), Path(out)
    instance = load_dimacs(instance_file)
    portfolio = load_document(portfolio_file, PortfolioSet)
    choices: list[PhaseChoice] = portfolio.choices

    parameters = {
        "instance_file": instance_file,
        "portfolio_file": portfolio_file,
        "rounds": rounds,
        "out": out,
    }
    with run_manifest("amplify", parameters, out) as manifest:
        solutions = sat_service.solutions_bruteforce(instance)
        portfolio_p = portfolio_service.amplified_portfolio(instance, choices, None, 0, solutions)
        amplified = portfolio_service.amplified_portfolio(instance, choices, None, rounds, solutions)
        record = AmplifyRecord(
            instance_id=instance_file.stem,
            portfolio_id=phase_service.portfolio_id(portfolio),
            rounds=rounds,
            portfolio_probability=portfolio_p,
            amplified_probability=amplified,
            closed_form_probability=portfolio_service.amplified_closed_form(portfolio_p, rounds),
        )
        write_document(out, record)
        manifest.outputs.append(str(out))

    logger.info(f"p-bar={portfolio_p:.6g} -> {amplified:.6g} after {rounds} rounds")
    click.echo(str(out))
