from pathlib import Path

import click

from src.artifacts import load_document, run_manifest, write_document
from src.phase_opt import service as phase_service
from src.phase_opt.models import PortfolioSet, TrainingConfig


@click.command("optimize")
@click.option("--n", "n", type=click.IntRange(min=3, max=24), required=True, help="Training instance size.")
@click.option("--count", type=click.IntRange(min=1), default=20, show_default=True, help="Training instances.")
@click.option("--ratio", type=click.FloatRange(min=0, min_open=True), default=4.25, show_default=True)
@click.option("--restarts", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--budget", type=click.IntRange(min=1), default=500, show_default=True, help="Objective evaluations per restart.")
@click.option("--steps", type=click.IntRange(min=1), default=None, help="Trial length (default: n of each instance).")
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def optimize_command(
    n: int,
    count: int,
    ratio: float,
    restarts: int,
    budget: int,
    steps: int | None,
    seed: int,
    out: Path,
):
    """
    Optimize phase choices on small instances and write the portfolio JSON.
    """
    out = Path(out)
    config = TrainingConfig(
        train_n=n,
        train_count=count,
        ratio=ratio,
        restarts=restarts,
        budget=budget,
        steps=steps,
        seed=seed,
    )
    parameters = {
        "n": n,
        "count": count,
        "ratio": ratio,
        "restarts": restarts,
        "budget": budget,
        "steps": steps,
        "seed": seed,
        "out": out,
    }
    with run_manifest("optimize", parameters, out, seeds={"root": seed}) as manifest:
        write_document(out, phase_service.build_portfolio(config))
        manifest.outputs.append(str(out))

    click.echo(str(out))


@click.command("eval")
@click.option("--portfolio", "portfolio_files", type=click.Path(dir_okay=False, path_type=Path), multiple=True, required=True)
@click.option("--n", "n", type=click.IntRange(min=3, max=24), required=True, help="Test instance size.")
@click.option("--count", type=click.IntRange(min=1), required=True, help="Solvable test instances.")
@click.option("--ratio", type=click.FloatRange(min=0, min_open=True), default=4.25, show_default=True)
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def eval_command(
    portfolio_files: tuple[Path, ...],
    n: int,
    count: int,
    ratio: float,
    seed: int,
    out: Path,
):
    """
    Evaluate portfolios on fresh instances; several portfolios are also compared.
    """
    out = Path(out)
    portfolios = {
        _label(Path(path), index): load_document(path, PortfolioSet)
        for index, path in enumerate(portfolio_files)
    }
    parameters = {
        "portfolio_files": list(portfolio_files),
        "n": n,
        "count": count,
        "ratio": ratio,
        "seed": seed,
        "out": out,
    }
    with run_manifest("eval", parameters, out, seeds={"root": seed}) as manifest:
        if len(portfolios) == 1:
            (portfolio,) = portfolios.values()
            document = phase_service.cross_size_eval(portfolio, n, count, seed, ratio)
        else:
            document = phase_service.compare_portfolios(portfolios, n, count, seed, ratio)
        write_document(out, document)
        manifest.outputs.append(str(out))

    click.echo(str(out))


def _label(path: Path, index: int) -> str:
    return f"{index}:{path.stem}"
