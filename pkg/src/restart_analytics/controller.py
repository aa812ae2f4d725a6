import csv
import io
from pathlib import Path

import click
from loguru import logger

from src.artifacts import atomic_write_text, run_manifest
from src.exceptions import RegimeError
from src.restart_analytics import service as restart_service
from src.restart_analytics.models import FrontierPoint, FrontierSummary, ProblemAngle

FRONTIER_SCHEMA = "frontier/1"
FRONTIER_COLUMNS = ["t", "p", "mean", "std", "sharpe", "efficient"]


@click.command("frontier")
@click.option("--fraction", type=float, required=True, help="Solution fraction S/N in (0, 1/2].")
@click.option("--t-max", type=click.IntRange(min=1), default=None, help="Largest iterations per trial (default: certainty count).")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def frontier_command(fraction: float, t_max: int | None, out: Path):
    """
    Mean/deviation of every restart strategy as CSV, frontier flagged.
    """
    if not 0 < fraction <= 0.5:
        raise RegimeError(message=f"--fraction must lie in (0, 1/2], got {fraction}")
    out = Path(out)

    angle = ProblemAngle(fraction=fraction)
    if t_max is None:
        t_max = restart_service.certainty_iterations(angle)

    parameters = {"fraction": fraction, "t_max": t_max, "out": out}
    with run_manifest("frontier", parameters, out) as manifest:
        points = restart_service.frontier(angle, t_max)
        summary = restart_service.summarize(angle, t_max)
        atomic_write_text(out, render_frontier_csv(points, summary))
        manifest.outputs.append(str(out))

    logger.info(
        f"Frontier for S/N={fraction}: certainty t={summary.certainty_t}, "
        f"optimal t={summary.optimal_t}, mean ratio={summary.mean_ratio}"
    )
    click.echo(str(out))


def render_frontier_csv(points: list[FrontierPoint], summary: FrontierSummary) -> str:
    buffer = io.StringIO()
    buffer.write(f"# schema={FRONTIER_SCHEMA}\n")
    buffer.write(
        f"# summary fraction={summary.fraction!r} certainty_t={summary.certainty_t} "
        f"optimal_t={summary.optimal_t} optimal_mean={summary.optimal_mean!r} "
        f"mean_ratio={summary.mean_ratio!r} continuous_mean={summary.continuous_mean!r}\n"
    )
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(FRONTIER_COLUMNS)
    for pt in points:
        writer.writerow(
            [pt.t, repr(pt.p), repr(pt.mean), repr(pt.std), repr(pt.sharpe), str(pt.efficient).lower()]
        )
    return buffer.getvalue()
