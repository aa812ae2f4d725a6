import click
from loguru import logger

from src import __version__
from src.cli import ExperimentGroup, configure_cli
from src.config import settings
from src.logging import configure_logging


@click.group(cls=ExperimentGroup)
@click.version_option(__version__, prog_name="qport")
@click.option("--log-level", default=None, help="Override the configured log level.")
def app(log_level: str | None):
    """
    Quantum portfolio experiments: restart frontiers, SAT phase heuristics and portfolios.
    """
    configure_logging(log_level)

    if settings.is_development:
        logger.info("Running application on development environment")


configure_cli(app)


if __name__ == "__main__":
    app()
