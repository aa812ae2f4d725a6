from pathlib import Path

import click
from loguru import logger
from pydantic import ValidationError

from src.artifacts import RunManifest, load_document
from src.exceptions import InputError, QuantumPortfolioError
from src.phase_opt.controller import eval_command, optimize_command
from src.portfolio.controller import amplify_command, histogram_command
from src.restart_analytics.controller import frontier_command
from src.sat_core.controller import gen_command


class ExperimentGroup(click.Group):
    """Command group translating library errors into exit codes (3 input, 4 infeasible)."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except ValidationError as e:
            self._fail(ctx, InputError(message="Invalid parameters", debug=str(e)))
        except QuantumPortfolioError as e:
            self._fail(ctx, e)

    @staticmethod
    def _fail(ctx: click.Context, error: QuantumPortfolioError):
        logger.error(f"{error.error_code}: {error.message}")
        if "debug" in error.detail:
            logger.debug(error.detail["debug"])
        click.echo(f"Error: {error.message}", err=True)
        ctx.exit(error.exit_code)


@click.command("replay")
@click.argument("manifest_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_context
def replay_command(ctx: click.Context, manifest_file: Path):
    """
    Re-run the command recorded in a manifest with the same parameters.
    """
    manifest = load_document(manifest_file, RunManifest)
    root = ctx.find_root().command
    command = root.get_command(ctx, manifest.command) if isinstance(root, click.Group) else None
    if command is None or manifest.command == "replay":
        raise InputError(message=f"Manifest names unknown command '{manifest.command}'")

    logger.info(f"Replaying '{manifest.command}' from {manifest_file}")
    ctx.invoke(command, **manifest.parameters)


def add_commands(app: click.Group):
    """
    Register the experiment subcommands on the root group.

    Parameters:
        app (click.Group): The root command group.
    """
    app.add_command(frontier_command)
    app.add_command(gen_command)
    app.add_command(histogram_command)
    app.add_command(optimize_command)
    app.add_command(eval_command)
    app.add_command(amplify_command)
    app.add_command(replay_command)


def configure_cli(app: click.Group):
    add_commands(app)
