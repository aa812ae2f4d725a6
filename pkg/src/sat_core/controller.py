from pathlib import Path

import click
from loguru import logger

from src.artifacts import atomic_write_text, run_manifest
from src.sat_core import service as sat_service
from src.sat_core.dimacs import write_dimacs
from src.utils.seeding import Stream, derive_seed


def instance_filename(n: int, ratio: float, seed: int, index: int) -> str:
    return f"n{n}-r{ratio:g}-s{seed}-{index:04d}.cnf"


@click.command("gen")
@click.option("--n", "n", type=click.IntRange(min=3, max=30), required=True)
@click.option("--ratio", type=click.FloatRange(min=0, min_open=True), default=4.25, show_default=True)
@click.option("--count", type=click.IntRange(min=1), required=True)
@click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), required=True)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
def gen_command(n: int, ratio: float, count: int, seed: int, out: Path):
    """
    Write random 3-SAT instances as DIMACS CNF files.

    Unsatisfiable draws are kept; experiments filter them later.
    """
    out = Path(out)
    parameters = {"n": n, "ratio": ratio, "count": count, "seed": seed, "out": out}
    with run_manifest("gen", parameters, out, seeds={"root": seed}) as manifest:
        for index in range(count):
            child = derive_seed(seed, Stream.INSTANCES, index)
            instance = sat_service.random_instance(n, ratio, child)
            path = out / instance_filename(n, ratio, seed, index)
            comments = [
                f"random 3-SAT n={n} m={instance.m} ratio={ratio:g}",
                f"root_seed={seed} index={index} instance_seed={child}",
            ]
            atomic_write_text(path, write_dimacs(instance, comments))
            manifest.outputs.append(str(path))

    logger.info(f"Generated {count} instances with n={n}, ratio={ratio} in {out}")
    click.echo(str(out))
