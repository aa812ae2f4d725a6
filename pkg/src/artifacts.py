import os
import tempfile
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src import __version__
from src.exceptions import InputError


class VersionedDocument(BaseModel):
    """Base for every JSON artifact; serialized with a leading "schema" field."""

    model_config = ConfigDict(populate_by_name=True)

    schema_name: str = Field(alias="schema")


class RunManifest(VersionedDocument):
    schema_name: str = Field(default="manifest/1", alias="schema")
    command: str
    parameters: dict[str, Any]
    seeds: dict[str, int] = Field(default_factory=dict)
    version: str = __version__
    outputs: list[str] = Field(default_factory=list)
    duration_seconds: float = 0.0


def dump_document(document: BaseModel) -> str:
    """
    Serialize an artifact model to stable, indented JSON.

    Non-finite floats become null.
    """
    return document.model_dump_json(by_alias=True, indent=2) + "\n"


def atomic_write_text(path: Path | str, text: str) -> Path:
    """
    Write text through a temporary file in the destination directory, then rename.

    Parameters:
        path (Path | str): Destination file.
        text (str): Content, written as UTF-8 with LF line endings.

    Returns:
        Path: The destination path.

    Raises:
        InputError: If the destination directory cannot be written.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(
            dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise InputError(
            message=f"Cannot write output file '{path}'",
            error_code="UNWRITABLE_OUTPUT",
            debug=str(e),
        ) from e

    logger.debug(f"Wrote {path}")
    return path


def write_document(path: Path | str, document: BaseModel) -> Path:
    return atomic_write_text(path, dump_document(document))


def load_document(path: Path | str, model: type[BaseModel]) -> Any:
    """
    Read and validate a JSON artifact.

    Parameters:
        path (Path | str): File to read.
        model (type[BaseModel]): Pydantic model describing the file.

    Returns:
        The validated model instance.

    Raises:
        InputError: If the file is missing, unreadable or fails validation.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(message=f"Cannot read '{path}'", debug=str(e)) from e

    try:
        return model.model_validate_json(text)
    except ValidationError as e:
        raise InputError(
            message=f"'{path}' is not a valid {model.__name__} document",
            debug=str(e),
        ) from e


def manifest_path(output: Path | str) -> Path:
    output = Path(output)
    if output.is_dir():
        return output / "manifest.json"
    return output.with_name(output.name + ".manifest.json")


@contextmanager
def run_manifest(
    command: str,
    parameters: dict[str, Any],
    output: Path | str,
    seeds: dict[str, int] | None = None,
) -> Iterator[RunManifest]:
    """
    Time a command and write its RunManifest next to `output` once it succeeds.

    The yielded manifest's `outputs` list is filled in by the command.
    """
    manifest = RunManifest(
        command=command,
        parameters={k: _jsonable(v) for k, v in parameters.items()},
        seeds=seeds or {},
    )
    started = time.perf_counter()
    yield manifest
    manifest.duration_seconds = time.perf_counter() - started
    write_document(manifest_path(output), manifest)
    logger.info(f"{command} finished in {manifest.duration_seconds:.3f}s")


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value
