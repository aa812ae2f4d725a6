from pathlib import Path
from typing import Iterable

from pydantic import ValidationError

from src.exceptions import DimacsFormatError, InputError
from src.sat_core.models import Clause, SatInstance


def read_dimacs(text: str, k: int | None = 3) -> SatInstance:
    """
    Parse a DIMACS CNF document.

    Literals may span lines; every clause ends with 0. Lines starting with
    "c" are comments and a "%" line ends the clause section.

    Parameters:
        text (str): The document.
        k (int | None): Required clause arity; None disables the check.

    Returns:
        SatInstance: The parsed formula.

    Raises:
        DimacsFormatError: On a malformed header, out-of-range literal,
        repeated variable, wrong arity or clause count mismatch.
    """
    header: tuple[int, int] | None = None
    clauses: list[Clause] = []
    pending: list[int] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsFormatError(message=f"Duplicate header on line {line_no}")
            header = _parse_header(line, line_no)
            continue
        if header is None:
            raise DimacsFormatError(message=f"Clause before header on line {line_no}")

        n, _ = header
        for token in line.split():
            try:
                literal = int(token)
            except ValueError:
                raise DimacsFormatError(
                    message=f"Invalid literal '{token}' on line {line_no}"
                )
            if literal == 0:
                clauses.append(_build_clause(pending, k, len(clauses), line_no))
                pending = []
            elif abs(literal) > n:
                raise DimacsFormatError(
                    message=f"Literal {literal} out of range for {n} variables on line {line_no}"
                )
            else:
                pending.append(literal)

    if header is None:
        raise DimacsFormatError(message="Missing 'p cnf' header")
    if pending:
        raise DimacsFormatError(message="Last clause is not terminated by 0")

    n, m = header
    if len(clauses) != m:
        raise DimacsFormatError(
            message=f"Header declares {m} clauses but {len(clauses)} were found"
        )

    return SatInstance(n=n, clauses=tuple(clauses))


def write_dimacs(instance: SatInstance, comments: Iterable[str] = ()) -> str:
    lines = [f"c {comment}" for comment in comments]
    lines.append(f"p cnf {instance.n} {instance.m}")
    for clause in instance.clauses:
        lines.append(" ".join(str(lit) for lit in clause.literals()) + " 0")
    return "\n".join(lines) + "\n"


def _parse_header(line: str, line_no: int) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 4 or parts[1] != "cnf":
        raise DimacsFormatError(message=f"Malformed header on line {line_no}: '{line}'")
    try:
        n, m = int(parts[2]), int(parts[3])
    except ValueError:
        raise DimacsFormatError(message=f"Malformed header on line {line_no}: '{line}'")
    if not 1 <= n <= 30 or m < 0:
        raise DimacsFormatError(
            message=f"Unsupported header values n={n}, m={m} on line {line_no}"
        )
    return n, m


def _build_clause(
    literals: list[int], k: int | None, index: int, line_no: int
) -> Clause:
    if not literals:
        raise DimacsFormatError(message=f"Empty clause {index} on line {line_no}")
    if k is not None and len(literals) != k:
        raise DimacsFormatError(
            message=f"Clause {index} has {len(literals)} literals, expected {k}",
            debug=f"line {line_no}",
        )
    try:
        return Clause.from_literals(literals)
    except ValidationError as e:
        raise DimacsFormatError(
            message=f"Clause {index} repeats a variable on line {line_no}",
            debug=str(e),
        ) from e


def load_dimacs(path: Path | str, k: int | None = 3) -> SatInstance:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(message=f"Cannot read '{path}'", debug=str(e)) from e
    return read_dimacs(text, k=k)
