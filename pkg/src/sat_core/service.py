from functools import lru_cache
from typing import Sequence

import numpy as np
from loguru import logger

from src.config import settings
from src.exceptions import EnumerationLimitExceeded, InfeasibleError, InputError
from src.sat_core.models import Assignment, Clause, LabeledInstance, SatInstance
from src.utils.seeding import Stream, derive_seed, make_rng


def clauses_per_variable(n: int, ratio: float) -> int:
    """Clause count round(ratio * n), ties to even."""
    return round(ratio * n)


def random_instance(n: int, ratio: float, seed: int, k: int = 3) -> SatInstance:
    """
    Draw a random k-SAT instance with round(ratio * n) clauses.

    Each clause picks k distinct variables uniformly without replacement and
    negates each with probability 1/2. Duplicate clauses are allowed.

    Parameters:
        n (int): Number of variables.
        ratio (float): Clause-to-variable ratio (4.25 for the hard region of 3-SAT).
        seed (int): 64-bit seed; equal seeds give equal instances.
        k (int): Literals per clause.

    Returns:
        SatInstance: The generated instance.

    Raises:
        InputError: If n < k, ratio <= 0 or the clause count rounds to zero.
    """
    if n < k:
        raise InputError(message=f"Need at least {k} variables for {k}-SAT, got n={n}")
    if ratio <= 0:
        raise InputError(message=f"Clause ratio must be positive, got {ratio}")
    m = clauses_per_variable(n, ratio)
    if m < 1:
        raise InputError(message=f"ratio={ratio} gives no clauses for n={n}")

    rng = make_rng(seed)
    clauses = []
    for _ in range(m):
        variables = rng.choice(n, size=k, replace=False)
        negated = rng.integers(0, 2, size=k)
        clauses.append(
            Clause(
                variables=tuple(int(v) for v in variables),
                negated=tuple(bool(b) for b in negated),
            )
        )

    return SatInstance(n=n, clauses=tuple(clauses))


def conflicts(instance: SatInstance, a: Assignment) -> int:
    """
    Number of clauses the assignment does not satisfy.

    Parameters:
        instance (SatInstance): The formula.
        a (Assignment): Assignment bits, a < 2^n.

    Returns:
        int: Violated clause count; 0 exactly for solutions.
    """
    if not 0 <= a < instance.size:
        raise InputError(message=f"Assignment {a} out of range for n={instance.n}")

    count = 0
    for clause in instance.clauses:
        satisfied = any(
            bool((a >> v) & 1) != neg for v, neg in zip(clause.variables, clause.negated)
        )
        if not satisfied:
            count += 1
    return count


@lru_cache(maxsize=8)
def conflict_table(instance: SatInstance) -> np.ndarray:
    """
    Conflict counts of all 2^n assignments, indexed by assignment bits.

    The returned array is read-only. Only the eight most recent tables stay
    cached, which bounds memory at 512 MiB for n = 24.
    """
    if instance.n > settings.MAX_QUBITS:
        raise EnumerationLimitExceeded(
            debug=f"n={instance.n} exceeds MAX_QUBITS={settings.MAX_QUBITS}"
        )

    bits = np.arange(instance.size, dtype=np.int64)
    counts = np.zeros(instance.size, dtype=np.int32)
    for clause in instance.clauses:
        satisfied = np.zeros(instance.size, dtype=bool)
        for v, neg in zip(clause.variables, clause.negated):
            satisfied |= ((bits >> v) & 1).astype(bool) != neg
        counts += ~satisfied

    counts.flags.writeable = False
    return counts


def solutions_bruteforce(instance: SatInstance) -> frozenset[int]:
    """
    Every satisfying assignment, by enumeration.

    Raises:
        EnumerationLimitExceeded: If n exceeds settings.SAT_ENUMERATION_LIMIT.
    """
    if instance.n > settings.SAT_ENUMERATION_LIMIT:
        raise EnumerationLimitExceeded(
            debug=f"n={instance.n} > SAT_ENUMERATION_LIMIT={settings.SAT_ENUMERATION_LIMIT}"
        )

    solutions = frozenset(int(i) for i in np.flatnonzero(conflict_table(instance) == 0))
    logger.debug(f"Enumerated {len(solutions)} solutions over {instance.size} assignments")
    return solutions


def relabel(instance: SatInstance, permutation: Sequence[int]) -> SatInstance:
    """Rename variable v to permutation[v] in every clause."""
    if sorted(permutation) != list(range(instance.n)):
        raise InputError(message="permutation must reorder 0..n-1")
    return SatInstance(
        n=instance.n,
        clauses=tuple(
            Clause(
                variables=tuple(permutation[v] for v in clause.variables),
                negated=clause.negated,
            )
            for clause in instance.clauses
        ),
    )


def assignment_from_values(values: Sequence[bool]) -> int:
    return sum(1 << i for i, value in enumerate(values) if value)


def assignment_values(bits: int, n: int) -> list[bool]:
    return [bool((bits >> i) & 1) for i in range(n)]


def solvable_instances(
    n: int, count: int, ratio: float, seed: int, stream: Stream
) -> tuple[list[LabeledInstance], int]:
    """
    Draw random instances from `stream` until `count` of them are satisfiable.

    Parameters:
        n (int): Variables per instance.
        count (int): Solvable instances wanted.
        ratio (float): Clause-to-variable ratio.
        seed (int): Root seed; child seeds come from `stream`.
        stream (Stream): Seed stream, so training and test sets never share seeds.

    Returns:
        tuple[list[LabeledInstance], int]: Instances and the number of unsatisfiable draws skipped.

    Raises:
        InfeasibleError: If settings.MAX_GENERATION_ATTEMPTS * count draws are not enough.
    """
    if count < 1:
        raise InputError(message=f"Instance count must be positive, got {count}")

    instances: list[LabeledInstance] = []
    excluded = 0
    attempts = settings.MAX_GENERATION_ATTEMPTS * count
    for index in range(attempts):
        if len(instances) == count:
            break
        child = derive_seed(seed, stream, index)
        instance = random_instance(n, ratio, child)
        solutions = solutions_bruteforce(instance)
        if not solutions:
            excluded += 1
            continue
        instances.append(
            LabeledInstance(
                instance_id=f"n{n}-{stream.name.lower()}-{index:04d}",
                seed=child,
                instance=instance,
                solutions=solutions,
            )
        )

    if len(instances) < count:
        raise InfeasibleError(
            message=f"Only {len(instances)} of {count} instances were satisfiable",
            debug=f"n={n}, ratio={ratio}, attempts={attempts}",
        )
    if excluded:
        logger.warning(f"Excluded {excluded} unsatisfiable instances (n={n})")
    return instances, excluded
