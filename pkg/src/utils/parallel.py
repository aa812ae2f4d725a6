from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from src.config import settings

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    fn: Callable[[T], R], items: Iterable[T], workers: int | None = None
) -> list[R]:
    """
    Map `fn` over `items`, in parallel when more than one worker is configured.

    Results keep the input order, so aggregation never depends on scheduling.
    """
    workers = workers or settings.WORKERS
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
