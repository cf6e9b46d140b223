"""Chunked ranges, ordered process-pool maps, and seed splitting."""

import logging
from collections import deque
from collections.abc import Iterable, Iterator
from concurrent.futures import Future, ProcessPoolExecutor
from typing import Callable, TypeVar

import numpy as np

from .const import CHUNK_SIZE
from .errors import InvalidInputError

_LOGGER = logging.getLogger(__name__)

_A = TypeVar("_A")
_R = TypeVar("_R")


def chunk_ranges(
    start: int,
    stop: int,
    chunk_size: int = CHUNK_SIZE,
    boundaries: Iterable[int] = (),
) -> list[tuple[int, int]]:
    """
    Split [start, stop) into half-open chunks of at most chunk_size.

    Chunks are also cut at every boundary inside the range.
    """
    if chunk_size < 1:
        raise InvalidInputError(f"chunk_size must be at least 1 (got {chunk_size})")

    cuts = {b for b in boundaries if start < b < stop}
    cuts.update(range(start + chunk_size, stop, chunk_size))

    edges = [start, *sorted(cuts), stop]
    return [(lo, hi) for lo, hi in zip(edges, edges[1:]) if lo < hi]


def ordered_map(
    func: Callable[[_A], _R], tasks: Iterable[_A], threads: int = 1
) -> Iterator[_R]:
    """
    Map func over tasks, yielding results in task order.

    With more than one thread, tasks run in a process pool with at most
    2 * threads tasks in flight.
    """
    if threads <= 1:
        yield from map(func, tasks)
        return

    window = 2 * threads
    _LOGGER.debug("Running tasks on %s process(es)", threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        pending: deque[Future] = deque()
        for task in tasks:
            pending.append(pool.submit(func, task))
            if len(pending) >= window:
                yield pending.popleft().result()

        while pending:
            yield pending.popleft().result()


def spawn_seeds(seed: int, streams: int) -> list[int]:
    """Independent 64-bit seeds for each stream, derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(streams)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def split_count(total: int, streams: int) -> list[int]:
    """Share of total for each stream (earlier streams take the remainder)."""
    share, extra = divmod(total, streams)
    return [share + (1 if i < extra else 0) for i in range(streams)]
