"""Bounded thread offloading for independent computations.

Table rows, sweep points and validation problems are independent pure
computations. They are pushed to worker threads with asyncio.to_thread(),
at most NIL_NUM_THREADS at a time, and the results are reassembled in input
order so output never depends on scheduling.
"""

import asyncio
import logging
import os
from collections.abc import Callable, Sequence
from typing import TypeVar

from nilkit.core.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

T = TypeVar("T")

THREADS_ENV_VAR = "NIL_NUM_THREADS"


def num_threads(override: int | None = None) -> int:
    """Resolve the worker limit from an explicit override or NIL_NUM_THREADS.

    Raises:
        ConfigurationError: If the value is not a positive integer
    """
    if override is not None:
        if override < 1:
            raise ConfigurationError(
                f"thread count must be positive, got {override}", parameter_name="threads"
            )
        return override

    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigurationError(
            f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}",
            parameter_name=THREADS_ENV_VAR,
        ) from e
    if value < 1:
        raise ConfigurationError(
            f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}",
            parameter_name=THREADS_ENV_VAR,
        )
    return value


async def run_bounded(calls: Sequence[Callable[[], T]], limit: int) -> list[T]:
    """Run blocking calls in threads, at most `limit` at once, preserving order.

    Exceptions propagate from the first failing call in input order.
    """
    semaphore = asyncio.Semaphore(limit)

    async def _one(call: Callable[[], T]) -> T:
        async with semaphore:
            return await asyncio.to_thread(call)

    logger.debug(f"offloading {len(calls)} calls with limit {limit}")
    outcomes = await asyncio.gather(*(_one(call) for call in calls), return_exceptions=True)
    results: list[T] = []
    for outcome in outcomes:
        if isinstance(outcome, BaseException):
            raise outcome
        results.append(outcome)
    return results
