"""
Order-preserving fan-out of independent work items.

Results always come back in submission order, so anything reduced from them
(gradients, dataset sequences) is independent of thread scheduling.
"""

import asyncio
import logging
from typing import Callable, List, Sequence, TypeVar

from config import Config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


async def _gather_in_threads(func: Callable[[T], R], items: Sequence[T], threads: int) -> List[R]:
    semaphore = asyncio.Semaphore(threads)

    async def run_one(item: T) -> R:
        async with semaphore:
            return await asyncio.to_thread(func, item)

    # gather keeps submission order
    return list(await asyncio.gather(*(run_one(item) for item in items)))


def map_ordered(func: Callable[[T], R], items: Sequence[T], threads: int = None) -> List[R]:
    """
    Apply func to every item, possibly on worker threads

    Args:
        func: Pure function of one item
        items: Work items
        threads: Worker thread count (defaults to Config.THREADS)

    Returns:
        List of results in the order of items
    """
    threads = Config.THREADS if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    logger.debug(f"Running {len(items)} work items on {threads} threads")
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return asyncio.run(_gather_in_threads(func, items, threads))
    # Already inside an event loop: stay sequential rather than nest loops
    return [func(item) for item in items]
