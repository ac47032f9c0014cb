import os
from concurrent.futures import ProcessPoolExecutor
from types import SimpleNamespace
from typing import Optional

from loguru import logger


def init_pool(state: SimpleNamespace, jobs: Optional[int]) -> None:
    """
    Creates the process pool.

    One worker means everything runs in-process and no
    executor is created.

    :param state: run state the pool is stored on.
    :param jobs: number of workers, None for all cores.
    """
    workers = jobs or os.cpu_count() or 1
    state.pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    logger.debug("worker pool with {} workers", workers)


def shutdown_pool(state: SimpleNamespace) -> None:
    """
    Waits for running tasks and stops the workers.

    :param state: run state holding the pool.
    """
    pool = getattr(state, "pool", None)
    if pool is not None:
        pool.shutdown(wait=True)
    state.pool = None
