from concurrent.futures import Executor
from functools import partial
from types import SimpleNamespace
from typing import Callable, Iterable, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    pool: Optional[Executor],
    fn: Callable[[T], R],
    items: Iterable[T],
) -> list[R]:
    """
    Applies fn to every item, results in input order.

    Completion order of the workers never shows in the result.

    :param pool: executor, or None to run in-process.
    :param fn: picklable callable.
    :param items: inputs.
    :returns: outputs in the order of items.
    """
    if pool is None:
        return [fn(item) for item in items]
    return list(pool.map(fn, items))


def get_map(state: SimpleNamespace) -> Callable[[Callable[[T], R], Iterable[T]], list[R]]:
    """
    Returns an ordered map bound to the run's pool.

    You can use it like this:

    >>> mapper = get_map(context.state)
    >>> trace_branches(1.0, 20.0, 200, map_fn=mapper)

    :param state: run state.
    :returns: map function.
    """
    return partial(ordered_map, getattr(state, "pool", None))
