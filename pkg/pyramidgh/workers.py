import logging
import os
from functools import partial
from typing import Any, Callable, Sequence, TypeVar

import attrs
import trio
from trio import CapacityLimiter, Event

_log = logging.getLogger(__name__)

T = TypeVar("T")

THREADS_ENV = "PYRAMID_GH_THREADS"
DEFAULT_THREADS = 4


class ClosedPoolError(Exception):
    ...


class WorkerConfigError(Exception):
    ...


def threads_from_env() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return DEFAULT_THREADS
    try:
        num = int(raw)
    except ValueError as e:
        raise WorkerConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from e
    if num < 1:
        raise WorkerConfigError(f"{THREADS_ENV} must be at least 1, got {num}")
    return num


@attrs.define
class WorkerPool:
    """
    runs the cpu-bound solvers in worker threads, at most `max_num` at once.

    * results of map() come back in input order, whatever order they finish in
    * once closed, run() and map() raise
    """

    _max_num: int = attrs.field(factory=threads_from_env)

    _limiter: CapacityLimiter = attrs.field(init=False, default=None)
    _closed: Event = attrs.field(init=False, factory=Event)

    def __attrs_post_init__(self):
        if self._max_num < 1:
            raise WorkerConfigError(f"worker pool needs at least one thread, got {self._max_num}")

    @property
    def max_num(self) -> int:
        return self._max_num

    def _ensure_limiter(self) -> CapacityLimiter:
        if self._closed.is_set():
            raise ClosedPoolError
        # created lazily, a limiter belongs to the running trio loop
        if self._limiter is None:
            self._limiter = CapacityLimiter(self._max_num)
        return self._limiter

    async def run(self, fn: Callable[..., T], *args: Any) -> T:
        limiter = self._ensure_limiter()
        return await trio.to_thread.run_sync(partial(fn, *args), limiter=limiter)

    async def map(self, fn: Callable[..., T], items: Sequence[Any]) -> list[T]:
        self._ensure_limiter()
        results: list = [None] * len(items)

        async def _one(k: int, item):
            results[k] = await self.run(fn, item)

        async with trio.open_nursery() as nursery:
            for k, item in enumerate(items):
                nursery.start_soon(_one, k, item)

        _log.debug("mapped %s over %d items", getattr(fn, "__name__", fn), len(items))
        return results

    async def __aenter__(self):
        return self

    async def aclose(self):
        if self._closed.is_set():
            return
        self._closed.set()

    async def __aexit__(self, exctype, exc, tb):
        await self.aclose()
