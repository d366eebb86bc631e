"""Order-preserving process-pool map.

Work items are evaluated independently and returned in input order, so the
result never depends on the worker count.  The task callable is handed to
the workers through fork inheritance, which lets closures (field functions,
lambdas) be used without pickling.
"""

from __future__ import annotations

import multiprocessing as mp
import os

_TASK = None
_IN_WORKER = False
_DEFAULT_WORKERS = 1


def set_default_workers(n: int) -> None:
    global _DEFAULT_WORKERS
    if n < 1:
        raise ValueError("worker count must be positive")
    _DEFAULT_WORKERS = int(n)


def default_workers() -> int:
    return _DEFAULT_WORKERS


def _mark_worker():
    global _IN_WORKER
    _IN_WORKER = True


def _run(item):
    return _TASK(item)


def parallel_map(fn, items, workers=None) -> list:
    items = list(items)
    workers = _DEFAULT_WORKERS if workers is None else int(workers)
    if workers <= 1 or len(items) <= 1 or _IN_WORKER or os.name != "posix":
        return [fn(x) for x in items]
    global _TASK
    previous, _TASK = _TASK, fn
    try:
        ctx = mp.get_context("fork")
        with ctx.Pool(min(workers, len(items)), initializer=_mark_worker) as pool:
            chunk = max(1, len(items) // (4 * workers))
            return pool.map(_run, items, chunksize=chunk)
    finally:
        _TASK = previous
