"""Rep-level parallel map with results independent of the worker count."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Sequence

import numpy as np


def _run_chunk(fn: Callable, reps: Sequence[int]):
    return [fn(r) for r in reps]


def map_reps(fn: Callable, reps: int, workers: int = 1, chunk: int = 0) -> list:
    """``[fn(0), fn(1), ..., fn(reps - 1)]`` in order.

    ``fn`` must be picklable when ``workers > 1``.  Each rep derives its own
    random stream from its index, so the output does not depend on ``workers``.
    """
    if workers <= 1 or reps < 2:
        return [fn(r) for r in range(reps)]
    chunk = chunk or max(1, -(-reps // (4 * workers)))
    chunks = [range(i, min(i + chunk, reps)) for i in range(0, reps, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(partial(_run_chunk, fn), chunks))
    return [x for p in parts for x in p]


def stack_reps(fn: Callable, reps: int, workers: int = 1) -> np.ndarray:
    return np.asarray(map_reps(fn, reps, workers))
