"""Element-loop threading knob.

``COHESIVE_PF_THREADS`` caps the number of worker threads used to chunk
large per-element updates (default: all cores).  The per-element work is
pure numpy, so threads mainly help on very large meshes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_MIN_CHUNK = 20000


def thread_count() -> int:
    env = os.environ.get("COHESIVE_PF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return os.cpu_count() or 1


def chunked_apply(fn, n: int, out: list, threads: int | None = None) -> None:
    """Run ``fn(lo, hi)`` over [0, n) in parallel chunks, appending to out.

    ``fn`` must write results for its slice independently; chunk order is
    restored by the caller via the slice bounds.
    """
    workers = thread_count() if threads is None else threads
    if workers <= 1 or n < 2 * _MIN_CHUNK:
        out.append(fn(0, n))
        return
    bounds = [
        (i * n // workers, (i + 1) * n // workers) for i in range(workers)
    ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in bounds if hi > lo]
        for fut in futures:
            out.append(fut.result())
