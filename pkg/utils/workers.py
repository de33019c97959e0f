"""
Concurrent parameter sweeps.

Independent per-parameter computations (one a-value, one trial) run on a
ThreadPoolExecutor; numpy and scipy release the GIL inside their kernels.
Results come back in input order, and the first failure is re-raised after
the remaining futures are cancelled.

Primary functions:
  - run_sweep(fn, params, threads): list of fn(p) in the order of params.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

from configs.defaults import THREADS


def run_sweep(fn: Callable, params: Iterable, threads: int = THREADS) -> list:
    params = list(params)
    if threads <= 1 or len(params) <= 1:
        return [fn(p) for p in params]

    workers = min(threads, len(params))
    logging.info(f"Running sweep of {len(params)} tasks on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(fn, p) for p in params]
        results = []
        for param, future in zip(params, futures):
            try:
                results.append(future.result())
            except Exception:
                logging.error(f"Sweep task failed for parameter {param!r}", exc_info=True)
                for pending in futures:
                    pending.cancel()
                raise
    return results
