"""Deterministic data-parallel evaluation over grid rows.

Work is split into contiguous row blocks whose boundaries depend only on the
row count and worker count; results are concatenated in block order, so the
output is independent of scheduling.  numpy releases the GIL in the heavy
array kernels, which makes a thread pool sufficient.
"""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_WORKERS = "HEIGHTLAB_WORKERS"


def default_workers():
    try:
        return max(1, int(os.environ.get(ENV_WORKERS, "1")))
    except ValueError:
        return 1


def row_blocks(n_rows, workers):
    workers = max(1, min(workers, n_rows))
    base, extra = divmod(n_rows, workers)
    blocks = []
    start = 0
    for i in range(workers):
        stop = start + base + (1 if i < extra else 0)
        blocks.append(slice(start, stop))
        start = stop
    return blocks


def map_chunks(fn, n_rows, workers=None):
    """[fn(slice) for each row block], evaluated on ``workers`` threads."""
    workers = default_workers() if workers is None else workers
    blocks = row_blocks(n_rows, workers)
    if len(blocks) == 1:
        return [fn(blocks[0])]
    with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
        return list(pool.map(fn, blocks))
