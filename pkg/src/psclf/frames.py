"""Frame generation and deterministic, optionally parallel, frame loops."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterator

import numpy as np

from .channel import frame_rng, modulate, transmit
from .crc import build_message
from .polar_code import PartitionSpec, PolarCode, encode, insert_message


def draw_frame(code: PolarCode, partition: PartitionSpec, specs, ebn0_db: float, seed: int,
               index: int, noiseless: bool = False):
    """Random payload, per-partition CRCs, encoding and AWGN for frame ``index``.

    Returns ``(u, llr)`` where ``u`` is the transmitted input vector.
    """
    rng = frame_rng(seed, index)
    payload = rng.integers(0, 2, sum(partition.payload_lengths), dtype=np.uint8)
    u = insert_message(build_message(payload, partition, specs), code)
    llr = transmit(modulate(encode(u, code)), ebn0_db, code.rate, rng, noiseless)
    return u, llr


def _run_batch(task, args, first, count):
    return [task(args, first + k) for k in range(count)]


def iter_frames(task: Callable, args, max_frames: int, workers: int = 1,
                batch: int = 256) -> Iterator:
    """Yield ``task(args, i)`` for i = 0, 1, ... in index order.

    ``task`` must be a module-level function and ``args`` picklable when
    ``workers > 1``. The caller stops consuming whenever it likes; results
    never depend on the worker count.
    """
    if workers <= 1:
        for i in range(max_frames):
            yield task(args, i)
        return
    starts = range(0, max_frames, batch)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = []
        it = iter(starts)
        try:
            for _ in range(2 * workers):
                s = next(it, None)
                if s is None:
                    break
                pending.append(pool.submit(_run_batch, task, args, s, min(batch, max_frames - s)))
            while pending:
                for rec in pending.pop(0).result():
                    yield rec
                s = next(it, None)
                if s is not None:
                    pending.append(pool.submit(_run_batch, task, args, s,
                                               min(batch, max_frames - s)))
        finally:
            for fut in pending:
                fut.cancel()
