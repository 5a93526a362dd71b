"""SC and LLR-based SCL decoding.

:class:`SclDecoder` keeps the list state between calls so a frame can be
decoded segment by segment, snapshotted at partition boundaries and rolled
back for flip retrials. Path metrics use the hardware penalty rule (add
``|llr|`` when the decision contradicts the leaf hard decision) and
``f`` is min-sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .crc import partition_crc_flags
from .polar_code import PartitionSpec, PolarCode

pm_update = K.pm_update


def scl_step_sort(pms, L: int, flip: bool = False):
    """Select L survivors out of 2L candidate path metrics.

    Returns ``(kept, record)`` where ``kept`` holds candidate indices in
    ascending metric order and ``record`` is ``(pm_best, pm_lth)``: the best
    metric and the best discarded one. Ties go to the lower index.
    """
    pms = np.asarray(pms, dtype=np.float64)
    if pms.size != 2 * L:
        raise ValueError(f"expected {2 * L} candidates, got {pms.size}")
    kept, best, lth = K.scl_step_sort(pms, L, bool(flip))
    return kept, (float(best), float(lth))


def sc_decode(frame: np.ndarray, code: PolarCode, flip_index: int = -1,
              return_leaves: bool = False):
    """Successive cancellation; ``flip_index`` inverts one decision."""
    frame = np.ascontiguousarray(frame, dtype=np.float64)
    if frame.shape != (code.N,):
        raise ValueError(f"frame has shape {frame.shape}, expected ({code.N},)")
    u_hat = np.zeros(code.N, dtype=np.uint8)
    leaf = np.zeros(code.N)
    K.sc_decode_kernel(frame, code.frozen_mask, flip_index, u_hat, leaf)
    if return_leaves:
        return u_hat, leaf
    return u_hat


@dataclass(frozen=True)
class SortRecords:
    """Per-index sort statistics: ``pm_best = PM_i[0]``, ``pm_lth = PM_i[L]``."""

    index: np.ndarray
    pm_best: np.ndarray
    pm_lth: np.ndarray

    def __len__(self):
        return self.index.size

    def restrict(self, first: int, last: int) -> "SortRecords":
        sel = (self.index >= first) & (self.index <= last)
        return SortRecords(self.index[sel], self.pm_best[sel], self.pm_lth[sel])


@dataclass(frozen=True)
class DecoderSnapshot:
    """Opaque copy of a full list state (all L paths and the position)."""

    position: int
    arrays: tuple


@dataclass(frozen=True)
class SegmentResult:
    slots: np.ndarray        # active path slots, ascending
    u_hat: np.ndarray        # (paths, last+1) decisions of those slots
    pm: np.ndarray           # path metrics of those slots
    crc_pass: np.ndarray     # CRC of the decoded partition per path
    records: SortRecords


_STATE = ("alpha", "beta", "aptr", "bptr", "arefc", "brefc", "pm", "active",
          "onpath", "meta", "dec", "par", "rec_best", "rec_lth")


class SclDecoder:
    """List decoder with resumable state.

    Not thread-safe; use one instance per worker.
    """

    def __init__(self, code: PolarCode, L: int):
        if L < 1 or L & (L - 1):
            raise ValueError(f"list size must be a power of two, got {L}")
        self.code = code
        self.L = L
        N, n = code.N, code.n
        self.alpha = np.zeros((L, 2 * N))
        self.beta = np.zeros((L, 2 * N), dtype=np.uint8)
        self.aptr = np.zeros((L, n + 1), dtype=np.int64)
        self.bptr = np.zeros((L, n + 1), dtype=np.int64)
        self.arefc = np.zeros((n + 1, L), dtype=np.int64)
        self.brefc = np.zeros((n + 1, L), dtype=np.int64)
        self.pm = np.zeros(L)
        self.active = np.zeros(L, dtype=np.bool_)
        self.onpath = np.zeros(L, dtype=np.bool_)
        self.meta = np.zeros(3, dtype=np.int64)
        self.dec = np.zeros((N, L), dtype=np.uint8)
        self.par = np.zeros((N, L), dtype=np.int64)
        self.rec_best = np.full(N, np.nan)
        self.rec_lth = np.full(N, np.nan)
        self.channel = np.zeros(N)
        self.genie = np.zeros(N, dtype=np.uint8)
        self.use_genie = False

    # -- state ---------------------------------------------------------------
    def reset(self, frame: np.ndarray, genie: np.ndarray | None = None) -> None:
        frame = np.asarray(frame, dtype=np.float64)
        if frame.shape != (self.code.N,):
            raise ValueError(f"frame has shape {frame.shape}, expected ({self.code.N},)")
        self.channel[:] = frame
        self.use_genie = genie is not None
        if genie is not None:
            self.genie[:] = genie
        K.init_state(self.L, self.code.N, self.code.n, self.aptr, self.bptr, self.arefc,
                     self.brefc, self.pm, self.active, self.onpath, self.meta)

    @property
    def position(self) -> int:
        return int(self.meta[0])

    @property
    def first_divergence(self) -> int:
        """First index where every path left the genie path, -1 if none yet."""
        return int(self.meta[2])

    def snapshot(self) -> DecoderSnapshot:
        return DecoderSnapshot(self.position, tuple(getattr(self, a).copy() for a in _STATE))

    def restore(self, snap: DecoderSnapshot) -> None:
        for name, arr in zip(_STATE, snap.arrays):
            getattr(self, name)[...] = arr

    # -- decoding ------------------------------------------------------------
    def run(self, stop: int, flip_index: int = -1, stop_on_divergence: bool = False) -> None:
        if stop < self.position - 1 or stop >= self.code.N:
            raise ValueError(f"cannot decode through {stop} from position {self.position}")
        K.scl_run(self.channel, self.code.frozen_mask, stop, self.L, flip_index, self.genie,
                  self.use_genie, stop_on_divergence, self.alpha, self.beta, self.aptr,
                  self.bptr, self.arefc, self.brefc, self.pm, self.active, self.onpath,
                  self.meta, self.dec, self.par, self.rec_best, self.rec_lth)

    def slots(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    def paths(self, last: int | None = None) -> np.ndarray:
        """Decisions u_0..u_last of every active path (rows ordered by slot)."""
        if last is None:
            last = self.position - 1
        tb = K.traceback(self.dec, self.par, self.active, last)
        return tb[self.active]

    def records(self, first: int = 0, last: int | None = None) -> SortRecords:
        if last is None:
            last = self.position - 1
        idx = np.arange(first, last + 1)
        sel = ~np.isnan(self.rec_best[first:last + 1])
        idx = idx[sel]
        return SortRecords(idx, self.rec_best[idx].copy(), self.rec_lth[idx].copy())

    def decode_segment(self, partition: PartitionSpec, p: int, crc_specs,
                       directive: int | None = None) -> SegmentResult:
        """Decode partition ``p`` from the current position (check-and-keep)."""
        first, last = partition.bounds(p)
        if self.position != first:
            raise ValueError(f"decoder is at {self.position}, partition {p} starts at {first}")
        if directive is not None and not first <= directive <= last:
            raise ValueError(f"flip index {directive} outside partition [{first}, {last}]")
        self.run(last, -1 if directive is None else directive)
        u = self.paths(last)
        msg = u[:, self.code.info_set[:partition.S[p]]]
        flags = partition_crc_flags(msg, partition, crc_specs, p)
        slots = self.slots()
        return SegmentResult(slots, u, self.pm[slots].copy(), flags,
                             self.records(first, last))


def scl_decode_segment(snapshot, frame, code, partition, p, L, crc_specs, directive=None,
                       decoder: SclDecoder | None = None):
    """Functional form of :meth:`SclDecoder.decode_segment`.

    ``snapshot`` is a :class:`DecoderSnapshot` taken at the partition start,
    or None for a fresh decoder at index 0. Returns ``(result, snapshot)``
    with the snapshot taken at the end of the segment.
    """
    dec = decoder if decoder is not None else SclDecoder(code, L)
    dec.reset(frame)
    if snapshot is not None:
        dec.restore(snapshot)
    res = dec.decode_segment(partition, p, crc_specs, directive)
    return res, dec.snapshot()


def select_output(u_hat: np.ndarray, pm: np.ndarray, crc_flags: np.ndarray):
    """Row index of the minimum-PM path passing every CRC, or None.

    ``crc_flags`` is (paths, P) or (paths,) booleans.
    """
    flags = np.asarray(crc_flags, dtype=bool)
    if flags.ndim == 2:
        flags = flags.all(axis=1)
    ok = np.flatnonzero(flags)
    if ok.size == 0:
        return None
    return int(ok[np.argmin(np.asarray(pm)[ok])])
