"""Trial-level decoders built on the SC/SCL kernels: SCL, SCF, SCLF, PSCLF, ASCL.

Every decoder returns a :class:`DecodeOutcome`. When the transmitted input
vector is supplied (``genie_u``) the outcome also carries the frame-error
flag and per-partition CRC-collision flags; the decoders themselves never
look at it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crc import crc_specs_for, partition_crc_flags
from .polar_code import PartitionSpec, PolarCode
from .scl import SclDecoder, SortRecords, sc_decode, select_output


@dataclass(frozen=True)
class FlipConfig:
    T_max: int = 15
    alpha: float = 1.2

    def __post_init__(self):
        if self.T_max < 1:
            raise ValueError(f"T_max must be >= 1, got {self.T_max}")
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")


@dataclass(frozen=True)
class DecodeOutcome:
    """Result of decoding one frame.

    ``trials[p]`` counts SCL (or SC) passes spent on partition ``p``,
    including the first one; partitions never reached hold 0.
    ``terminated_at`` is the 0-based partition where decoding gave up, or
    None when the end of the frame was reached.
    """

    success: bool
    u_hat: np.ndarray | None
    trials: tuple
    terminated_at: int | None = None
    collision: tuple = ()
    frame_error: bool | None = None
    attempts: tuple = ()

    @property
    def status(self) -> str:
        return "success" if self.success else "failure"


def compute_flip_metric(pm_best, pm_lth, alpha: float):
    """FM = -PM[0] + alpha * PM[L]; lower means a likelier wrong sort."""
    return -np.asarray(pm_best, dtype=np.float64) + alpha * np.asarray(pm_lth, dtype=np.float64)


def build_flip_set(records: SortRecords, alpha: float, T_max: int) -> np.ndarray:
    """Indices of the ``T_max - 1`` lowest flip metrics, ascending by metric.

    Equal metrics are ordered by bit index.
    """
    if len(records) == 0 or T_max <= 1:
        return np.zeros(0, dtype=np.int64)
    fm = compute_flip_metric(records.pm_best, records.pm_lth, alpha)
    order = np.lexsort((records.index, fm))
    return records.index[order[:T_max - 1]].astype(np.int64)


# --------------------------------------------------------------------------
# helpers

def _messages(u: np.ndarray, code: PolarCode, upto: int) -> np.ndarray:
    return u[:, code.info_set[:upto]]


def _all_flags(msg: np.ndarray, partition: PartitionSpec, specs) -> np.ndarray:
    return np.stack([partition_crc_flags(msg, partition, specs, p)
                     for p in range(partition.P)], axis=1)


def _collision(msg_rows, passing, true_msg, partition, p) -> bool:
    """Some path passed CRC_p but none of the passing ones carries the true segment."""
    if true_msg is None or not passing.any():
        return False
    sl = partition.message_slice(p)
    return not (msg_rows[passing][:, sl] == true_msg[sl]).all(axis=1).any()


def _finish(u_hat, success, trials, terminated_at, collision, genie_u, attempts=()):
    if genie_u is None:
        err = not success
    else:
        err = (not success) or not np.array_equal(u_hat, genie_u)
    return DecodeOutcome(success, u_hat, tuple(trials), terminated_at, tuple(collision),
                         bool(err), tuple(attempts))


def _specs(partition, crc_specs):
    return crc_specs if crc_specs is not None else crc_specs_for(partition)


# --------------------------------------------------------------------------
# decoders

def scl_decode(frame, code: PolarCode, L: int, partition: PartitionSpec | None = None,
               crc_specs=None, genie_u=None, decoder: SclDecoder | None = None) -> DecodeOutcome:
    """CRC-aided SCL: the lowest-metric path passing every partition CRC."""
    partition = partition or PartitionSpec.single(code)
    specs = _specs(partition, crc_specs)
    dec = decoder or SclDecoder(code, L)
    dec.reset(frame)
    dec.run(code.N - 1)
    u = dec.paths()
    msg = _messages(u, code, code.K + code.C)
    flags = _all_flags(msg, partition, specs)
    k = select_output(u, dec.pm[dec.slots()], flags)
    true_msg = None if genie_u is None else np.asarray(genie_u)[code.info_set]
    coll = [_collision(msg, flags[:, p], true_msg, partition, p) for p in range(partition.P)]
    return _finish(None if k is None else u[k], k is not None, [1] * partition.P, None,
                   coll, genie_u)


def sclf_decode(frame, code: PolarCode, L: int, config: FlipConfig,
                crc_specs=None, genie_u=None, decoder: SclDecoder | None = None) -> DecodeOutcome:
    """SCL flip decoding of a single-CRC code; every retrial restarts from index 0."""
    partition = PartitionSpec.single(code)
    specs = _specs(partition, crc_specs)
    dec = decoder or SclDecoder(code, L)
    true_msg = None if genie_u is None else np.asarray(genie_u)[code.info_set]
    flips = None
    t = 0
    while True:
        dec.reset(frame)
        dec.run(code.N - 1, -1 if t == 0 else int(flips[t - 1]))
        t += 1
        u = dec.paths()
        msg = _messages(u, code, code.K + code.C)
        ok = partition_crc_flags(msg, partition, specs, 0)
        if ok.any():
            k = select_output(u, dec.pm[dec.slots()], ok)
            coll = _collision(msg, ok, true_msg, partition, 0)
            return _finish(u[k], True, [t], None, [coll], genie_u)
        if flips is None:
            flips = build_flip_set(dec.records(), config.alpha, config.T_max)
        if t > flips.size:
            return _finish(None, False, [t], 0, [False], genie_u)


def psclf_decode(frame, code: PolarCode, partition: PartitionSpec, L: int, config: FlipConfig,
                 crc_specs=None, genie_u=None,
                 decoder: SclDecoder | None = None) -> DecodeOutcome:
    """Partitioned SCL flip decoding with check-and-keep and early termination.

    Each partition gets up to ``T_max`` SCL passes restarted from the
    snapshot taken at its first index. Flip candidates come from the
    partition's own first pass. All L paths move on as soon as one of them
    satisfies the partition CRC.
    """
    specs = _specs(partition, crc_specs)
    dec = decoder or SclDecoder(code, L)
    dec.reset(frame)
    true_msg = None if genie_u is None else np.asarray(genie_u)[code.info_set]
    P = partition.P
    trials = [0] * P
    coll = [False] * P
    for p in range(P):
        first, last = partition.bounds(p)
        snap = dec.snapshot() if config.T_max > 1 else None
        res = dec.decode_segment(partition, p, specs)
        trials[p] = 1
        if not res.crc_pass.any():
            flips = build_flip_set(res.records, config.alpha, config.T_max)
            for idx in flips:
                dec.restore(snap)
                res = dec.decode_segment(partition, p, specs, directive=int(idx))
                trials[p] += 1
                if res.crc_pass.any():
                    break
        if not res.crc_pass.any():
            return _finish(None, False, trials, p, coll, genie_u)
        msg = _messages(res.u_hat, code, partition.S[p])
        coll[p] = _collision(msg, res.crc_pass, true_msg, partition, p)
    u = dec.paths()
    msg = _messages(u, code, code.K + code.C)
    flags = _all_flags(msg, partition, specs)
    k = select_output(u, dec.pm[dec.slots()], flags)
    if k is None:
        # every path carries at least one failed earlier checkpoint
        return _finish(None, False, trials, None, coll, genie_u)
    return _finish(u[k], True, trials, None, coll, genie_u)


def scf_decode(frame, code: PolarCode, T_max: int, partition: PartitionSpec | None = None,
               crc_specs=None, genie_u=None) -> DecodeOutcome:
    """SC flip: retrials invert one of the T_max-1 least reliable information decisions."""
    partition = partition or PartitionSpec.single(code)
    specs = _specs(partition, crc_specs)
    true_msg = None if genie_u is None else np.asarray(genie_u)[code.info_set]
    u, leaf = sc_decode(frame, code, return_leaves=True)
    flips = None
    t = 1
    while True:
        msg = u[code.info_set][None, :]
        flags = _all_flags(msg, partition, specs)
        if flags.all():
            coll = [_collision(msg, flags[:, p], true_msg, partition, p)
                    for p in range(partition.P)]
            return _finish(u, True, [t] * partition.P, None, coll, genie_u)
        if flips is None:
            info = code.info_set
            order = np.lexsort((info, np.abs(leaf[info])))
            flips = info[order[:max(T_max - 1, 0)]]
        if t > flips.size:
            return _finish(None, False, [t] * partition.P, 0, [False] * partition.P, genie_u)
        u = sc_decode(frame, code, flip_index=int(flips[t - 1]))
        t += 1


def ascl_decode(frame, code: PolarCode, L_schedule=(1, 2, 4, 8, 16),
                partition: PartitionSpec | None = None, crc_specs=None, genie_u=None,
                decoders: dict | None = None) -> DecodeOutcome:
    """Adaptive SCL: retry with the next list size until the CRC passes."""
    sched = tuple(int(x) for x in L_schedule)
    if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
        raise ValueError(f"list-size schedule must be ascending: {sched}")
    partition = partition or PartitionSpec.single(code)
    specs = _specs(partition, crc_specs)
    decoders = {} if decoders is None else decoders
    tried = []
    out = None
    for L in sched:
        dec = decoders.get(L)
        if dec is None:
            dec = decoders[L] = SclDecoder(code, L)
        out = scl_decode(frame, code, L, partition, specs, genie_u, dec)
        tried.append(L)
        if out.success:
            break
    return DecodeOutcome(out.success, out.u_hat, out.trials,
                         None if out.success else 0, out.collision,
                         out.frame_error, tuple(tried))
