"""First-error CDF estimation and partition / CRC design.

The first-error index X of a frame is the first bit index at which no
surviving SCL path agrees with the transmitted input vector. Its CDF,
conditional on an error occurring, places the partition boundaries so that
each partition sees the same share of first errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .crc import crc_specs_for
from .frames import draw_frame, iter_frames
from .polar_code import PartitionSpec, PolarCode
from .scl import SclDecoder


@dataclass(frozen=True)
class EmpiricalCdf:
    """F(k) = P(X <= k | an error occurred) over k = 0 .. N-1."""

    F: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        F = np.asarray(self.F, dtype=np.float64)
        if F.ndim != 1 or F.size < 1:
            raise ValueError("CDF must be a non-empty 1-D array")
        if np.any(np.diff(F) < -1e-12) or F[0] < 0 or abs(F[-1] - 1.0) > 1e-9:
            raise ValueError("CDF must be non-decreasing from >= 0 up to F(N-1) = 1")
        F = np.clip(F, 0.0, 1.0)
        F.setflags(write=False)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def N(self) -> int:
        return self.F.size

    def __call__(self, k):
        return self.F[k]

    def crossing(self, q: float) -> int:
        """Smallest k with F(k) >= q."""
        return int(np.searchsorted(self.F, q - 1e-12, side="left"))

    @classmethod
    def from_events(cls, events, size: int, **metadata) -> "EmpiricalCdf":
        events = np.asarray(events, dtype=np.int64)
        if events.size == 0:
            raise ValueError("no error events")
        counts = np.bincount(events, minlength=size)[:size]
        metadata.setdefault("events", int(events.size))
        return cls(np.cumsum(counts) / events.size, metadata)


# --------------------------------------------------------------------------
# estimation

_DECODERS: dict = {}


def _first_error_task(args, index):
    code, partition, specs, L, ebn0_db, seed = args
    dec = _DECODERS.get((code, L))
    if dec is None:
        dec = _DECODERS[(code, L)] = SclDecoder(code, L)
    u, llr = draw_frame(code, partition, specs, ebn0_db, seed, index)
    dec.reset(llr, genie=u)
    dec.run(code.N - 1, stop_on_divergence=True)
    return dec.first_divergence


def estimate_first_error_cdf(code: PolarCode, L: int, ebn0_db: float, min_events: int = 2000,
                             seed: int = 0, max_frames: int = 10**7, workers: int = 1,
                             partition: PartitionSpec | None = None) -> EmpiricalCdf:
    """Genie-aided Monte Carlo estimate of the first-error CDF of plain SCL.

    Frames are simulated in index order until ``min_events`` frames have
    had every path leave the transmitted prefix. Raises RuntimeError if
    ``max_frames`` runs out first (e.g. on a noiseless channel).
    """
    if min_events < 100:
        raise ValueError(f"min_events must be at least 100, got {min_events}")
    partition = partition or PartitionSpec.single(code)
    specs = crc_specs_for(partition)
    args = (code, partition, specs, L, ebn0_db, seed)
    events = []
    frames = 0
    for x in iter_frames(_first_error_task, args, max_frames, workers):
        frames += 1
        if x >= 0:
            events.append(x)
            if len(events) >= min_events:
                break
    if len(events) < min_events:
        raise RuntimeError(
            f"only {len(events)} first-error events in {frames} frames (need {min_events})")
    return EmpiricalCdf.from_events(events, code.N, N=code.N, K=code.K, C=code.C, L=L,
                                    ebn0_db=ebn0_db, frames=frames, seed=seed)


# --------------------------------------------------------------------------
# persistence

def save_cdf(path, cdf: EmpiricalCdf) -> None:
    """Two-column text file (index, F) with a ``# key=value`` header line."""
    head = " ".join(f"{k}={v}" for k, v in cdf.metadata.items())
    np.savetxt(Path(path), np.column_stack([np.arange(cdf.N), cdf.F]),
               fmt=["%d", "%.10g"], header=head)


def _parse_value(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def load_cdf(path, N: int | None = None) -> EmpiricalCdf:
    """Read a CDF file. Rows may be sparse; F holds its value up to the next row.

    Indices before the first row get F = 0. ``N`` defaults to the header's
    ``N`` entry or to the last index + 1.
    """
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = _parse_value(v)
            continue
        k, f = line.split()[:2]
        rows.append((int(k), float(f)))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    idx = np.array([r[0] for r in rows])
    val = np.array([r[1] for r in rows])
    if np.any(np.diff(idx) <= 0):
        raise ValueError(f"{path}: indices must be strictly increasing")
    N = int(N or meta.get("N", idx[-1] + 1))
    if idx[-1] >= N:
        raise ValueError(f"{path}: index {idx[-1]} outside [0, {N})")
    pos = np.searchsorted(idx, np.arange(N), side="right") - 1
    F = np.where(pos >= 0, val[np.maximum(pos, 0)], 0.0)
    meta["N"] = N
    return EmpiricalCdf(F, meta)


# --------------------------------------------------------------------------
# partition design

def _enforce_nonempty(mu, code: PolarCode | None):
    """Push boundaries right until every partition holds a non-frozen bit."""
    N = mu[-1] + 1
    out = []
    prev = -1
    for m in mu:
        if code is not None:
            nxt = code.info_set[np.searchsorted(code.info_set, prev, side="right"):]
            if nxt.size == 0:
                raise ValueError("not enough non-frozen bits for the requested partitions")
            m = max(m, int(nxt[0]))
        else:
            m = max(m, prev + 1)
        out.append(m)
        prev = m
    if out[-1] != N - 1 or any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError(f"cannot place {len(mu)} non-empty partitions: {out}")
    return tuple(out)


def design_partitions(cdf: EmpiricalCdf, P: int, code: PolarCode | None = None) -> tuple:
    """Boundaries with F(mu_p - 1) < p/P <= F(mu_p); the last one is N-1.

    With ``code`` given, a boundary leaving a partition without non-frozen
    bits moves right to the next information index.
    """
    if P < 1:
        raise ValueError("P must be at least 1")
    if code is not None and code.N != cdf.N:
        raise ValueError(f"CDF has N={cdf.N}, code has N={code.N}")
    steps = np.unique(cdf.F[cdf.F > 0]).size
    if P > steps:
        raise ValueError(f"P={P} exceeds the {steps} distinct CDF levels")
    mu = [cdf.crossing(p / P) for p in range(1, P)] + [cdf.N - 1]
    return _enforce_nonempty(mu, code)


def partition_error_probs(cdf: EmpiricalCdf, mu) -> np.ndarray:
    """P(e_p) = F(mu_p) - F(mu_{p-1}) with F(mu_0) = 0; sums to one."""
    mu = [int(m) for m in mu]
    if not mu or mu[-1] != cdf.N - 1:
        raise ValueError(f"last boundary must be N-1={cdf.N - 1}")
    edges = np.concatenate([[0.0], cdf.F[mu]])
    return np.diff(edges)


def design_partitions_uniform(code: PolarCode, P: int) -> tuple:
    """Equal non-frozen counts per partition; the remainder goes to the last one."""
    if P < 1:
        raise ValueError("P must be at least 1")
    total = code.K + code.C
    if P > total:
        raise ValueError(f"P={P} exceeds the {total} non-frozen bits")
    s = total // P
    return tuple(int(code.info_set[s * (p + 1) - 1]) for p in range(P - 1)) + (code.N - 1,)
