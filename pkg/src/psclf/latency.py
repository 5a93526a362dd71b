"""Cycle counts of a semi-parallel SC/SCL decoder and average flip-decoder times.

``phi`` processing elements handle a stage of ``2**s`` f/g operations in
``ceil(2**s / phi)`` cycles. SCL adds one cycle per information bit for path
sorting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LatencyParams:
    N: int
    phi: int
    info_size: int
    mu: tuple = ()
    s: tuple = ()

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 2, got {self.N}")
        if self.phi < 1:
            raise ValueError(f"phi must be >= 1, got {self.phi}")
        if not 0 <= self.info_size <= self.N:
            raise ValueError(f"info_size must lie in [0, N], got {self.info_size}")
        if len(self.mu) != len(self.s):
            raise ValueError("mu and s must have the same length")
        if self.mu and (self.mu[-1] != self.N - 1 or sum(self.s) != self.info_size):
            raise ValueError("partitions must end at N-1 and hold all information bits")

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @classmethod
    def from_partition(cls, partition, phi: int) -> "LatencyParams":
        code = partition.code
        return cls(code.N, phi, code.K + code.C, tuple(partition.mu), tuple(partition.s))


@dataclass(frozen=True)
class ExecTimeStats:
    """reach[p] = P(T_p), the share of frames decoded in partition p;
    tbar[p] = mean trials among frames that reached partition p."""

    reach: tuple
    tbar: tuple

    def __post_init__(self):
        r = np.asarray(self.reach, dtype=float)
        t = np.asarray(self.tbar, dtype=float)
        if r.size != t.size or r.size == 0:
            raise ValueError("reach and tbar must be non-empty and equally long")
        if abs(r[0] - 1.0) > 1e-12 or np.any(np.diff(r) > 1e-12) or np.any(r < 0):
            raise ValueError("reach must start at 1 and be non-increasing")
        if np.any((t < 1) & (r > 0)):
            raise ValueError("average trial counts must be >= 1")

    @classmethod
    def from_trials(cls, trials) -> "ExecTimeStats":
        """Build from a (frames, P) array of per-partition trial counts (0 = not reached)."""
        t = np.asarray(trials, dtype=float)
        if t.ndim != 2 or t.shape[0] == 0:
            raise ValueError("trials must be a non-empty (frames, P) array")
        reached = t > 0
        reach = reached.mean(axis=0)
        cnt = reached.sum(axis=0)
        tbar = np.where(cnt > 0, t.sum(axis=0) / np.maximum(cnt, 1), 1.0)
        return cls(tuple(reach), tuple(tbar))


def _stage_cycles(params: LatencyParams) -> np.ndarray:
    s = np.arange(params.n)
    return -(-(1 << s) // params.phi)


def sc_partial_latency(i: int, params: LatencyParams) -> int:
    """Cycles for the SC decoder to decide bits 0..i."""
    if not 0 <= i < params.N:
        raise ValueError(f"index {i} outside [0, {params.N})")
    c = _stage_cycles(params)
    s = np.arange(params.n)
    return int(c.sum() + (c * (i >> s)).sum())


def sc_latency_closed_form(N: int, phi: int) -> float:
    """2N + (N/phi) log2(N / (4 phi)); valid for N >= 4 phi."""
    return 2 * N + (N / phi) * np.log2(N / (4 * phi))


def sc_latency(params: LatencyParams) -> int:
    return sc_partial_latency(params.N - 1, params)


def scl_latency(params: LatencyParams) -> int:
    return sc_latency(params) + params.info_size


def scl_partial_latency(p: int, params: LatencyParams) -> int:
    """Cycles to reach the end of partition p (1-based); p = 0 gives 0."""
    if p == 0:
        return 0
    if not 1 <= p <= len(params.mu):
        raise ValueError(f"partition {p} outside 1..{len(params.mu)}")
    return int(sum(params.s[:p]) + sc_partial_latency(params.mu[p - 1], params))


def avg_exec_time_sclf(tbar: float, params: LatencyParams) -> float:
    if tbar < 1:
        raise ValueError(f"average trials must be >= 1, got {tbar}")
    return tbar * scl_latency(params)


def avg_exec_time_scf(tbar: float, params: LatencyParams) -> float:
    if tbar < 1:
        raise ValueError(f"average trials must be >= 1, got {tbar}")
    return tbar * sc_latency(params)


def avg_exec_time_psclf(stats: ExecTimeStats, params: LatencyParams) -> float:
    """Sum over partitions of P(T_p) * tbar_p * (L_SCL(mu_p) - L_SCL(mu_{p-1}))."""
    P = len(params.mu)
    if len(stats.reach) != P:
        raise ValueError(f"stats cover {len(stats.reach)} partitions, params {P}")
    total = 0.0
    for p in range(1, P + 1):
        span = scl_partial_latency(p, params) - scl_partial_latency(p - 1, params)
        total += stats.reach[p - 1] * stats.tbar[p - 1] * span
    return total


def ascl_attempt_latency(L: int, params: LatencyParams, sc_modules: int = 4) -> int:
    """One CRC-aided SCL attempt with ``sc_modules`` SC cores run in parallel.

    L paths take ceil(L / sc_modules) passes; sorting cycles apply when L > 1.
    """
    passes = -(-L // sc_modules)
    return passes * (sc_latency(params) + (params.info_size if L > 1 else 0))


def avg_exec_time_ascl(attempts, params: LatencyParams, sc_modules: int = 4) -> float:
    """Mean over frames of the summed attempt latencies.

    ``attempts`` is a sequence of per-frame list-size sequences actually tried.
    """
    attempts = list(attempts)
    if not attempts:
        raise ValueError("no frames")
    cache = {}
    total = 0
    for seq in attempts:
        for L in seq:
            if L not in cache:
                cache[L] = ascl_attempt_latency(L, params, sc_modules)
            total += cache[L]
    return total / len(attempts)
