"""Polar code construction, message insertion and encoding.

Codes are described by their information set. The transform is the plain
Kronecker power of the 2x2 kernel in natural order (no bit reversal).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PolarCode:
    """An (N, K+C) CRC-aided polar code.

    ``K`` counts payload bits only; ``C`` counts all CRC bits. The
    information set holds ``K + C`` strictly increasing indices.
    """

    N: int
    K: int
    C: int
    info_set: np.ndarray
    frozen_set: np.ndarray = field(init=False, repr=False)
    frozen_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not _is_pow2(self.N):
            raise ValueError(f"N must be a power of two, got {self.N}")
        info = np.asarray(self.info_set, dtype=np.int64)
        if info.ndim != 1 or info.size != self.K + self.C:
            raise ValueError(
                f"information set must hold K+C={self.K + self.C} indices, got {info.size}")
        if info.size and (info[0] < 0 or info[-1] >= self.N):
            raise ValueError("information indices out of range")
        if np.any(np.diff(info) <= 0):
            raise ValueError("information set must be strictly increasing")
        mask = np.ones(self.N, dtype=np.bool_)
        mask[info] = False
        info.setflags(write=False)
        mask.setflags(write=False)
        frozen = np.flatnonzero(mask)
        frozen.setflags(write=False)
        object.__setattr__(self, "info_set", info)
        object.__setattr__(self, "frozen_mask", mask)
        object.__setattr__(self, "frozen_set", frozen)

    @property
    def n(self) -> int:
        return self.N.bit_length() - 1

    @property
    def rate(self) -> float:
        """Payload rate K/N (CRC bits count as overhead)."""
        return self.K / self.N

    @classmethod
    def construct(cls, N: int, K: int, C: int, design_snr_db: float) -> "PolarCode":
        info = construct_info_set(N, K + C, design_snr_db, rate=K / N)
        return cls(N, K, C, info)

    def __eq__(self, other):
        if not isinstance(other, PolarCode):
            return NotImplemented
        return (self.N, self.K, self.C) == (other.N, other.K, other.C) and \
            np.array_equal(self.info_set, other.info_set)

    def __hash__(self):
        return hash((self.N, self.K, self.C, self.info_set.tobytes()))


# --------------------------------------------------------------------------
# Gaussian-approximation density evolution

def _ln_phi(x: np.ndarray) -> np.ndarray:
    """Natural log of Chung's phi function, vectorised, x > 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    small = x <= 10.0
    xs = x[small]
    out[small] = -0.4527 * xs ** 0.86 + 0.0218
    xl = x[~small]
    out[~small] = 0.5 * np.log(np.pi / xl) - xl / 4.0 + np.log1p(-10.0 / (7.0 * xl))
    return out


def _check_node_mean(m: np.ndarray) -> np.ndarray:
    """Mean LLR of the degraded (check) channel: phi^-1(1 - (1 - phi(m))^2)."""
    ln_p = _ln_phi(m)
    target = ln_p + np.log(2.0 - np.exp(ln_p))
    lo = np.zeros_like(m)
    hi = m.copy()
    # phi is (nearly) decreasing; bisect in the log domain so large means do not underflow
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        above = _ln_phi(np.maximum(mid, 1e-300)) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def bit_channel_means(N: int, design_snr_db: float, rate: float) -> np.ndarray:
    """GA mean LLR of every synthetic bit channel, natural index order."""
    if not _is_pow2(N):
        raise ValueError(f"N must be a power of two, got {N}")
    sigma2 = 1.0 / (2.0 * rate * 10.0 ** (design_snr_db / 10.0))
    z = np.array([2.0 / sigma2])
    for _ in range(N.bit_length() - 1):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = _check_node_mean(z)
        nxt[1::2] = 2.0 * z
        z = nxt
    return z


def construct_info_set(N: int, K_total: int, design_snr_db: float,
                       rate: float | None = None) -> np.ndarray:
    """Return the ``K_total`` most reliable bit-channel indices, ascending.

    Reliability is the Gaussian-approximation mean LLR at ``design_snr_db``
    (Eb/N0). ``rate`` defaults to ``K_total / N``.
    """
    if not 1 <= K_total <= N:
        raise ValueError(f"K_total must lie in [1, {N}], got {K_total}")
    if rate is None:
        rate = K_total / N
    means = bit_channel_means(N, design_snr_db, rate)
    # stable: among equal means the higher index wins
    order = np.argsort(means, kind="stable")
    return np.sort(order[N - K_total:]).astype(np.int64)


# --------------------------------------------------------------------------
# information set files

def save_info_set(path, code: PolarCode) -> None:
    lines = [f"N={code.N} K={code.K} C={code.C}"]
    lines += [str(int(i)) for i in code.info_set]
    Path(path).write_text("\n".join(lines) + "\n")


def load_info_set(path) -> PolarCode:
    """Read a code from the ``N=<N> K=<K> C=<C>`` + one-index-per-line format."""
    text = Path(path).read_text().split("\n")
    header = text[0].split()
    try:
        fields = dict(tok.split("=", 1) for tok in header)
        N, K, C = int(fields["N"]), int(fields["K"]), int(fields["C"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: bad header {text[0]!r}") from exc
    idx = [int(s) for s in text[1:] if s.strip()]
    return PolarCode(N, K, C, np.array(idx, dtype=np.int64))


# --------------------------------------------------------------------------
# encoding

def polar_transform(u: np.ndarray) -> np.ndarray:
    """x = u . T2^{(x)n} over GF(2); works on the last axis of a batch."""
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    if not _is_pow2(N):
        raise ValueError(f"length must be a power of two, got {N}")
    lead = x.shape[:-1]
    h = 1
    while h < N:
        v = x.reshape(*lead, N // (2 * h), 2, h)
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


def encode(u: np.ndarray, code: PolarCode) -> np.ndarray:
    u = np.asarray(u)
    if u.shape[-1] != code.N:
        raise ValueError(f"input vector has length {u.shape[-1]}, expected {code.N}")
    return polar_transform(u)


def insert_message(m_prime: np.ndarray, code: PolarCode) -> np.ndarray:
    m_prime = np.asarray(m_prime, dtype=np.uint8)
    if m_prime.shape[-1] != code.K + code.C:
        raise ValueError(
            f"message has {m_prime.shape[-1]} bits, expected K+C={code.K + code.C}")
    u = np.zeros(m_prime.shape[:-1] + (code.N,), dtype=np.uint8)
    u[..., code.info_set] = m_prime
    return u


def extract_message(u: np.ndarray, code: PolarCode) -> np.ndarray:
    return np.asarray(u)[..., code.info_set]


# --------------------------------------------------------------------------
# partitions

@dataclass(frozen=True)
class PartitionSpec:
    """Partition boundaries and per-partition CRC lengths for a code.

    ``mu`` holds the last index of every partition (``mu[-1] == N - 1``).
    Partition ``p`` covers indices ``mu[p-1]+1 .. mu[p]``; its ``s[p]``
    non-frozen positions carry ``K_p = s[p] - crc_lengths[p]`` payload bits
    followed by ``crc_lengths[p]`` CRC bits.
    """

    code: PolarCode
    mu: tuple
    crc_lengths: tuple
    s: tuple = field(init=False)
    S: tuple = field(init=False)

    def __post_init__(self):
        code = self.code
        mu = tuple(int(m) for m in self.mu)
        crc = tuple(int(c) for c in self.crc_lengths)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "crc_lengths", crc)
        if not mu:
            raise ValueError("at least one partition is required")
        if len(crc) != len(mu):
            raise ValueError(f"{len(mu)} partitions but {len(crc)} CRC lengths")
        if mu[-1] != code.N - 1:
            raise ValueError(f"last boundary must be N-1={code.N - 1}, got {mu[-1]}")
        if any(b <= a for a, b in zip(mu, mu[1:])) or mu[0] < 0:
            raise ValueError(f"boundaries must be strictly increasing: {mu}")
        if any(c < 0 for c in crc):
            raise ValueError("CRC lengths must be non-negative")
        if sum(crc) != code.C:
            raise ValueError(f"CRC lengths sum to {sum(crc)}, code has C={code.C}")
        S = tuple(int(np.searchsorted(code.info_set, m, side="right")) for m in mu)
        s = tuple(b - a for a, b in zip((0,) + S[:-1], S))
        for p, (sp, cp) in enumerate(zip(s, crc)):
            if sp < 1:
                raise ValueError(f"partition {p + 1} holds no non-frozen bit")
            if sp <= cp:
                raise ValueError(
                    f"partition {p + 1} has {sp} non-frozen bits, too few for a {cp}-bit CRC")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "S", S)

    @classmethod
    def single(cls, code: PolarCode) -> "PartitionSpec":
        return cls(code, (code.N - 1,), (code.C,))

    @property
    def P(self) -> int:
        return len(self.mu)

    @property
    def payload_lengths(self) -> tuple:
        return tuple(sp - cp for sp, cp in zip(self.s, self.crc_lengths))

    def bounds(self, p: int) -> tuple:
        """(first, last) bit index of partition ``p`` (0-based)."""
        first = 0 if p == 0 else self.mu[p - 1] + 1
        return first, self.mu[p]

    def message_slice(self, p: int) -> slice:
        """Positions of partition ``p`` inside the (K+C)-bit message."""
        return slice(self.S[p] - self.s[p], self.S[p])
