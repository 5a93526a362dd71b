"""Per-partition CRC encoding, checking and CRC-bit allocation.

CRCs here are plain GF(2) polynomial division: zero initial value, no
reflection, no final XOR. That keeps the remainder linear in the payload, so
checking a batch of candidate segments reduces to one matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# generator polynomials without the leading x^C term
DEFAULT_GENERATORS = {
    3: 0x3,
    7: 0x09,
    8: 0x07,
    10: 0x233,
    11: 0x621,
    16: 0x1021,
    32: 0x04C11DB7,
}


@dataclass(frozen=True)
class CrcSpec:
    """CRC of ``length`` bits with generator ``x^length + poly``."""

    length: int
    poly: int = -1

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("CRC length must be non-negative")
        if self.poly == -1:
            if self.length == 0:
                object.__setattr__(self, "poly", 0)
            elif self.length in DEFAULT_GENERATORS:
                object.__setattr__(self, "poly", DEFAULT_GENERATORS[self.length])
            else:
                raise ValueError(
                    f"no default generator for a {self.length}-bit CRC; pass poly explicitly")
        if self.poly >> self.length if self.length else self.poly:
            raise ValueError(f"generator 0x{self.poly:x} has degree >= {self.length}")

    @property
    def generator(self) -> np.ndarray:
        """Full generator coefficients, highest degree first (leading 1 included)."""
        g = (1 << self.length) | self.poly
        return np.array([(g >> k) & 1 for k in range(self.length, -1, -1)], dtype=np.uint8)


def _remainder(bits: np.ndarray, spec: CrcSpec) -> np.ndarray:
    """Remainder of bits(x) * x^C divided by g(x)."""
    c = spec.length
    bits = np.asarray(bits, dtype=np.uint8) & 1
    if c == 0:
        return np.zeros(0, dtype=np.uint8)
    H = _parity_matrix(bits.size, c, spec.poly)[:bits.size]
    return ((bits.astype(np.int64) @ H.astype(np.int64)) & 1).astype(np.uint8)


def crc_append(payload, spec: CrcSpec) -> np.ndarray:
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.size == 0:
        raise ValueError("payload must be non-empty")
    return np.concatenate([payload, _remainder(payload, spec)])


def crc_check(segment, spec: CrcSpec) -> bool:
    """True iff ``segment`` (payload followed by CRC) is a multiple of g(x)."""
    segment = np.asarray(segment, dtype=np.uint8)
    c = spec.length
    if segment.size <= c:
        raise ValueError(f"segment of {segment.size} bits is too short for a {c}-bit CRC")
    if c == 0:
        return True
    return bool(np.array_equal(_remainder(segment[:-c], spec), segment[-c:]))


@lru_cache(maxsize=256)
def _parity_matrix(payload_len: int, length: int, poly: int) -> np.ndarray:
    # row j = CRC of the j-th unit payload = x^(payload_len-1-j+C) mod g
    H = np.zeros((payload_len + length, length), dtype=np.uint8)
    if length == 0:
        return H
    mask = (1 << length) - 1
    r = poly  # x^C mod g
    rows = []
    for _ in range(payload_len):
        rows.append(r)
        top = (r >> (length - 1)) & 1
        r = ((r << 1) & mask) ^ (poly if top else 0)
    rows.reverse()
    for j, v in enumerate(rows):
        H[j] = [(v >> k) & 1 for k in range(length - 1, -1, -1)]
    H[payload_len:] = np.eye(length, dtype=np.uint8)
    H.setflags(write=False)
    return H


def parity_matrix(segment_len: int, spec: CrcSpec) -> np.ndarray:
    """Matrix H with ``segment @ H == 0 (mod 2)`` exactly for valid segments."""
    return _parity_matrix(segment_len - spec.length, spec.length, spec.poly)


def crc_check_batch(segments: np.ndarray, spec: CrcSpec) -> np.ndarray:
    """Vectorised :func:`crc_check` over the rows of ``segments``."""
    segments = np.atleast_2d(np.asarray(segments, dtype=np.uint8))
    if spec.length == 0:
        return np.ones(segments.shape[0], dtype=bool)
    H = parity_matrix(segments.shape[1], spec)
    syn = (segments.astype(np.int64) @ H.astype(np.int64)) & 1
    return ~syn.any(axis=1)


# --------------------------------------------------------------------------
# CRC structures

def parse_crc_structure(text: str) -> tuple:
    """Parse the comma list syntax, e.g. ``"7,7,7,11"``."""
    try:
        out = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ValueError(f"bad CRC structure {text!r}") from exc
    if not out or any(c < 0 for c in out):
        raise ValueError(f"bad CRC structure {text!r}")
    return out


def allocate_crc_structure(C_total: int, P: int, error_probs, floor: int) -> tuple:
    """Give every partition ``floor`` bits and the remainder to the most error-prone one.

    Ties on the maximal probability go to the last such partition.
    """
    if P < 1:
        raise ValueError("P must be at least 1")
    if C_total < P * floor:
        raise ValueError(f"cannot give {floor} bits to each of {P} partitions with C={C_total}")
    probs = np.asarray(error_probs, dtype=np.float64)
    if probs.size != P:
        raise ValueError(f"{probs.size} probabilities for {P} partitions")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError(f"error probabilities sum to {probs.sum()}, expected 1")
    out = [floor] * P
    best = P - 1 - int(np.argmax(probs[::-1]))
    out[best] += C_total - P * floor
    return tuple(out)


# --------------------------------------------------------------------------
# partition-level helpers

def crc_specs_for(partition, generators: dict | None = None) -> tuple:
    gens = dict(DEFAULT_GENERATORS)
    if generators:
        gens.update(generators)
    specs = []
    for c in partition.crc_lengths:
        if c and c not in gens:
            raise ValueError(f"no generator configured for a {c}-bit CRC")
        specs.append(CrcSpec(c, gens[c] if c else 0))
    return tuple(specs)


def build_message(payload, partition, specs) -> np.ndarray:
    """Lay out m' as K_1 payload, C_1 CRC, K_2 payload, ... (K bits in, K+C out)."""
    payload = np.asarray(payload, dtype=np.uint8)
    kp = partition.payload_lengths
    if payload.size != sum(kp):
        raise ValueError(f"payload has {payload.size} bits, expected {sum(kp)}")
    parts = []
    start = 0
    for k, spec in zip(kp, specs):
        parts.append(crc_append(payload[start:start + k], spec))
        start += k
    return np.concatenate(parts)


def partition_crc_flags(messages: np.ndarray, partition, specs, p: int) -> np.ndarray:
    """CRC_p pass/fail for each row of a (paths, >= S_p) message-bit array."""
    seg = np.asarray(messages)[:, partition.message_slice(p)]
    return crc_check_batch(seg, specs[p])
