"""BPSK over AWGN and channel LLRs."""

from __future__ import annotations

import numpy as np

NOISELESS_LLR = 300.0


def modulate(x: np.ndarray) -> np.ndarray:
    """Bit 0 -> +1.0, bit 1 -> -1.0."""
    return 1.0 - 2.0 * np.asarray(x, dtype=np.float64)


def hard_decision(values: np.ndarray) -> np.ndarray:
    """Sign demapper: negative -> 1, zero and positive -> 0."""
    return (np.asarray(values) < 0).astype(np.uint8)


def noise_variance(ebn0_db: float, rate: float) -> float:
    if rate <= 0 or rate > 1:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def transmit(symbols: np.ndarray, ebn0_db: float, rate: float,
             rng: np.random.Generator | None = None, noiseless: bool = False) -> np.ndarray:
    """Add white Gaussian noise and return LLRs ``2y / sigma^2``.

    With ``noiseless`` the LLRs are the symbols scaled to +-NOISELESS_LLR.
    """
    symbols = np.asarray(symbols, dtype=np.float64)
    sigma2 = noise_variance(ebn0_db, rate)
    if noiseless:
        return np.sign(symbols) * NOISELESS_LLR
    if rng is None:
        raise ValueError("an RNG stream is required unless noiseless")
    y = symbols + rng.normal(0.0, np.sqrt(sigma2), size=symbols.shape)
    return 2.0 * y / sigma2


def frame_rng(seed: int, frame: int) -> np.random.Generator:
    """Independent stream for one frame, keyed only by (seed, frame index)."""
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, frame]))
