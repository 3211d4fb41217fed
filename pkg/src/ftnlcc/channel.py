"""Discrete FTN channel y = Ha + w with zero-valued symbols outside the block."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pulse_shaping import TapSet


@dataclass(frozen=True)
class ReceivedBlock:
    samples: np.ndarray
    noise_sigma: float = 0.0

    def __len__(self) -> int:
        return len(self.samples)


def random_symbols(n: int, rng: np.random.Generator) -> np.ndarray:
    """Equiprobable BPSK symbols in {-1, +1}."""
    return 2.0 * rng.integers(0, 2, size=n) - 1.0


def bits_to_symbols(bits) -> np.ndarray:
    """Map bit 1 to +1 and bit 0 to -1."""
    return 2.0 * np.asarray(bits, dtype=float) - 1.0


def symbols_to_bits(symbols) -> np.ndarray:
    return (np.asarray(symbols) > 0).astype(np.uint8)


def transmit_noiseless(a, taps: TapSet) -> np.ndarray:
    """b_n = sum_l a_{n-l} h_l for n = 0..N-1, with a_k = 0 outside the block."""
    a = np.asarray(a, dtype=float)
    L = taps.half_width
    full = np.convolve(a, taps.taps)
    # full[k] corresponds to n = k - L
    return full[L : L + a.size]


def channel_matrix(taps: TapSet, n: int) -> np.ndarray:
    """Dense H with H[j, k] = h_{j-k}, so that H @ a equals ``transmit_noiseless``.

    For even-symmetric taps row j reads [h_{-j}, ..., h_0, ..., h_{N-j-1}].
    """
    H = np.zeros((n, n))
    for j in range(n):
        for k in range(n):
            H[j, k] = taps.tap(j - k)
    return H


def add_awgn(clean, sigma: float, rng: np.random.Generator) -> ReceivedBlock:
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    clean = np.asarray(clean, dtype=float)
    if sigma == 0:
        return ReceivedBlock(clean.copy(), 0.0)
    return ReceivedBlock(clean + sigma * rng.standard_normal(clean.size), float(sigma))


def sigma_from_ebn0(ebn0_db: float, code_rate: float = 1.0) -> float:
    """Per-sample noise std for unit-energy BPSK symbols, Eb = Es / code_rate."""
    if code_rate <= 0 or code_rate > 1:
        raise ValueError(f"code_rate must lie in (0, 1], got {code_rate}")
    return float(np.sqrt(1.0 / (2.0 * code_rate * 10.0 ** (ebn0_db / 10.0))))
