"""Rate-1/2 convolutional code and soft-decision Viterbi decoding.

Generators are read in the usual octal convention: the most significant of
the K bits taps the current input, so 171 -> 1111001 and 133 -> 1011011.
LLRs follow ln P(bit = 1) / P(bit = 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConvCode:
    constraint_length: int = 7
    generators: tuple[int, ...] = (0o171, 0o133)
    terminated: bool = True

    def __post_init__(self):
        if len(self.generators) != 2:
            raise ValueError("only rate-1/2 codes are supported")
        for g in self.generators:
            if not 0 < g < (1 << self.constraint_length):
                raise ValueError(f"generator {g:o} does not fit K={self.constraint_length}")

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    @property
    def rate(self) -> float:
        return 0.5

    def coded_length(self, n_info: int) -> int:
        return 2 * (n_info + (self.memory if self.terminated else 0))

    def info_length(self, n_coded: int) -> int:
        """Largest info length whose terminated codeword fits in ``n_coded`` bits."""
        return n_coded // 2 - (self.memory if self.terminated else 0)


def _parity(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    p = np.zeros_like(x)
    while np.any(x):
        p ^= x & 1
        x = x >> 1
    return p


def _trellis(code: ConvCode):
    """Per (state, input): next state and the two output bits.

    State holds the previous K-1 inputs, most recent in the most significant bit.
    """
    m = code.memory
    states = np.arange(code.n_states)
    nxt = np.empty((code.n_states, 2), dtype=np.int64)
    out = np.empty((code.n_states, 2, 2), dtype=np.int64)
    for b in (0, 1):
        reg = (b << m) | states
        nxt[:, b] = reg >> 1
        for k, g in enumerate(code.generators):
            out[:, b, k] = _parity(reg & g)
    return nxt, out


def conv_encode(info, code: ConvCode = ConvCode()) -> np.ndarray:
    bits = np.asarray(info, dtype=np.int64).ravel()
    if bits.size == 0:
        raise ValueError("empty input")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("input must be binary")
    if code.terminated:
        bits = np.concatenate([bits, np.zeros(code.memory, dtype=np.int64)])
    nxt, out = _trellis(code)
    coded = np.empty((bits.size, 2), dtype=np.uint8)
    state = 0
    for t, b in enumerate(bits):
        coded[t] = out[state, b]
        state = nxt[state, b]
    return coded.ravel()


def viterbi_decode(llrs, code: ConvCode = ConvCode()) -> np.ndarray:
    """Maximum-likelihood info bits for the given coded-bit LLRs.

    Branch metric is the sum of +llr/2 for hypothesized 1s and -llr/2 for 0s.
    Add-compare-select prefers the lower-indexed predecessor on ties.
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    if llrs.size % 2:
        raise ValueError(f"LLR count must be even, got {llrs.size}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("LLRs must be finite")
    steps = llrs.size // 2
    pairs = llrs.reshape(steps, 2)
    S = code.n_states
    m = code.memory
    nxt, out = _trellis(code)
    signs = 2.0 * out - 1.0  # (S, 2, 2)

    # predecessors of state s: (s << 1) & (S-1) | d for d in {0, 1}, input bit = s >> (m-1)
    s_idx = np.arange(S)
    pred = np.stack([((s_idx << 1) & (S - 1)) | d for d in (0, 1)], axis=1)  # lower index first
    in_bit = s_idx >> (m - 1)
    branch_signs = signs[pred, in_bit[:, None]]  # (S, 2 preds, 2 outputs)

    metric = np.full(S, -np.inf)
    metric[0] = 0.0
    choice = np.empty((steps, S), dtype=np.int8)
    for t in range(steps):
        cand = metric[pred] + 0.5 * branch_signs @ pairs[t]
        pick = (cand[:, 1] > cand[:, 0]).astype(np.int8)
        choice[t] = pick
        metric = cand[s_idx, pick]

    state = 0 if code.terminated else int(np.argmax(metric))
    decoded = np.empty(steps, dtype=np.uint8)
    for t in range(steps - 1, -1, -1):
        decoded[t] = state >> (m - 1)
        state = pred[state, choice[t, state]]
    if code.terminated:
        decoded = decoded[:steps - m]
    return decoded
