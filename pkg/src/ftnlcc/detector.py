"""Online classification and approximate soft output for the low-complexity classifier."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import logsumexp

from .channel import ReceivedBlock
from .codebook import Codebook, edge_codebook
from .pulse_shaping import TapSet

EDGE_MODES = ("zero_fill", "exact")


@dataclass(frozen=True)
class ObservationWindow:
    values: np.ndarray
    center_index: int


@dataclass
class OpCounter:
    """Tallies codebook rows whose distance to an observation was evaluated."""

    distance_scans: int = 0
    symbols: int = 0


@dataclass
class DetectorConfig:
    """Detector settings.

    ``edges`` selects how windows that cross the block boundary are classified:
    ``"zero_fill"`` matches the zero-filled observation against the full codebook,
    ``"exact"`` uses a codebook restricted to in-block symbols and coordinates.
    """

    codebook: Codebook
    n_l: int = 8
    clamp: float = 30.0
    priors: np.ndarray | None = None
    edges: str = "zero_fill"
    _edge_books: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.n_l:
            raise ValueError(f"n_l must be positive, got {self.n_l}")
        if self.n_l > len(self.codebook):
            raise ValueError(f"n_l={self.n_l} exceeds codebook size {len(self.codebook)}")
        if not self.clamp > 0:
            raise ValueError(f"clamp must be positive, got {self.clamp}")
        if self.edges not in EDGE_MODES:
            raise ValueError(f"edges must be one of {EDGE_MODES}, got {self.edges!r}")

    @property
    def n_p(self) -> int:
        return self.codebook.params.n_p

    def book_for(self, position: int, block_len: int) -> Codebook:
        if self.edges == "zero_fill":
            return self.codebook
        prm = self.codebook.params
        sym = position + prm.symbol_offsets
        crd = position + prm.coord_offsets
        if sym[0] >= 0 and sym[-1] < block_len and crd[0] >= 0 and crd[-1] < block_len:
            return self.codebook
        key = (max(0, -int(sym[0])), max(0, int(sym[-1]) - block_len + 1),
               max(0, -int(crd[0])), max(0, int(crd[-1]) - block_len + 1))
        book = self._edge_books.get(key)
        if book is None:
            book = edge_codebook(prm, position, block_len)
            self._edge_books[key] = book
        return book


def _samples(y) -> np.ndarray:
    if isinstance(y, ReceivedBlock):
        return np.asarray(y.samples, dtype=float)
    return np.asarray(y, dtype=float)


def _coord_lo(n_p: int) -> int:
    return -((n_p - 1) // 2)


def extract_window(y, i: int, n_p: int) -> ObservationWindow:
    """The n_p samples around y_i, zero outside the block."""
    y = _samples(y)
    if not 0 <= i < y.size:
        raise IndexError(f"index {i} outside block of length {y.size}")
    idx = i + _coord_lo(n_p) + np.arange(n_p)
    ok = (idx >= 0) & (idx < y.size)
    vals = np.zeros(n_p)
    vals[ok] = y[idx[ok]]
    return ObservationWindow(vals, i)


def observation_matrix(y, n_p: int) -> np.ndarray:
    """Row i is the observation window centered on symbol i."""
    y = _samples(y)
    lo = _coord_lo(n_p)
    padded = np.concatenate([np.zeros(-lo), y, np.zeros(n_p - 1 + lo)])
    return sliding_window_view(padded, n_p)


def _groups(cfg: DetectorConfig, n: int):
    """Yield (codebook, positions) with positions sharing one codebook."""
    books: dict[int, tuple[Codebook, list[int]]] = {}
    for i in range(n):
        book = cfg.book_for(i, n)
        books.setdefault(id(book), (book, []))[1].append(i)
    for book, positions in books.values():
        yield book, np.asarray(positions)


def detect_hard(y, cfg: DetectorConfig, counter: OpCounter | None = None) -> np.ndarray:
    """Nearest-neighbor label of every observation window."""
    obs = observation_matrix(y, cfg.n_p)
    n = obs.shape[0]
    if n == 0:
        raise ValueError("empty block")
    out = np.empty(n)
    for book, pos in _groups(cfg, n):
        idx, _ = book.search(obs[pos], 1)
        out[pos] = book._labels_of(idx[:, 0])
        if counter is not None:
            counter.distance_scans += len(book) * pos.size
    if counter is not None:
        counter.symbols += n
    return out


def _prior_terms(book: Codebook, rows: np.ndarray, pos: np.ndarray, priors: np.ndarray):
    """sum of L_A(x_j) over non-center window symbols with x_j = 1."""
    prm = book.params
    offsets = prm.symbol_offsets
    c = prm.center_position
    n = priors.size
    terms = np.zeros(rows.shape)
    flat = np.where(rows < 0, 0, rows).ravel()
    win = book.windows(flat).reshape(rows.shape + (prm.window_len,))
    for p, off in enumerate(offsets):
        if p == c:
            continue
        j = pos + off
        ok = (j >= 0) & (j < n)
        la = np.zeros(pos.shape)
        la[ok] = priors[j[ok]]
        terms += np.where(win[..., p] > 0, la[:, None], 0.0)
    return terms


def detect_soft(y, cfg: DetectorConfig, sigma: float, counter: OpCounter | None = None) -> np.ndarray:
    """Approximate LLRs ln P(x_i = 1 | o_i) / P(x_i = 0 | o_i) from the n_l nearest rows.

    If every retained row carries the same label, the nearest row of the other
    label is added so both hypotheses are represented.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    obs = observation_matrix(y, cfg.n_p)
    n = obs.shape[0]
    if n == 0:
        raise ValueError("empty block")
    priors = cfg.priors
    if priors is not None:
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (n,):
            raise ValueError(f"priors must have length {n}")
    llr = np.empty(n)
    for book, pos in _groups(cfg, n):
        k = min(cfg.n_l, len(book))
        idx, dist = book.search(obs[pos], k)
        labels = book._labels_of(idx)
        has_pos = (labels > 0).any(axis=1)
        has_neg = (labels < 0).any(axis=1)
        extra_idx = np.full((pos.size, 1), -1, dtype=np.int64)
        extra_dist = np.full((pos.size, 1), np.inf)
        for missing, lab in ((~has_pos, 1), (~has_neg, -1)):
            if missing.any():
                i2, d2 = book.search(obs[pos[missing]], 1, label=lab)
                extra_idx[missing] = i2
                extra_dist[missing] = d2
        idx = np.hstack([idx, extra_idx])
        dist = np.hstack([dist, extra_dist])
        labels = np.hstack([labels, np.where(extra_idx >= 0, -labels[:, :1], 0)])
        metric = -(dist ** 2) / (2.0 * sigma ** 2)
        if priors is not None and np.any(priors):
            metric = metric + np.where(idx >= 0, _prior_terms(book, idx, pos, priors), 0.0)
        num = logsumexp(np.where(labels > 0, metric, -np.inf), axis=1)
        den = logsumexp(np.where(labels < 0, metric, -np.inf), axis=1)
        vals = num - den
        if priors is not None:
            vals = vals + priors[pos]
        llr[pos] = vals
        if counter is not None:
            counter.distance_scans += len(book) * pos.size
    if counter is not None:
        counter.symbols += n
    return np.clip(llr, -cfg.clamp, cfg.clamp)


def window_truncation_error(a, full_taps: TapSet, n_p: int, i: int) -> float:
    """Contribution to y_i of taps beyond the (n_p - 1) / 2 half-window."""
    a = np.asarray(a, dtype=float)
    if not 0 <= i < a.size:
        raise IndexError(f"index {i} outside block of length {a.size}")
    half = (n_p - 1) // 2
    eps = 0.0
    for l in range(-full_taps.half_width, full_taps.half_width + 1):
        if abs(l) <= half:
            continue
        k = i - l
        if 0 <= k < a.size:
            eps += a[k] * full_taps.tap(l)
    return float(eps)


def edge_mask(n: int, n_p: int) -> np.ndarray:
    """True for symbols whose window lies fully inside the block."""
    half = (n_p - 1) // 2
    m = np.ones(n, dtype=bool)
    right = n_p - 1 - half
    m[:half] = False
    if right:
        m[n - right:] = False
    return m
