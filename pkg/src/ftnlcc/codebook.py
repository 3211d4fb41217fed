"""Offline pre-classification: labeled class samples in the observation-window space.

Every window of ``n_p + n_t - 1`` consecutive BPSK symbols is mapped through the
``n_t`` dominant taps to an ``n_p``-dimensional noiseless observation. Rows are
stored in canonical order: the window read as a binary number (-1 -> 0, +1 -> 1,
first symbol most significant), ascending. Row ``k`` and row ``2**W - 1 - k`` are
antipodal, which the nearest-neighbor scan exploits by storing only half of the
samples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pulse_shaping import TapSet

MAX_WINDOW = 26

CACHE_MAGIC = b"FTNLCC"
CACHE_VERSION = 1

# query rows x codebook pairs scored per chunk; sized to stay cache resident
_CHUNK_ELEMENTS = 1 << 18
_F32_EPS = float(np.finfo(np.float32).eps)


class CodebookSizeError(ValueError):
    """Raised when 2**(n_p + n_t - 1) exceeds the enumeration cap."""


@dataclass(frozen=True)
class CodebookParams:
    n_p: int
    n_t: int
    taps: TapSet
    max_window: int = MAX_WINDOW

    def __post_init__(self):
        if self.n_p < 1:
            raise ValueError(f"n_p must be >= 1, got {self.n_p}")
        if self.n_t < 1 or self.n_t % 2 != 1:
            raise ValueError(f"n_t must be a positive odd integer, got {self.n_t}")
        if len(self.taps) != self.n_t:
            raise ValueError(f"expected {self.n_t} taps, got {len(self.taps)}")
        if self.window_len > self.max_window:
            raise CodebookSizeError(
                f"window length {self.window_len} exceeds cap {self.max_window} "
                f"(2**{self.window_len} rows)"
            )

    @property
    def window_len(self) -> int:
        return self.n_p + self.n_t - 1

    @property
    def coord_offsets(self) -> np.ndarray:
        """Sample offsets relative to the detected symbol, e.g. -1, 0, 1 for n_p = 3.

        Even n_p puts the extra sample after the center (n_p = 2 observes y_i, y_{i+1}).
        """
        lo = -((self.n_p - 1) // 2)
        return np.arange(lo, lo + self.n_p)

    @property
    def symbol_offsets(self) -> np.ndarray:
        ht = (self.n_t - 1) // 2
        off = self.coord_offsets
        return np.arange(off[0] - ht, off[-1] + ht + 1)

    @property
    def center_position(self) -> int:
        """Position of the detected symbol inside the window."""
        return int(np.flatnonzero(self.symbol_offsets == 0)[0])


@dataclass(frozen=True)
class Neighbor:
    index: int
    label: int
    distance: float


class Codebook:
    """Class samples S' with their generating windows M' and center-symbol labels.

    ``active`` is the half-open range of window positions that carry a symbol;
    positions outside it are fixed to zero. ``valid`` is the half-open range of
    observation coordinates that exist; the others are zeroed. The full codebook
    has everything active and valid; restricted codebooks serve block edges.
    """

    def __init__(self, params: CodebookParams, samples: np.ndarray | None = None,
                 active: tuple[int, int] | None = None, valid: tuple[int, int] | None = None):
        self.params = params
        W = params.window_len
        self.active = active if active is not None else (0, W)
        self.valid = valid if valid is not None else (0, params.n_p)
        c = params.center_position
        if not self.active[0] <= c < self.active[1]:
            raise ValueError("center symbol must be active")
        self.n_bits = self.active[1] - self.active[0]
        if samples is None:
            samples = self._enumerate()
        else:
            samples = np.ascontiguousarray(samples, dtype=float)
            if samples.shape != (1 << self.n_bits, params.n_p):
                raise ValueError(f"sample matrix has shape {samples.shape}")
        samples.setflags(write=False)
        self.samples = samples
        half = len(self) // 2
        half_norms = np.einsum("ij,ij->i", samples[:half], samples[:half])
        self._half_norms32 = half_norms.astype(np.float32)
        self._max_norm = float(half_norms.max())
        self._half_labels = self._labels_of(np.arange(half))
        self._gen = self._generator()

    def __len__(self) -> int:
        return 1 << self.n_bits

    def __repr__(self) -> str:
        return (f"Codebook(n_p={self.params.n_p}, n_t={self.params.n_t}, rows={len(self)}, "
                f"active={self.active}, valid={self.valid})")

    # -- construction -------------------------------------------------------

    def _position_symbols(self, rows: np.ndarray, p: int) -> np.ndarray:
        lo, hi = self.active
        if not lo <= p < hi:
            return np.zeros(rows.shape, dtype=float)
        shift = hi - 1 - p
        return 2.0 * ((rows >> shift) & 1) - 1.0

    def _enumerate(self) -> np.ndarray:
        prm = self.params
        ht = (prm.n_t - 1) // 2
        h = prm.taps.taps
        rows = np.arange(len(self), dtype=np.int64)
        symbols = [self._position_symbols(rows, p) for p in range(prm.window_len)]
        out = np.zeros((len(self), prm.n_p))
        v0, v1 = self.valid
        for jj in range(v0, v1):
            col = np.zeros(len(self))
            for l in range(-ht, ht + 1):
                col += h[ht + l] * symbols[jj + ht - l]
            out[:, jj] = col
        return out

    def _generator(self) -> np.ndarray:
        """Matrix G (active positions x n_p) with sample = G^T window."""
        prm = self.params
        ht = (prm.n_t - 1) // 2
        G = np.zeros((prm.window_len, prm.n_p))
        for jj in range(*self.valid):
            for l in range(-ht, ht + 1):
                G[jj + ht - l, jj] = prm.taps.taps[ht + l]
        return G[self.active[0]:self.active[1]]

    # -- row metadata -------------------------------------------------------

    def _labels_of(self, rows: np.ndarray) -> np.ndarray:
        return self._position_symbols(np.asarray(rows, dtype=np.int64),
                                      self.params.center_position).astype(np.int8)

    @property
    def labels(self) -> np.ndarray:
        return self._labels_of(np.arange(len(self)))

    def label(self, index: int) -> int:
        return int(self._labels_of(np.array([index]))[0])

    def windows(self, rows=None) -> np.ndarray:
        """Generating symbol windows (entries +-1, or 0 at inactive positions)."""
        rows = np.arange(len(self)) if rows is None else np.atleast_1d(rows)
        rows = np.asarray(rows, dtype=np.int64)
        return np.stack([self._position_symbols(rows, p)
                         for p in range(self.params.window_len)], axis=1).astype(np.int8)

    # -- search -------------------------------------------------------------

    def search(self, queries, k: int = 1, label: int | None = None):
        """Exact k-nearest rows for each query.

        Returns ``(indices, distances)`` of shape (Q, k), sorted by distance with
        ties broken by lowest row index. With ``label`` set only rows of that class
        are eligible.

        Every row is scored, but through the factorization s_k = G^T w_k: the
        inner products q.s_k for all windows are built by recursive doubling over
        window positions in float32. Each antipodal pair is scored by its closer
        member. Rows within a rounding bound of the k-th best score are then
        re-ranked with directly computed float64 distances, so the result equals
        a plain exhaustive scan.
        """
        Q = np.atleast_2d(np.asarray(queries, dtype=float))
        if Q.shape[1] != self.params.n_p:
            raise ValueError(f"query dimension {Q.shape[1]} != n_p {self.params.n_p}")
        eligible = len(self) if label is None else len(self) // 2
        if not 1 <= k <= eligible:
            raise ValueError(f"k={k} out of range [1, {eligible}]")
        n_rows = len(self)
        half = n_rows // 2
        nb = self.n_bits
        chunk = max(1, _CHUNK_ELEMENTS // half)
        out_idx = np.empty((Q.shape[0], k), dtype=np.int64)
        out_dist = np.empty((Q.shape[0], k))
        if label is not None:
            # +1 where the stored row has the requested label, -1 where its negation does
            flip = np.where(self._half_labels == label, 1.0, -1.0).astype(np.float32)
        proj = Q @ self._gen.T
        qn = np.einsum("ij,ij->i", Q, Q)
        bound = 4.0 * (nb + 3) * _F32_EPS * (np.abs(proj).sum(axis=1) + self._max_norm) + 1e-12
        proj32 = proj.astype(np.float32)
        for start in range(0, Q.shape[0], chunk):
            stop = min(start + chunk, Q.shape[0])
            v = proj32[start:stop]
            b = stop - start
            dots = np.empty((b, half), dtype=np.float32)
            dots[:, 0] = -v[:, 0]
            width = 1
            for p in range(nb - 1, 0, -1):
                np.add(dots[:, :width], v[:, p:p + 1], out=dots[:, width:2 * width])
                dots[:, :width] -= v[:, p:p + 1]
                width *= 2
            # score = |s|^2 - 2 q.s, i.e. squared distance minus |q|^2
            if label is None:
                np.abs(dots, out=dots)
            else:
                dots *= flip
            score = dots
            score *= -2.0
            score += self._half_norms32
            if k == 1:
                kth = score.min(axis=1)
            elif k <= half:
                kth = np.partition(score, k - 1, axis=1)[:, k - 1]
            else:
                kth = np.full(b, np.inf, dtype=np.float32)
            flat = np.flatnonzero(score <= (kth + bound[start:stop]).astype(np.float32)[:, None])
            r, col = np.divmod(flat, half)
            # every full row within the threshold belongs to a shortlisted pair
            if label is None:
                r = np.concatenate([r, r])
                rows = np.concatenate([col, n_rows - 1 - col])
            else:
                rows = np.where(flip[col] > 0, col, n_rows - 1 - col)
            diff = Q[start + r] - self.samples[rows]
            dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            order = np.lexsort((rows, dist, r))
            r, rows, dist = r[order], rows[order], dist[order]
            first = np.searchsorted(r, np.arange(b))
            take = first[:, None] + np.arange(k)
            out_idx[start:stop] = rows[take]
            out_dist[start:stop] = dist[take]
        return out_idx, out_dist

    def nearest_neighbor(self, query) -> Neighbor:
        q = np.asarray(query, dtype=float)
        if q.ndim != 1:
            raise ValueError("query must be a vector")
        idx, dist = self.search(q[None, :], 1)
        i = int(idx[0, 0])
        return Neighbor(i, self.label(i), float(dist[0, 0]))

    def k_nearest(self, query, k: int) -> list[Neighbor]:
        q = np.asarray(query, dtype=float)
        if q.ndim != 1:
            raise ValueError("query must be a vector")
        idx, dist = self.search(q[None, :], k)
        labels = self._labels_of(idx[0])
        return [Neighbor(int(i), int(lab), float(d)) for i, lab, d in zip(idx[0], labels, dist[0])]

    # -- geometry -----------------------------------------------------------

    def min_interclass_distance(self) -> float:
        """Smallest distance between samples of opposite labels.

        Any difference of two windows is 2e with e in {-1, 0, 1}^W and e nonzero at
        the center, and the banded tap structure makes |H e|^2 additive over
        observation coordinates. A min-sum trellis over the last n_t - 1 entries of
        e therefore finds the exact minimum without visiting all pairs.
        """
        prm = self.params
        nt = prm.n_t
        h = prm.taps.taps
        W = prm.window_len
        c = prm.center_position
        lo, hi = self.active
        v0, v1 = self.valid

        def allowed(p):
            if p == c:
                return (1,)
            if lo <= p < hi:
                return (-1, 0, 1)
            return (0,)

        # state: tuple of the most recent nt - 1 entries of e
        costs = {(): 0.0}
        for p in range(nt - 1):
            costs = {s + (v,): 0.0 for s in costs for v in allowed(p)}
        for p in range(nt - 1, W):
            jj = p - (nt - 1)
            nxt: dict[tuple, float] = {}
            for s, cost in costs.items():
                for v in allowed(p):
                    full = s + (v,)
                    if v0 <= jj < v1:
                        # coordinate jj sees positions jj..jj+nt-1 through taps h_{ht}..h_{-ht}
                        val = float(np.dot(full, h[::-1]))
                        cost_new = cost + val * val
                    else:
                        cost_new = cost
                    key = full[1:]
                    if cost_new < nxt.get(key, np.inf):
                        nxt[key] = cost_new
            costs = nxt
        return 2.0 * float(np.sqrt(min(costs.values())))

    # -- persistence --------------------------------------------------------

    def save(self, path) -> None:
        if self.active != (0, self.params.window_len) or self.valid != (0, self.params.n_p):
            raise ValueError("only full codebooks can be cached")
        taps = self.params.taps.taps
        with open(path, "wb") as fh:
            fh.write(CACHE_MAGIC)
            fh.write(struct.pack("<HIII", CACHE_VERSION, self.params.n_p,
                                 self.params.n_t, taps.size))
            fh.write(taps.astype("<f8").tobytes())
            fh.write(np.ascontiguousarray(self.samples, dtype="<f8").tobytes())


def load_codebook(path, max_window: int = MAX_WINDOW) -> Codebook:
    data = Path(path).read_bytes()
    if data[:len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise ValueError(f"{path}: not a codebook cache file")
    pos = len(CACHE_MAGIC)
    version, n_p, n_t, n_taps = struct.unpack_from("<HIII", data, pos)
    if version != CACHE_VERSION:
        raise ValueError(f"{path}: unsupported cache version {version}")
    pos += struct.calcsize("<HIII")
    taps = np.frombuffer(data, dtype="<f8", count=n_taps, offset=pos).astype(float)
    pos += 8 * n_taps
    params = CodebookParams(n_p, n_t, TapSet(taps), max_window=max_window)
    rows = 1 << params.window_len
    if len(data) - pos != 8 * rows * n_p:
        raise ValueError(f"{path}: truncated or oversized sample table")
    samples = np.frombuffer(data, dtype="<f8", count=rows * n_p, offset=pos).reshape(rows, n_p)
    return Codebook(params, samples.astype(float))


def build_codebook(params: CodebookParams) -> Codebook:
    return Codebook(params)


def edge_codebook(params: CodebookParams, position: int, block_len: int) -> Codebook:
    """Codebook for a symbol whose window crosses the block boundary.

    Symbols outside the block are zero and observation coordinates outside the
    block are dropped, matching the zero-edge channel exactly.
    """
    sym = position + params.symbol_offsets
    crd = position + params.coord_offsets
    inside = np.flatnonzero((sym >= 0) & (sym < block_len))
    valid = np.flatnonzero((crd >= 0) & (crd < block_len))
    return Codebook(params, active=(int(inside[0]), int(inside[-1]) + 1),
                    valid=(int(valid[0]), int(valid[-1]) + 1))
