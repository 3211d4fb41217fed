"""Seeded Monte Carlo BER/FER sweeps for the LCC detector, coded and uncoded."""

from __future__ import annotations

import hashlib
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import (add_awgn, bits_to_symbols, random_symbols, sigma_from_ebn0,
                      transmit_noiseless)
from .codebook import Codebook, CodebookParams, build_codebook, load_codebook
from .detector import DetectorConfig, OpCounter, detect_hard, detect_soft, edge_mask
from .fec import ConvCode, conv_encode, viterbi_decode
from .pulse_shaping import RrcParams, TapSet, max_tau, sample_taps, truncate_taps

log = logging.getLogger(__name__)

# sigma used for LLR scaling when the channel itself is noiseless
NOISELESS_LLR_SIGMA = 1e-3


@dataclass
class SimConfig:
    tau: float = 0.6
    rolloff_h: float = 0.35
    rolloff_v: float = 0.12  # provenance only; the discrete model does not use it
    span: int = 40
    block_len: int = 200
    n_p: int = 7
    n_t: int = 3
    n_l: int = 8
    ebn0_db_list: list[float] = field(default_factory=lambda: [4.0, 6.0, 8.0])
    coded: bool = False
    master_seed: int = 1
    max_blocks: int = 100
    min_bit_errors: int = 100
    edge_exclusion: bool = False
    edge_mode: str = "zero_fill"
    llr_clamp: float = 30.0
    taps: list[float] | None = None  # overrides the RRC taps when set
    workers: int = 1
    cache_dir: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.taps is None:
            if not 0 <= self.rolloff_h <= 1:
                raise ValueError(f"rolloff_h must lie in [0, 1], got {self.rolloff_h}")
            if not 0 < self.tau < max_tau(self.rolloff_h):
                raise ValueError(
                    f"tau={self.tau} must satisfy 0 < tau < 1/(1+rolloff_h) = "
                    f"{max_tau(self.rolloff_h):.6f}")
        elif len(self.taps) % 2 != 1:
            raise ValueError("explicit taps must have odd length")
        for name in ("n_p", "n_t"):
            v = getattr(self, name)
            if v < 1 or v % 2 != 1:
                raise ValueError(f"{name} must be a positive odd integer, got {v}")
        for name in ("block_len", "n_l", "max_blocks", "min_bit_errors", "span", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.ebn0_db_list:
            raise ValueError("ebn0_db_list is empty")
        if self.coded and ConvCode().info_length(self.block_len) < 1:
            raise ValueError(f"block_len={self.block_len} too short for the coded link")
        if self.llr_clamp <= 0:
            raise ValueError("llr_clamp must be positive")

    @property
    def code_rate(self) -> float:
        return 0.5 if self.coded else 1.0


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    bit_errors: int
    bits_counted: int
    block_errors: int
    blocks: int
    ber: float
    fer: float
    distance_scans: int
    wall_time: float


CSV_COLUMNS = [f.name for f in fields(BerPoint)]


def full_taps(cfg: SimConfig) -> TapSet:
    if cfg.taps is not None:
        return TapSet(np.asarray(cfg.taps, dtype=float), tau=cfg.tau)
    return sample_taps(RrcParams(cfg.rolloff_h, 1.0, cfg.span), cfg.tau, cfg.span)


def receiver_taps(cfg: SimConfig) -> TapSet:
    taps = full_taps(cfg)
    if cfg.n_t > len(taps):
        raise ValueError(f"n_t={cfg.n_t} exceeds the {len(taps)} available taps")
    return truncate_taps(taps, cfg.n_t)


def cache_key(params: CodebookParams) -> str:
    h = hashlib.sha256()
    h.update(f"{params.n_p}:{params.n_t}:".encode())
    h.update(params.taps.taps.astype("<f8").tobytes())
    return h.hexdigest()[:16]


def get_codebook(cfg: SimConfig, n_p: int | None = None) -> Codebook:
    """Build the receiver codebook, reusing a cached copy under ``cfg.cache_dir``."""
    params = CodebookParams(cfg.n_p if n_p is None else n_p, cfg.n_t, receiver_taps(cfg))
    if cfg.cache_dir is None:
        return build_codebook(params)
    path = Path(cfg.cache_dir) / f"lcc_np{params.n_p}_nt{params.n_t}_{cache_key(params)}.bin"
    if path.exists():
        log.info("loading cached codebook %s", path)
        book = load_codebook(path)
        if np.array_equal(book.params.taps.taps, params.taps.taps):
            return book
        log.warning("cache %s has mismatched taps; rebuilding", path)
    book = build_codebook(params)
    path.parent.mkdir(parents=True, exist_ok=True)
    book.save(path)
    return book


def block_rng(master_seed: int, point: int, block: int) -> np.random.Generator:
    """Independent stream for one block, derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(point, block)))


@dataclass
class _Tally:
    bit_errors: int
    bits: int
    scans: int


def _uncoded_block(cfg, det, taps, sigma, rng, mask) -> _Tally:
    a = random_symbols(cfg.block_len, rng)
    y = add_awgn(transmit_noiseless(a, taps), sigma, rng)
    counter = OpCounter()
    a_hat = detect_hard(y, det, counter)
    err = int(np.count_nonzero((a_hat != a)[mask]))
    return _Tally(err, int(mask.sum()), counter.distance_scans)


def _coded_block(cfg, det, taps, sigma, rng, code) -> _Tally:
    n_info = code.info_length(cfg.block_len)
    info = rng.integers(0, 2, size=n_info)
    coded = conv_encode(info, code)
    a = np.zeros(cfg.block_len)
    a[:coded.size] = bits_to_symbols(coded)
    if coded.size < cfg.block_len:
        # odd block lengths leave one unused slot; fill it with a random symbol
        a[coded.size:] = random_symbols(cfg.block_len - coded.size, rng)
    y = add_awgn(transmit_noiseless(a, taps), sigma, rng)
    counter = OpCounter()
    llr = detect_soft(y, det, sigma if sigma > 0 else NOISELESS_LLR_SIGMA, counter)
    decoded = viterbi_decode(llr[:coded.size], code)
    err = int(np.count_nonzero(decoded != info))
    return _Tally(err, n_info, counter.distance_scans)


def _run(cfg: SimConfig, codebook: Codebook | None = None) -> list[BerPoint]:
    cfg.validate()
    taps = full_taps(cfg)
    book = codebook if codebook is not None else get_codebook(cfg)
    det = DetectorConfig(book, n_l=min(cfg.n_l, len(book)), clamp=cfg.llr_clamp,
                         edges=cfg.edge_mode)
    code = ConvCode()
    if cfg.edge_exclusion and not cfg.coded:
        mask = edge_mask(cfg.block_len, cfg.n_p)
    else:
        mask = np.ones(cfg.block_len, dtype=bool)

    points = []
    for p_idx, ebn0 in enumerate(cfg.ebn0_db_list):
        sigma = sigma_from_ebn0(ebn0, cfg.code_rate)

        def one(b, p_idx=p_idx, sigma=sigma):
            rng = block_rng(cfg.master_seed, p_idx, b)
            if cfg.coded:
                return _coded_block(cfg, det, taps, sigma, rng, code)
            return _uncoded_block(cfg, det, taps, sigma, rng, mask)

        t0 = time.perf_counter()
        errs = bits = block_errs = blocks = scans = 0
        for tally in _ordered_blocks(one, cfg.max_blocks, cfg.workers):
            errs += tally.bit_errors
            bits += tally.bits
            scans += tally.scans
            block_errs += tally.bit_errors > 0
            blocks += 1
            if errs >= cfg.min_bit_errors or blocks >= cfg.max_blocks:
                break
        pt = BerPoint(float(ebn0), errs, bits, block_errs, blocks,
                      errs / bits if bits else math.nan, block_errs / blocks,
                      scans, time.perf_counter() - t0)
        log.info("Eb/N0 %.2f dB: BER %.3e (%d/%d), %d blocks", ebn0, pt.ber, errs, bits, blocks)
        points.append(pt)
    return points


def _ordered_blocks(fn, max_blocks: int, workers: int):
    """Yield fn(0), fn(1), ... in order; with workers > 1 blocks run ahead speculatively.

    The consumer stops iterating when its stop rule fires, so the tallies it sees
    never depend on the worker count.
    """
    if workers == 1:
        for b in range(max_blocks):
            yield fn(b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = {}
        nxt = 0
        try:
            for b in range(max_blocks):
                while nxt < max_blocks and len(pending) < 2 * workers:
                    pending[nxt] = pool.submit(fn, nxt)
                    nxt += 1
                yield pending.pop(b).result()
        finally:
            for f in pending.values():
                f.cancel()


def run_uncoded_sweep(cfg: SimConfig, codebook: Codebook | None = None) -> list[BerPoint]:
    if cfg.coded:
        raise ValueError("config has coded=True; use run_coded_sweep")
    return _run(cfg, codebook)


def run_coded_sweep(cfg: SimConfig, codebook: Codebook | None = None) -> list[BerPoint]:
    if not cfg.coded:
        raise ValueError("config has coded=False; use run_uncoded_sweep")
    return _run(cfg, codebook)


def run_sweep(cfg: SimConfig, codebook: Codebook | None = None) -> list[BerPoint]:
    return _run(cfg, codebook)


def distance_profile(cfg: SimConfig, np_range) -> list[tuple[int, float]]:
    """Minimum inter-class distance of the receiver codebook for each window length."""
    taps = receiver_taps(cfg)
    out = []
    for n_p in np_range:
        book = build_codebook(CodebookParams(int(n_p), cfg.n_t, taps))
        out.append((int(n_p), book.min_interclass_distance()))
    return out


# -- CSV --------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_comment_lines(cfg: SimConfig) -> list[str]:
    lines = [f"# {k} = {_fmt(v)}" for k, v in sorted(asdict(cfg).items())]
    lines.append("# energy convention: Es = 1 per FTN symbol, Eb = Es / code_rate, "
                 "no 1/tau rate factor")
    return lines


def ber_csv(points: list[BerPoint], cfg: SimConfig) -> str:
    buf = io.StringIO()
    for line in config_comment_lines(cfg):
        buf.write(line + "\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for pt in points:
        buf.write(",".join(_fmt(getattr(pt, c)) for c in CSV_COLUMNS) + "\n")
    return buf.getvalue()


def distance_csv(profile: list[tuple[int, float]], cfg: SimConfig) -> str:
    buf = io.StringIO()
    for line in config_comment_lines(cfg):
        buf.write(line + "\n")
    buf.write("n_p,min_distance\n")
    for n_p, d in profile:
        buf.write(f"{n_p},{d!r}\n")
    return buf.getvalue()


def read_ber_csv(text: str) -> list[BerPoint]:
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = rows[0].split(",")
    out = []
    for ln in rows[1:]:
        vals = dict(zip(header, ln.split(",")))
        out.append(BerPoint(
            float(vals["ebn0_db"]), int(vals["bit_errors"]), int(vals["bits_counted"]),
            int(vals["block_errors"]), int(vals["blocks"]), float(vals["ber"]),
            float(vals["fer"]), int(vals["distance_scans"]), float(vals["wall_time"])))
    return out
