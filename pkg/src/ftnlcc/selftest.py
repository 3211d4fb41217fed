"""Quick oracle-backed consistency checks, runnable from the CLI in a few seconds."""

from __future__ import annotations

import numpy as np

from .channel import add_awgn, random_symbols, transmit_noiseless
from .codebook import CodebookParams, build_codebook
from .detector import DetectorConfig, detect_hard, detect_soft
from .fec import conv_encode, viterbi_decode
from .oracle import exact_llr, exact_ml_sequence
from .pulse_shaping import TOY_TAPS


def _toy_distances():
    got = [build_codebook(CodebookParams(n, 3, TOY_TAPS)).min_interclass_distance()
           for n in (1, 2, 3)]
    ok = np.allclose(got, [0.4, 0.5657, 0.6928], atol=5e-4)
    return ok, "d = " + ", ".join(f"{d:.4f}" for d in got)


def _example_set():
    cb = build_codebook(CodebookParams(1, 3, TOY_TAPS))
    vals = sorted(set(np.round(cb.samples[:, 0], 12)))
    return vals == [-1.4, -0.8, -0.2, 0.2, 0.8, 1.4], f"samples {vals}"


def _oracle_equivalence(blocks=20, n=8, sigma=0.4):
    n_p = 2 * n - 1
    book = build_codebook(CodebookParams(n_p, 3, TOY_TAPS))
    cfg = DetectorConfig(book, n_l=len(book), clamp=1e9, edges="exact")
    rng = np.random.default_rng(2024)
    hard_ok = True
    gap = 0.0
    for _ in range(blocks):
        a = random_symbols(n, rng)
        y = add_awgn(transmit_noiseless(a, TOY_TAPS), sigma, rng)
        hard_ok &= bool(np.array_equal(detect_hard(y, cfg), exact_ml_sequence(y, TOY_TAPS)))
        gap = max(gap, float(np.max(np.abs(detect_soft(y, cfg, sigma)
                                           - exact_llr(y, TOY_TAPS, sigma).llrs))))
    return hard_ok and gap < 1e-6, f"hard match {hard_ok}, max LLR gap {gap:.2e}"


def _fec_round_trip(blocks=50):
    rng = np.random.default_rng(7)
    ok = True
    for _ in range(blocks):
        bits = rng.integers(0, 2, 200)
        llr = 30.0 * (2.0 * conv_encode(bits) - 1.0)
        llr[rng.integers(0, llr.size)] *= -1
        ok &= bool(np.array_equal(viterbi_decode(llr), bits))
    return ok, f"{blocks} blocks with one flipped LLR"


CHECKS = [
    ("toy class distances", _toy_distances),
    ("example sample set", _example_set),
    ("LCC vs exhaustive oracle", _oracle_equivalence),
    ("FEC round trip", _fec_round_trip),
]


def run_selftest(out) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        ok, detail = fn()
        all_ok &= ok
        out.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")
    return all_ok
