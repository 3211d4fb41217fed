import numpy as np
import pytest

from ftnlcc.channel import ReceivedBlock, add_awgn, random_symbols, transmit_noiseless
from ftnlcc.codebook import CodebookParams, build_codebook
from ftnlcc.detector import (
    DetectorConfig, OpCounter, detect_hard, detect_soft, edge_mask, extract_window,
    observation_matrix, window_truncation_error)
from ftnlcc.oracle import exact_llr
from ftnlcc.pulse_shaping import TOY_TAPS, RrcParams, TapSet, sample_taps, truncate_taps

FULL06 = sample_taps(RrcParams(0.35), 0.6)
RRC5 = truncate_taps(FULL06, 5)


def det(n_p, taps, **kw):
    return DetectorConfig(build_codebook(CodebookParams(n_p, len(taps), taps)), **kw)


def test_extract_window():
    np.testing.assert_array_equal(extract_window([1, 2, 3, 4, 5], 2, 3).values, [2, 3, 4])
    np.testing.assert_array_equal(extract_window([1, 2, 3], 0, 3).values, [0, 1, 2])
    w = extract_window(np.arange(1.0, 9.0), 7, 5)
    np.testing.assert_array_equal(w.values, [6, 7, 8, 0, 0])
    assert w.center_index == 7
    with pytest.raises(IndexError):
        extract_window([1, 2, 3], 3, 3)


def test_observation_matrix_rows_match_extract():
    y = np.random.default_rng(0).standard_normal(11)
    obs = observation_matrix(y, 5)
    for i in range(11):
        np.testing.assert_array_equal(obs[i], extract_window(y, i, 5).values)


def test_edge_mask():
    np.testing.assert_array_equal(edge_mask(7, 3), [0, 1, 1, 1, 1, 1, 0])
    assert edge_mask(7, 1).all()


@pytest.mark.parametrize("n_p", [3, 7])
def test_noiseless_interior_recovery(n_p):
    cfg = det(n_p, RRC5)
    a = random_symbols(300, np.random.default_rng(n_p))
    y = transmit_noiseless(a, RRC5)
    a_hat = detect_hard(y, cfg)
    m = edge_mask(300, n_p)
    np.testing.assert_array_equal(a_hat[m], a[m])


@pytest.mark.parametrize("n_p", [1, 4, 7])
def test_exact_edges_recover_whole_block(n_p):
    cfg = det(n_p, RRC5, edges="exact")
    a = random_symbols(40, np.random.default_rng(2))
    np.testing.assert_array_equal(detect_hard(transmit_noiseless(a, RRC5), cfg), a)


def test_toy_single_sample_decision():
    cfg = det(1, TOY_TAPS)
    assert detect_hard(np.array([-0.75]), cfg)[0] == -1


def test_antipodal_decisions():
    cfg = det(5, RRC5)
    y = add_awgn(transmit_noiseless(random_symbols(200, np.random.default_rng(1)), RRC5), 0.4,
                 np.random.default_rng(2))
    np.testing.assert_array_equal(detect_hard(y, cfg), -detect_hard(-y.samples, cfg))


def test_llr_clamped_on_codebook_point():
    cfg = det(3, TOY_TAPS, clamp=30.0)
    cb = cfg.codebook
    k = int(np.flatnonzero(cb.labels == 1)[-1])
    y = cb.samples[k]  # a 3-sample block equal to one class sample
    llr = detect_soft(y, cfg, sigma=0.01)
    assert llr[1] == 30.0


@pytest.mark.parametrize("yv", [-1.3, -0.2, 0.0, 0.45, 2.0])
def test_single_tap_llr_closed_form(yv):
    cfg = det(1, TapSet([1.0]), n_l=2)
    sigma = 0.7
    llr = detect_soft(np.array([yv]), cfg, sigma)
    assert llr[0] == pytest.approx(2 * yv / sigma ** 2, abs=1e-12)


def test_symmetric_candidates_give_zero_llr():
    cfg = det(1, TOY_TAPS, n_l=8)
    assert detect_soft(np.array([0.0]), cfg, 0.5)[0] == pytest.approx(0.0, abs=1e-15)


def test_soft_rejects_bad_sigma():
    cfg = det(1, TOY_TAPS)
    for s in (0.0, -1.0):
        with pytest.raises(ValueError):
            detect_soft(np.array([0.1]), cfg, s)


def test_config_validation():
    cb = build_codebook(CodebookParams(1, 3, TOY_TAPS))
    with pytest.raises(ValueError):
        DetectorConfig(cb, n_l=9)
    with pytest.raises(ValueError):
        DetectorConfig(cb, n_l=0)
    with pytest.raises(ValueError):
        DetectorConfig(cb, edges="wrap")


def test_missing_class_is_appended():
    # far out on the positive side all 4 nearest rows are +1; the LLR must stay finite
    cfg = det(1, TOY_TAPS, n_l=2, clamp=1e9)
    llr = detect_soft(np.array([3.0]), cfg, 1.0)[0]
    # candidates: 1.4 and 0.8 (both +1), plus nearest -1 row at -0.2
    expect = np.logaddexp(-(1.6 ** 2) / 2, -(2.2 ** 2) / 2) - (-(3.2 ** 2) / 2)
    assert llr == pytest.approx(expect, abs=1e-12)


def test_one_per_class_sign_matches_hard():
    cfg = det(5, RRC5, n_l=1, clamp=1e9)
    a = random_symbols(400, np.random.default_rng(7))
    y = add_awgn(transmit_noiseless(a, FULL06), 0.5, np.random.default_rng(8))
    hard = detect_hard(y, cfg)
    soft = detect_soft(y, cfg, 0.5)
    np.testing.assert_array_equal(np.sign(soft), hard)


def test_small_sigma_limit():
    cfg = det(7, RRC5)
    a = random_symbols(200, np.random.default_rng(4))
    llr = detect_soft(transmit_noiseless(a, RRC5), cfg, 1e-4)
    m = edge_mask(200, 7)
    np.testing.assert_array_equal(np.sign(llr[m]), a[m])


def test_llr_bounded_by_clamp():
    cfg = det(3, RRC5, clamp=5.0)
    y = add_awgn(transmit_noiseless(random_symbols(100, np.random.default_rng(0)), RRC5), 0.2,
                 np.random.default_rng(1))
    assert np.abs(detect_soft(y, cfg, 0.2)).max() <= 5.0


def test_operation_counter():
    cfg = det(5, RRC5)
    counter = OpCounter()
    detect_hard(np.zeros(50), cfg, counter)
    assert counter.distance_scans == 50 * 2 ** 9
    assert counter.symbols == 50
    detect_soft(np.zeros(50), cfg, 1.0, counter)
    assert counter.distance_scans == 100 * 2 ** 9


def test_priors_match_oracle():
    # whole-block window with exact edges: the detector sums over the same hypotheses
    rng = np.random.default_rng(12)
    n = 6
    a = random_symbols(n, rng)
    y = add_awgn(transmit_noiseless(a, TOY_TAPS), 0.6, rng)
    priors = rng.normal(0, 1.5, n)
    cfg = DetectorConfig(build_codebook(CodebookParams(2 * n - 1, 3, TOY_TAPS)),
                         n_l=2 ** (2 * n + 1), clamp=1e9, priors=priors, edges="exact")
    ours = detect_soft(y, cfg, 0.6)
    ref = exact_llr(y, TOY_TAPS, 0.6, priors=priors).llrs
    np.testing.assert_allclose(ours, ref, atol=1e-9)


def test_priors_length_checked():
    cfg = det(1, TOY_TAPS, priors=np.zeros(3))
    with pytest.raises(ValueError):
        detect_soft(np.zeros(4), cfg, 1.0)


def test_truncation_error_examples():
    assert window_truncation_error(np.ones(9), TOY_TAPS, 3, 4) == 0.0
    assert window_truncation_error(np.ones(9), TOY_TAPS, 1, 4) == pytest.approx(0.6)


def test_truncation_error_bound_rrc():
    rng = np.random.default_rng(21)
    bound = sum(abs(FULL06.tap(l)) for l in range(-40, 41) if abs(l) > 6)
    for _ in range(200):
        a = random_symbols(101, rng)
        assert abs(window_truncation_error(a, FULL06, 13, 50)) <= bound + 1e-15
    # the bound is attained by the sign-matched pattern
    a = np.ones(101)
    for l in range(-40, 41):
        if abs(l) > 6:
            a[50 - l] = np.sign(FULL06.tap(l)) or 1.0
    assert window_truncation_error(a, FULL06, 13, 50) == pytest.approx(bound, rel=1e-12)


def test_truncation_error_is_residual():
    rng = np.random.default_rng(3)
    a = random_symbols(60, rng)
    y = transmit_noiseless(a, FULL06)
    for i in (0, 10, 30, 59):
        inside = sum(a[i - l] * FULL06.tap(l) for l in range(-6, 7) if 0 <= i - l < 60)
        assert y[i] - inside == pytest.approx(window_truncation_error(a, FULL06, 13, i), abs=1e-14)


def test_received_block_input():
    cfg = det(3, TOY_TAPS)
    a = np.array([1.0, -1, 1, 1, -1])
    blk = ReceivedBlock(transmit_noiseless(a, TOY_TAPS))
    np.testing.assert_array_equal(detect_hard(blk, cfg)[1:-1], a[1:-1])
