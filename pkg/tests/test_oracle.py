import numpy as np
import pytest

from ftnlcc.channel import add_awgn, channel_matrix, random_symbols, transmit_noiseless
from ftnlcc.oracle import MAX_ORACLE_LEN, all_sequences, exact_llr, exact_ml_sequence
from ftnlcc.pulse_shaping import TOY_TAPS, RrcParams, TapSet, sample_taps, truncate_taps

RRC5 = truncate_taps(sample_taps(RrcParams(0.35), 0.6), 5)


def naive_llr(y, taps, sigma):
    """Plain probability sums over every sequence, no log-domain tricks."""
    n = len(y)
    H = channel_matrix(taps, n)
    num = np.zeros(n)
    den = np.zeros(n)
    for k in range(2 ** n):
        a = np.array([1.0 if (k >> (n - 1 - j)) & 1 else -1.0 for j in range(n)])
        p = np.exp(-np.sum((y - H @ a) ** 2) / (2 * sigma ** 2))
        num += np.where(a > 0, p, 0.0)
        den += np.where(a < 0, p, 0.0)
    return np.log(num / den)


def test_single_symbol_closed_form():
    assert exact_llr(np.array([0.5]), TapSet([1.0]), 1.0).llrs[0] == pytest.approx(1.0)


def test_zero_observation_zero_llr():
    for taps in (TOY_TAPS, RRC5):
        np.testing.assert_allclose(exact_llr(np.zeros(7), taps, 0.8).llrs, 0.0, atol=1e-12)


@pytest.mark.parametrize("taps", [TOY_TAPS, RRC5])
def test_matches_naive_probability_sum(taps):
    rng = np.random.default_rng(5)
    y = rng.normal(0, 1, 6)
    np.testing.assert_allclose(exact_llr(y, taps, 0.5).llrs, naive_llr(y, taps, 0.5), atol=1e-9)


def test_llr_sign_matches_map_bit_decisions():
    rng = np.random.default_rng(8)
    a = random_symbols(8, rng)
    y = add_awgn(transmit_noiseless(a, TOY_TAPS), 0.7, rng).samples
    res = exact_llr(y, TOY_TAPS, 0.7)
    # third route: explicit normalized posteriors per sequence
    A = all_sequences(8)
    H = channel_matrix(TOY_TAPS, 8)
    w = np.exp(-np.sum((y - A @ H.T) ** 2, axis=1) / (2 * 0.49))
    w /= w.sum()
    p1 = (w[:, None] * (A > 0)).sum(axis=0)
    np.testing.assert_array_equal(np.sign(res.llrs), np.where(p1 > 0.5, 1.0, -1.0))
    np.testing.assert_allclose(res.llrs, np.log(p1 / (1 - p1)), atol=1e-9)


def test_log_evidence_is_normalized_density():
    y = np.array([0.3, -1.1, 0.4])
    sigma = 0.6
    A = all_sequences(3)
    H = channel_matrix(TOY_TAPS, 3)
    d2 = np.sum((y - A @ H.T) ** 2, axis=1)
    dens = np.mean(np.exp(-d2 / (2 * sigma ** 2)) / (2 * np.pi * sigma ** 2) ** 1.5)
    assert exact_llr(y, TOY_TAPS, sigma).log_evidence == pytest.approx(np.log(dens), abs=1e-12)


def test_priors_shift():
    # with a single symbol the prior adds directly
    res = exact_llr(np.array([0.5]), TapSet([1.0]), 1.0, priors=np.array([0.7]))
    assert res.llrs[0] == pytest.approx(1.7)


def test_caps_and_errors():
    with pytest.raises(ValueError):
        exact_llr(np.zeros(MAX_ORACLE_LEN + 1), TOY_TAPS, 1.0)
    with pytest.raises(ValueError):
        exact_ml_sequence(np.zeros(MAX_ORACLE_LEN + 1), TOY_TAPS)
    with pytest.raises(ValueError):
        exact_llr(np.zeros(3), TOY_TAPS, 0.0)


def test_ml_noiseless_recovery():
    a = random_symbols(10, np.random.default_rng(1))
    np.testing.assert_array_equal(exact_ml_sequence(transmit_noiseless(a, RRC5), RRC5), a)


def test_ml_hand_example():
    np.testing.assert_array_equal(exact_ml_sequence([0.5, -0.2, 0.5], TOY_TAPS), [1, -1, 1])


def test_ml_antipodal():
    y = np.random.default_rng(2).normal(size=7)
    np.testing.assert_array_equal(exact_ml_sequence(-y, TOY_TAPS), -exact_ml_sequence(y, TOY_TAPS))
