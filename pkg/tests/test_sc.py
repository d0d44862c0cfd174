import numpy as np
import pytest

from helpers import BmeraEnumOracle, delta_prior, designed_frozen, random_prior

from bmera.gf2 import bit_reversal_perm, encode_bmera
from bmera.sc import (DecodeError, DecoderState, check_prior, decode_sc,
                      frozen_mask)


def test_prior_validation():
    with pytest.raises(ValueError):
        decode_sc(np.ones((8, 2)), [])             # pairs sum to 2
    with pytest.raises(ValueError):
        decode_sc(np.full((6, 2), 0.5), [])        # not a power of two
    with pytest.raises(ValueError):
        decode_sc(np.full((2, 2), 0.5), [])        # below minimum length
    bad = np.full((8, 2), 0.5)
    bad[3] = (-0.1, 1.1)
    with pytest.raises(ValueError):
        decode_sc(bad, [])
    with pytest.raises(ValueError):
        frozen_mask([9], 8)


def test_all_frozen_noiseless_zero():
    n = 8
    res = decode_sc(delta_prior(np.zeros(n, dtype=np.uint8)), range(n))
    assert not res.u_hat.any()
    assert not res.c_hat.any()


@pytest.mark.parametrize("n", [4, 8, 64, 1024])
def test_noiseless_round_trip(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        u = rng.integers(0, 2, n).astype(np.uint8)
        c = encode_bmera(u)
        res = decode_sc(delta_prior(c), [])
        assert np.array_equal(res.u_hat, u)
        assert np.array_equal(res.c_hat, c)


def test_noiseless_round_trip_with_frozen():
    n = 64
    rng = np.random.default_rng(7)
    frozen = designed_frozen("bmera", n, 32)
    for _ in range(10):
        u = np.zeros(n, dtype=np.uint8)
        mask = np.ones(n, dtype=bool)
        mask[list(frozen)] = False
        u[mask] = rng.integers(0, 2, mask.sum())
        c = encode_bmera(u)
        res = decode_sc(delta_prior(c), frozen)
        assert np.array_equal(res.u_hat, u)
        assert np.array_equal(res.c_hat, c)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_joints_match_enumeration(n):
    """Every exposed 3-bit joint equals the exhaustive conditional posterior."""
    oracle = BmeraEnumOracle(n)
    rev = bit_reversal_perm(n)
    rng = np.random.default_rng(n + 1)
    for _ in range(20):
        prior = random_prior(rng, n)
        res = decode_sc(prior, [], collect_joints=True)
        expected = oracle.joints(prior, res.u_hat[rev])
        assert np.abs(expected - res.joints).max() < 1e-9 * np.maximum(
            expected, 1e-30).max()
        np.testing.assert_allclose(res.joints, expected, rtol=1e-9, atol=1e-15)


def test_joints_match_enumeration_with_frozen_conditioning():
    n = 8
    oracle = BmeraEnumOracle(n)
    rev = bit_reversal_perm(n)
    rng = np.random.default_rng(77)
    frozen = designed_frozen("bmera", n, 4)
    for _ in range(20):
        prior = random_prior(rng, n)
        res = decode_sc(prior, frozen, collect_joints=True)
        # conditioning is on the decoder's own decisions (frozen forced to 0),
        # and the joint itself is over unrestricted inputs
        expected = oracle.joints(prior, res.u_hat[rev])
        np.testing.assert_allclose(res.joints, expected, rtol=1e-9, atol=1e-15)


def test_reference_engine_matches_fast():
    rng = np.random.default_rng(5)
    for n in (4, 8, 16):
        for _ in range(10):
            prior = random_prior(rng, n)
            ref = decode_sc(prior, [2, 5 % n], engine="reference", collect_joints=True)
            fast = decode_sc(prior, [2, 5 % n], engine="fast", collect_joints=True)
            assert np.array_equal(ref.u_hat, fast.u_hat)
            assert np.array_equal(ref.c_hat, fast.c_hat)
            np.testing.assert_allclose(ref.joints, fast.joints, rtol=0, atol=1e-12)


def test_uniform_prior_gives_uniform_joints():
    n = 16
    prior = np.full((n, 2), 0.5)
    res = decode_sc(prior, [], collect_joints=True)
    np.testing.assert_allclose(res.joints, 1.0 / 8.0, rtol=0, atol=1e-12)


def test_joint_normalization_and_nonnegativity():
    rng = np.random.default_rng(9)
    for _ in range(10):
        prior = random_prior(rng, 32)
        res = decode_sc(prior, range(0, 32, 3), collect_joints=True)
        assert np.all(res.joints >= 0)
        np.testing.assert_allclose(res.joints.sum(axis=1), 1.0, atol=1e-9)


def test_frozen_forcing():
    rng = np.random.default_rng(11)
    frozen = [0, 3, 9, 31, 17]
    for _ in range(20):
        prior = random_prior(rng, 32)
        res = decode_sc(prior, frozen)
        assert not res.u_hat[frozen].any()


def test_deterministic():
    rng = np.random.default_rng(13)
    prior = random_prior(rng, 64)
    a = decode_sc(prior, range(0, 64, 2))
    b = decode_sc(prior, range(0, 64, 2))
    assert np.array_equal(a.u_hat, b.u_hat)
    assert np.array_equal(a.c_hat, b.c_hat)


def test_chat_is_reencoding_of_uhat():
    rng = np.random.default_rng(15)
    for n in (8, 64, 256):
        prior = random_prior(rng, n)
        res = decode_sc(prior, range(0, n, 4))
        assert np.array_equal(res.c_hat, encode_bmera(res.u_hat))


def test_impossible_evidence_raises():
    # conflicting deltas that admit no codeword: freeze everything so the
    # decoder conditions on the all-zero word, then pin one leaf to 1
    n = 8
    prior = delta_prior(np.zeros(n, dtype=np.uint8))
    prior[0] = (0.0, 1.0)
    with pytest.raises(DecodeError):
        decode_sc(prior, range(n))
    with pytest.raises(DecodeError):
        decode_sc(prior, range(n), engine="reference")


# ---- operation-level checks against the reference state -----------------


def test_base_layer_delta_prior():
    """Exact channel: the base joint is a delta on the matching bit triple."""
    n = 4
    rng = np.random.default_rng(17)
    rev = bit_reversal_perm(n)
    for _ in range(8):
        u = rng.integers(0, 2, n).astype(np.uint8)
        c = encode_bmera(u)
        st = DecoderState(delta_prior(c)[rev])
        st.init_3bit_channels(0)
        joint = st.P[2][0]
        u_phase = u[rev]
        idx = 4 * u_phase[0] + 2 * u_phase[1] + u_phase[2]
        assert joint[idx] == pytest.approx(1.0)


def test_base_layer_uniform():
    st = DecoderState(np.full((8, 2), 0.5))
    st.init_3bit_channels(0)
    np.testing.assert_allclose(st.P[2], 1.0 / 8.0)


def test_base_layer_rejects_bad_phase():
    st = DecoderState(np.full((8, 2), 0.5))
    with pytest.raises(ValueError):
        st.init_3bit_channels(2)


def test_calc_p_range_checks():
    st = DecoderState(np.full((16, 2), 0.5))
    with pytest.raises(ValueError):
        st.recursively_calc_p(1, 0)
    with pytest.raises(ValueError):
        st.recursively_calc_p(4, 14)  # phase beyond 2^lam - 3


def test_last_phase_has_no_marginalization():
    """At the closing phase the joint is a plain product of the two child
    joints (no sums), so its entries factor accordingly."""
    n = 8
    rng = np.random.default_rng(19)
    prior = random_prior(rng, n)[bit_reversal_perm(n)]
    st = DecoderState(prior)
    m = st.m
    # drive the decoder to the last phase with all-zero decisions
    for phi in range(n - 2):
        st.recursively_calc_p(m, phi)
        st.B[m][0][phi] = 0
        st.recursively_update_b(m, phi)
        if phi == n - 3:
            break
    # recompute by hand from the stored child joints
    pt, pb = st.P[m - 1][0], st.P[m - 1][1]
    bb = st.B[m][0]
    phi = n - 3
    byhand = np.zeros(8)
    for u in range(8):
        u0, u1, u2 = (u >> 2) & 1, (u >> 1) & 1, u & 1
        ub = ((bb[phi - 2] ^ bb[phi - 1]) << 2) | ((u0 ^ u1) << 1) | (u2 ^ bb[0])
        ut = ub ^ ((bb[phi - 3] << 2) | (bb[phi - 1] << 1) | u1)
        byhand[u] = pt[ut] * pb[ub]
    byhand /= byhand.sum()
    np.testing.assert_allclose(st.expose_joint(), byhand, atol=1e-12)


def test_update_b_early_returns():
    st = DecoderState(np.full((8, 2), 0.5))
    st.B[3][0][1] = 1
    before = {lam: st.B[lam].copy() for lam in st.B}
    st.recursively_update_b(3, 1)  # odd, not the closing phase: no-op
    for lam in before:
        assert np.array_equal(before[lam], st.B[lam])


def test_update_b_zero_propagation():
    st = DecoderState(np.full((8, 2), 0.5))
    st.B[3][0][:] = 0
    for phi in range(8):
        st.recursively_update_b(3, phi)
    assert not st.B[0].astype(np.int64).any()


def test_check_prior_accepts_tolerance():
    prior = np.full((8, 2), 0.5)
    prior[0] = (0.5000004, 0.4999996)
    check_prior(prior)
