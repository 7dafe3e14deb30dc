import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coqam.frame import FrameParams
from coqam.orthogonality import (
    check_oqam_ofdm,
    check_wcp_coqam,
    gram_oracle,
    s_beta_gamma,
    verify_appendix_b_identity,
    wcp_basis,
)
from coqam.pulses import Pulse, gen_gaussian, gen_raised_cosine, normalize_energy
from coqam.zak import orthogonalize_oqam


def brute_s(taps, m, v, beta, gamma, params):
    K, N, a = params.K, params.N, params.alpha
    return sum(
        taps[(n - m * K + beta) % N] * np.exp(2j * np.pi * v * (n - a / 2) / K) * np.conj(taps[(n + gamma) % N])
        for n in range(N)
    )


def map_gram_to_residual(report, params, a, b):
    """Residual entry that corresponds to Gram entry G[a, b]."""
    M, K = params.M, params.K
    k1, s1 = divmod(a, 2 * M)
    k2, s2 = divmod(b, 2 * M)

    def slot(s):
        return s // 2 if s % 2 == 0 else (s + 1) // 2 % M

    m = (slot(s1) - slot(s2)) % M
    v = (k1 - k2) % K
    cond = {(0, 0): 8, (1, 1): 9, (1, 0): 10, (0, 1): 11}[(s1 % 2, s2 % 2)]
    return report.residuals[report.conditions.index(cond), m, v]


def test_oqam_zero_lag_is_energy(rng):
    params = FrameParams(8, 4)
    p = normalize_energy(Pulse(rng.standard_normal(32)))
    r = check_oqam_ofdm(p, params)
    i = list(r.m_values).index(0)
    assert r.residuals[0, i, 0] < 1e-15
    r = check_wcp_coqam(p, params)
    assert r.residuals[0, 0, 0] < 1e-15


def test_raw_rc_fails(ref_params):
    r = check_oqam_ofdm(gen_raised_cosine(ref_params, 0.3), ref_params)
    assert not r.passed and r.max_residual > 1e-3


def test_reference_pulses_pass(ref_params, dzt_gaussian, dzt_rc):
    for q in (dzt_gaussian, dzt_rc):
        assert check_oqam_ofdm(q, ref_params).max_residual <= 1e-10
        assert check_wcp_coqam(q, ref_params).max_residual <= 1e-10


def test_report_shape_and_csv(ref_params, dzt_gaussian):
    r = check_oqam_ofdm(dzt_gaussian, ref_params)
    assert r.residuals.shape == (4, 2 * 9 + 1, 128)
    assert r.conditions == (4, 5, 6, 7)
    text = r.to_csv()
    lines = text.splitlines()
    assert lines[0] == "condition,m,v,residual"
    assert len(lines) == 1 + 4 * 19 * 128 + 1
    assert lines[-1].startswith("# family=oqam-ofdm") and "pass=True" in lines[-1]


def test_validation():
    params = FrameParams(4, 2)
    with pytest.raises(ValueError):
        check_oqam_ofdm(Pulse(np.ones(7)), params)
    with pytest.raises(ValueError):
        check_wcp_coqam(Pulse(np.ones(8) * (1 + 1j)), params)


@pytest.mark.parametrize("K, M", [(4, 2), (8, 4)])
def test_checker_matches_gram_oracle(rng, K, M):
    params = FrameParams(K, M)
    for _ in range(5):
        p = normalize_energy(Pulse(rng.standard_normal(params.N)))
        r = check_wcp_coqam(p, params)
        G = gram_oracle(p, params)
        dev = np.abs(G - np.eye(len(G)))
        mapped = np.array([[map_gram_to_residual(r, params, a, b) for b in range(len(G))] for a in range(len(G))])
        np.testing.assert_allclose(mapped, dev, atol=1e-12)


def test_gram_oracle_properties(rng):
    params = FrameParams(4, 2)
    q = orthogonalize_oqam(gen_gaussian(params, 0.5), params)
    G = gram_oracle(q, params)
    assert np.max(np.abs(G - np.eye(16))) <= 1e-10
    # beta=1.0 spreads over the whole 8-tap frame; evaluated deviation is 0.52
    raw = gram_oracle(gen_gaussian(params, 1.0), params)
    assert np.max(np.abs(raw - np.eye(16))) > 0.01
    for p in (q, Pulse(rng.standard_normal(8))):
        G = gram_oracle(p, params)
        assert np.max(np.abs(G - G.T)) <= 1e-14


def test_basis_order_matches_staggered_synthesis(rng):
    from coqam.modem import synth_wcp_staggered

    params = FrameParams(4, 3)
    p = Pulse(rng.standard_normal(12))
    rg = rng.standard_normal((4, 6))
    x = synth_wcp_staggered(rg, p, params).samples
    np.testing.assert_allclose(rg.reshape(-1) @ wcp_basis(p, params), x, atol=1e-12)


def test_s_beta_gamma_energy(rng):
    params = FrameParams(8, 3)
    p = normalize_energy(Pulse(rng.standard_normal(24)))
    assert abs(s_beta_gamma(p, 0, 0, 0, 0, params) - 1) < 1e-14


def test_s_beta_gamma_brute_force(rng):
    params = FrameParams(8, 3)
    p = Pulse(rng.standard_normal(24))
    for m in range(-3, 4):
        for v in range(8):
            for beta in (0, 4):
                for gamma in (0, 4):
                    got = s_beta_gamma(p, m, v, beta, gamma, params)
                    assert abs(got - brute_s(p.taps, m, v, beta, gamma, params)) < 1e-12


def test_s_beta_gamma_rejects_bad_offsets():
    with pytest.raises(ValueError):
        s_beta_gamma(Pulse(np.ones(8)), 0, 0, 1, 0, FrameParams(4, 2))


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    m=st.integers(-9, 9),
    v=st.integers(0, 7),
    P=st.sampled_from([-2, -1, 1, 2]),
    beta=st.sampled_from([0, 4]),
    gamma=st.sampled_from([0, 4]),
)
def test_s_beta_gamma_period_M(seed, m, v, P, beta, gamma):
    params = FrameParams(8, 3)
    p = Pulse(np.random.default_rng(seed).standard_normal(24))
    a = s_beta_gamma(p, m, v, beta, gamma, params)
    b = s_beta_gamma(p, m + P * 3, v, beta, gamma, params)
    assert abs(a - b) <= 1e-12


def test_appendix_b_identity(rng, ref_params):
    params = FrameParams(8, 3)
    assert verify_appendix_b_identity(Pulse(rng.standard_normal(24)), params) <= 1e-10
    assert verify_appendix_b_identity(Pulse(np.zeros(24)), params) == 0.0
    assert verify_appendix_b_identity(gen_gaussian(ref_params, 0.1), ref_params) <= 1e-9


def test_oqam_pass_implies_wcp_pass():
    rng = np.random.default_rng(2)
    params = FrameParams(16, 4)
    passed = 0
    for i in range(50):
        if i % 2:
            p = gen_raised_cosine(params, float(rng.uniform(0.05, 1.0)))
        else:
            p = gen_gaussian(params, float(rng.uniform(0.15, 1.0)))
        q = orthogonalize_oqam(p, params)
        for cand in (p, q):
            if check_oqam_ofdm(cand, params).passed:
                passed += 1
                assert check_wcp_coqam(cand, params).passed
    assert passed >= 50
