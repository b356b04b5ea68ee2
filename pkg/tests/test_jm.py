import warnings

import numpy as np
import pytest

from conftest import I2, SX, SY, SZ, noisy_pair
from incompat import chsh, jm
from incompat.errors import SizeLimitError
from incompat.measurement import mix_noise
from incompat.sampling import random_effect

SQRT2_LAMBDA = (np.sqrt(2) - 1) / 2


def test_projector_pair_is_compatible_with_exact_joint():
    pi = np.diag([1.0, 0.0])
    r = jm.analyze_pair(pi, pi)
    assert r.jointly_measurable and r.verdict == jm.COMPATIBLE and not r.marginal
    assert r.mu_robustness == 0 and r.certificate is None
    for got, want in zip(r.joint.elements(), (pi, 0 * pi, 0 * pi, I2 - pi)):
        assert np.allclose(got, want, atol=1e-7)


def test_sharp_pair_is_incompatible():
    r = jm.analyze_pair(*noisy_pair(1.0))
    assert not r.jointly_measurable and r.verdict == jm.INCOMPATIBLE
    assert r.lambda_star == pytest.approx(SQRT2_LAMBDA, abs=1e-6)
    assert r.lambda0 == pytest.approx(1 + 1 / np.sqrt(2), abs=1e-6)
    assert r.joint is None and r.certificate.value == pytest.approx(SQRT2_LAMBDA, abs=1e-6)
    assert r.mu_robustness == pytest.approx(1 - 1 / r.lambda0)


def test_zero_pair():
    r = jm.analyze_pair(0 * I2, 0 * I2)
    assert r.lambda0 == pytest.approx(0, abs=1e-7)
    assert r.mu_robustness == 0 and r.jointly_measurable


def test_report_invariants_on_random_pairs():
    rng = np.random.default_rng(3)
    for k in range(30):
        d = (2, 3, 4)[k % 3]
        r = jm.analyze_pair(random_effect(d, rng), random_effect(d, rng))
        assert r.jointly_measurable == (r.lambda0 <= 1 + 1e-7)
        if not r.marginal:
            assert r.jointly_measurable == (r.lambda_star <= 1e-7)
        assert r.mu_robustness == jm.mu_from_lambda0(r.lambda0)
        assert (r.joint is not None) == r.jointly_measurable
        assert (r.certificate is not None) == (not r.jointly_measurable)
        if r.joint is not None:
            r.joint.validate(tol=1e-7)


def test_marginal_flag_when_tests_disagree():
    assert jm._verdict([True, False]) == (jm.MARGINAL, True)
    assert jm._verdict([True, True]) == (jm.COMPATIBLE, False)
    assert jm._verdict([False, False]) == (jm.INCOMPATIBLE, False)


def test_robustness_mu_examples():
    assert jm.robustness_mu(np.diag([0.3, 0.6]), np.diag([0.9, 0.1])) == 0
    assert jm.robustness_mu(I2 / 2, I2 / 2) == 0
    q, p = noisy_pair(1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mu = jm.robustness_mu(q, p)
    assert 0 < mu < 1
    w = mu + 1e-3
    assert jm.lambda0_sdp(mix_noise(q, I2 / 2, w), mix_noise(p, I2 / 2, w)) <= 1 + 1e-6


def test_noise_check_is_seeded():
    q, p = noisy_pair(1.0)
    a = jm.noise_check(q, p, 0.42, samples=4, seed=7)
    b = jm.noise_check(q, p, 0.42, samples=4, seed=7)
    assert a == b and len(a.lambda0_values) == 5


def test_uniform_noise_at_mu_can_leave_pair_incompatible():
    # a seeded counterexample: mixing with 1/2 at weight mu + 1e-3 is not always enough
    rng = np.random.default_rng(1)
    pairs = [(random_effect(d, rng), random_effect(d, rng)) for d in (2, 3, 4, 2, 3, 4)]
    q, p = pairs[5]
    mu = jm.mu_from_lambda0(jm.lambda0_sdp(q, p))
    w = mu + 1e-3
    q2, p2 = mix_noise(q, np.eye(4) / 2, w), mix_noise(p, np.eye(4) / 2, w)
    assert jm.lambda0_sdp(q2, p2) > 1 + 1e-4
    assert chsh.lambda_star_scan(q2, p2).lambda_star > 1e-4
    with pytest.warns(RuntimeWarning, match="still has"):
        jm.robustness_mu(q, p, samples=0)


def test_sharp_qubit_pairs_become_compatible_at_mu():
    for eta in (0.8, 0.9, 1.0):
        q, p = noisy_pair(eta)
        mu = jm.mu_from_lambda0(jm.lambda0_sdp(q, p))
        w = mu + 1e-3
        assert jm.lambda0_sdp(mix_noise(q, I2 / 2, w), mix_noise(p, I2 / 2, w)) <= 1 + 1e-6


def test_two_nvalued():
    qa = [np.diag(v) for v in ([0.2, 0.5, 0.1], [0.3, 0.2, 0.6], [0.5, 0.3, 0.3])]
    r = jm.analyze_two_nvalued(qa, qa[::-1])
    assert r.jointly_measurable and r.lambda_star is None and r.joint is None
    e1 = [I2, 0 * I2, 0 * I2]
    e2 = [0 * I2, I2, 0 * I2]
    assert jm.analyze_two_nvalued(e1, e2).jointly_measurable
    q, p = noisy_pair(1.0)
    r2 = jm.analyze_two_nvalued([q, I2 - q], [p, I2 - p])
    assert r2.lambda0 == pytest.approx(jm.analyze_pair(q, p).lambda0, abs=1e-7)
    cert = r2.certificate
    assert np.trace(cert.rho).real == pytest.approx(1)
    assert cert.value == pytest.approx(r2.lambda0, abs=1e-6)


def test_multi_dichotomic():
    rng = np.random.default_rng(4)
    diag = [np.diag(rng.uniform(0, 1, 3)) for _ in range(4)]
    assert jm.analyze_multi_dichotomic(diag).jointly_measurable
    r = jm.analyze_multi_dichotomic([(I2 + SX) / 2, (I2 + SY) / 2, (I2 + SZ) / 2])
    assert not r.jointly_measurable and r.lambda0 > 1
    assert r.certificate.value == pytest.approx(r.lambda0, abs=1e-6)
    assert jm.analyze_multi_dichotomic([I2 / 2] * 4).lambda0 <= 1 + 1e-7
    with pytest.raises(SizeLimitError):
        jm.analyze_multi_dichotomic([I2 / 2] * 13)
