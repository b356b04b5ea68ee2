from dataclasses import replace

import numpy as np
import pytest

from conftest import I2, SX, SY, SZ, noisy_pair
from incompat import sdp
from incompat.errors import InconsistentSolutionError, InvalidInputError, SizeLimitError
from incompat.sampling import random_effect

SQRT2_LAMBDA = (np.sqrt(2) - 1) / 2


def scalar_problem(C):
    """``min x`` subject to ``x 1 >= C``."""
    C = np.asarray(C, dtype=complex)
    return sdp.SdpProblem(np.array([1.0]), (sdp.Block("b", C, np.array([0]), np.eye(len(C))[None]),))


def check_certificates(prob, sol, tol=1e-7):
    assert sol.status == sdp.OPTIMAL
    slack = [a - b.C for a, b in zip(prob.apply(sol.x), prob.blocks)]
    assert min(np.linalg.eigvalsh(s)[0] for s in slack) >= -tol
    assert min(np.linalg.eigvalsh(x)[0] for x in sol.X) >= -tol
    assert np.max(np.abs(prob.adjoint(sol.X) - prob.c)) <= tol
    assert -1e-7 <= sol.gap <= 1e-6


@pytest.mark.parametrize("C, value", [(np.diag([1.0, 2.0]), 2.0), (SX, 1.0)])
def test_scalar_examples(C, value):
    prob = scalar_problem(C)
    sol = sdp.solve_sdp(prob)
    check_certificates(prob, sol)
    assert sol.primal_value == pytest.approx(value, abs=1e-7)


def test_dense_views_match_blocks():
    prob = sdp.encode_pair_primal(*noisy_pair(0.8))
    x = np.linspace(-1, 1, prob.n)
    dense = sum(xi * prob.F_dense(i) for i, xi in enumerate(x))
    blocks = prob.apply(x)
    start = 0
    for b in blocks:
        k = b.shape[0]
        assert np.allclose(dense[start:start + k, start:start + k], b)
        start += k
    assert prob.C_dense().shape == dense.shape


def test_infeasible_and_unbounded_status():
    # x >= 1 and -x >= 0 cannot both hold
    blocks = (sdp.Block("a", np.eye(1), np.array([0]), np.ones((1, 1, 1))),
              sdp.Block("b", np.zeros((1, 1)), np.array([0]), -np.ones((1, 1, 1))))
    assert sdp.solve_sdp(sdp.SdpProblem(np.array([1.0]), blocks)).status == sdp.INFEASIBLE
    # min x subject to -x >= 0 is unbounded
    blocks = (sdp.Block("b", np.zeros((1, 1)), np.array([0]), -np.ones((1, 1, 1))),)
    assert sdp.solve_sdp(sdp.SdpProblem(np.array([1.0]), blocks)).status == sdp.UNBOUNDED


def test_pair_primal_shape_and_trivial_values():
    prob = sdp.encode_pair_primal(I2 / 2, I2 / 2)
    assert prob.n == 5 and sum(prob.block_sizes) == 8
    zero = sdp.solve_sdp(sdp.encode_pair_primal(0 * I2, 0 * I2))
    assert zero.primal_value == pytest.approx(0, abs=1e-7)
    one = sdp.solve_sdp(sdp.encode_pair_primal(I2, I2))
    assert one.primal_value == pytest.approx(1, abs=1e-7)


@pytest.mark.parametrize("q, p, value", [
    (I2 / 2, I2 / 2, -0.5),
    ((I2 + SX) / 2, (I2 - SZ) / 2, SQRT2_LAMBDA),
    (np.diag([1.0, 0]), np.diag([1.0, 0]), 0.0),
])
def test_lambda_star_examples(q, p, value):
    prob = sdp.encode_pair_lambda_star(q, p)
    sol = sdp.solve_sdp(prob)
    check_certificates(prob, sol)
    assert sol.primal_value == pytest.approx(value, abs=1e-6)


def test_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        sdp.encode_pair_primal(I2, np.eye(3))
    with pytest.raises(InvalidInputError):
        sdp.encode_two_nvalued([I2, 0 * I2], [np.eye(3), 0 * np.eye(3)])
    with pytest.raises(InvalidInputError):
        sdp.encode_two_nvalued([I2, 0 * I2], [I2, 0 * I2, 0 * I2])
    with pytest.raises(InvalidInputError):
        sdp.encode_multi_dichotomic([I2])
    with pytest.raises(SizeLimitError):
        sdp.encode_multi_dichotomic([I2 / 2] * 13)


def test_two_nvalued_examples():
    qa = [np.diag(v) for v in ([0.2, 0.5, 0.1], [0.3, 0.2, 0.6], [0.5, 0.3, 0.3])]
    sol = sdp.solve_sdp(sdp.encode_two_nvalued(qa, qa[::-1]))
    assert sol.primal_value <= 1 + 1e-7
    # the product R_ij = Q_i P_j is a joint observable with these marginals
    R = [[qa[i] @ qa[2 - j] for j in range(3)] for i in range(3)]
    for i in range(3):
        assert np.allclose(sum(R[i]), qa[i])
        assert np.allclose(sum(row[i] for row in R), qa[2 - i])
    e = [np.eye(3), 0 * np.eye(3), 0 * np.eye(3)]
    assert sdp.solve_sdp(sdp.encode_two_nvalued(e, e)).primal_value <= 1 + 1e-7


def test_multi_dichotomic_examples():
    assert sdp.solve_sdp(sdp.encode_multi_dichotomic([I2 / 2] * 3)).primal_value <= 1 + 1e-7
    triple = sdp.solve_sdp(sdp.encode_multi_dichotomic([(I2 + SX) / 2, (I2 + SY) / 2, (I2 + SZ) / 2]))
    assert triple.primal_value > 1


def test_encoder_equivalence_on_random_instances():
    rng = np.random.default_rng(42)
    for _ in range(50):
        d = int(rng.integers(2, 4))
        q, p = random_effect(d, rng), random_effect(d, rng)
        pair = sdp.solve_sdp(sdp.encode_pair_primal(q, p)).primal_value
        n2 = sdp.solve_sdp(sdp.encode_two_nvalued([q, np.eye(d) - q], [p, np.eye(d) - p])).primal_value
        m2 = sdp.solve_sdp(sdp.encode_multi_dichotomic([q, p])).primal_value
        assert abs(n2 - pair) <= 1e-7 and abs(m2 - pair) <= 1e-7


def test_weak_duality_and_determinism():
    rng = np.random.default_rng(8)
    for _ in range(20):
        q, p = random_effect(3, rng), random_effect(3, rng)
        prob = sdp.encode_pair_lambda_star(q, p)
        a, b = sdp.solve_sdp(prob), sdp.solve_sdp(prob)
        assert a.primal_value >= a.dual_value - 1e-9
        assert a.gap <= 1e-6 * (1 + abs(a.primal_value))
        assert np.array_equal(a.x, b.x) and a.iterations == b.iterations


def test_dual_certificate_examples():
    prob = sdp.encode_pair_lambda_star(I2 / 2, I2 / 2)
    cert = sdp.extract_dual_certificate(prob, sdp.solve_sdp(prob))
    assert cert.value == pytest.approx(-0.5, abs=1e-7)
    assert np.trace(cert.rho).real == pytest.approx(1)

    prob = sdp.encode_pair_lambda_star(*noisy_pair(1.0))
    cert = sdp.extract_dual_certificate(prob, sdp.solve_sdp(prob))
    assert cert.value == pytest.approx(SQRT2_LAMBDA, abs=1e-6)
    assert np.allclose(cert.rho, cert.Y + cert.Z)

    prob = sdp.encode_pair_lambda_star(np.diag([0.3, 0.9]), np.diag([0.8, 0.1]))
    assert sdp.extract_dual_certificate(prob, sdp.solve_sdp(prob)).value <= 1e-7

    prob = sdp.encode_pair_primal(*noisy_pair(1.0))
    cert = sdp.extract_dual_certificate(prob, sdp.solve_sdp(prob))
    assert cert.kind == "pair_primal" and cert.value == pytest.approx(1 + 1 / np.sqrt(2), abs=1e-6)


def test_dual_certificate_rejects_bad_input():
    prob = sdp.encode_pair_lambda_star(I2 / 2, I2 / 2)
    sol = sdp.solve_sdp(prob)
    broken = replace(sol, X=tuple(-x for x in sol.X))
    with pytest.raises(InconsistentSolutionError):
        sdp.extract_dual_certificate(prob, broken)
    with pytest.raises(InconsistentSolutionError):
        sdp.extract_dual_certificate(prob, replace(sol, status=sdp.MAX_ITERATIONS))
    tri = sdp.encode_multi_dichotomic([I2 / 2] * 3)
    with pytest.raises(InvalidInputError):
        sdp.extract_dual_certificate(tri, sdp.solve_sdp(tri))


def test_primal_operator_is_feasible_S():
    prob = sdp.encode_pair_primal(np.diag([0.4, 0.9]), np.diag([0.7, 0.2]))
    sol = sdp.solve_sdp(prob)
    s = sdp.primal_operator(prob, sol)
    assert np.allclose(s, s.conj().T)
    assert np.linalg.eigvalsh(s)[0] >= -1e-8
