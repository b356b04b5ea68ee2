import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incompat.errors import InvalidInputError, SignalingError
from incompat.nosignal import (
    QuadDistribution,
    TripleDistribution,
    chsh_value_classical,
    join_distributions,
    marginal_residuals,
)


def test_independent_tables_give_product():
    q = np.array([[0.1, 0.2], [0.3, 0.4]])
    r1, r2 = np.array([0.25, 0.75]), np.array([0.6, 0.4])
    quad = join_distributions(q[:, :, None] * r1, q[:, :, None] * r2)
    assert np.allclose(quad.p, q[:, :, None, None] * r1[:, None] * r2)


def test_uniform_tables():
    t = np.full((2, 2, 2), 1 / 8)
    assert np.allclose(join_distributions(t, t).p, 1 / 16)


def test_perfect_correlation():
    t1 = np.zeros((2, 2, 2))
    t1[0, 0, 0] = t1[1, 1, 1] = 0.5
    quad = join_distributions(t1, t1)
    expected = np.zeros((2,) * 4)
    expected[0, 0, 0, 0] = expected[1, 1, 1, 1] = 0.5
    assert np.array_equal(quad.p, expected)
    assert chsh_value_classical(quad) == pytest.approx(1.0)


def test_signaling_detected():
    t1 = np.full((2, 2, 2), 1 / 8)
    t2 = t1.copy()
    t2[0, 0, 0] += 0.05
    t2[1, 1, 0] -= 0.05
    with pytest.raises(SignalingError) as err:
        join_distributions(t1, t2)
    assert err.value.max_deviation == pytest.approx(0.05)


def test_validation():
    with pytest.raises(InvalidInputError, match="negative"):
        TripleDistribution(np.array([[[1.2, -0.2]]]))
    with pytest.raises(InvalidInputError, match="sums to"):
        TripleDistribution(np.full((2, 2, 2), 0.1))
    with pytest.raises(InvalidInputError, match="axes"):
        QuadDistribution(np.full((2, 2), 0.25))
    with pytest.raises(InvalidInputError, match="binary"):
        chsh_value_classical(np.full((3, 2, 2, 2), 1 / 24))
    with pytest.raises(InvalidInputError):
        join_distributions(np.full((2, 2, 2), 1 / 8), np.full((3, 2, 2), 1 / 12))


def test_chsh_examples():
    assert chsh_value_classical(np.full((2,) * 4, 1 / 16)) == 0
    det = np.zeros((2,) * 4)
    det[0, 0, 0, 0] = 1
    assert chsh_value_classical(det) == 1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), shape=st.tuples(*(st.integers(1, 4),) * 4), zeros=st.booleans())
def test_marginals_reproduced(seed, shape, zeros):
    na1, na2, nb1, nb2 = shape
    rng = np.random.default_rng(seed)
    alice = rng.dirichlet(np.ones(na1 * na2)).reshape(na1, na2)
    if zeros and alice.size > 1:
        alice[0, 0] = 0
        alice /= alice.sum()
    t1 = alice[:, :, None] * rng.dirichlet(np.ones(nb1), size=(na1, na2))
    t2 = alice[:, :, None] * rng.dirichlet(np.ones(nb2), size=(na1, na2))
    t1, t2 = TripleDistribution(t1 / t1.sum()), TripleDistribution(t2 / t2.sum())
    quad = join_distributions(t1, t2)
    assert max(marginal_residuals(quad, t1, t2).values()) <= 1e-12
    if zeros and alice.size > 1:
        assert np.all(quad.p[0, 0] == 0)


def test_classical_bound_on_random_quads():
    rng = np.random.default_rng(0)
    # sparse Dirichlet weights push mass onto deterministic vertices
    quads = rng.dirichlet(np.full(16, 0.05), size=10_000).reshape(-1, 2, 2, 2, 2)
    values = [chsh_value_classical(q / q.sum()) for q in quads]
    assert max(values) <= 1 + 1e-12
