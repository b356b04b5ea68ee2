"""Gluing two three-party distributions that share a marginal.

Alice measures ``a1`` and ``a2`` jointly; Bob measures either ``b1`` or
``b2``.  The two observed tables ``p(a1, a2, b1)`` and ``p(a1, a2, b2)``
agree on ``p(a1, a2)`` when Bob cannot signal, and then

    p(a1, a2, b1, b2) = p(a1, a2, b1) p(a1, a2, b2) / p(a1, a2)

is a single distribution with both tables as marginals.  No CHSH violation
is possible under such a distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SignalingError

NORM_TOL = 1e-12
SIGNAL_TOL = 1e-9


def _probabilities(p, ndim, what):
    arr = np.array(p, dtype=float)
    if arr.ndim != ndim:
        raise InvalidInputError(f"{what} needs {ndim} axes, got {arr.ndim}")
    if arr.size == 0 or min(arr.shape) < 1:
        raise InvalidInputError(f"{what} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} has non-finite entries")
    if arr.min() < 0:
        raise InvalidInputError(f"{what} has a negative entry ({arr.min():.3e})")
    total = arr.sum()
    if abs(total - 1) > NORM_TOL:
        raise InvalidInputError(f"{what} sums to {total!r}, not 1")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TripleDistribution:
    """``p[a1, a2, b]`` for one fixed choice of Bob's measurement."""

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _probabilities(self.p, 3, "triple distribution"))

    @property
    def shape(self):
        return self.p.shape

    def alice_marginal(self) -> np.ndarray:
        return self.p.sum(axis=2)


@dataclass(frozen=True)
class QuadDistribution:
    """``p[a1, a2, b1, b2]``."""

    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _probabilities(self.p, 4, "quadruple distribution"))

    def marginal_b1(self) -> np.ndarray:
        return self.p.sum(axis=3)

    def marginal_b2(self) -> np.ndarray:
        return self.p.sum(axis=2)

    def alice_marginal(self) -> np.ndarray:
        return self.p.sum(axis=(2, 3))


def signaling_deviation(t1: TripleDistribution, t2: TripleDistribution) -> float:
    if t1.shape[:2] != t2.shape[:2]:
        raise InvalidInputError(f"Alice's outcome counts differ: {t1.shape[:2]} vs {t2.shape[:2]}")
    return float(np.max(np.abs(t1.alice_marginal() - t2.alice_marginal())))


def join_distributions(t1: TripleDistribution, t2: TripleDistribution,
                       tol: float = SIGNAL_TOL) -> QuadDistribution:
    """Combine the two tables through their common ``p(a1, a2)``.

    Entries with ``p(a1, a2) = 0`` are set to 0; both factors vanish there.
    The marginal used as denominator is the average of the two (they agree
    within ``tol``).

    Raises :class:`SignalingError` with the largest marginal deviation when
    the tables disagree on ``p(a1, a2)`` by more than ``tol``.
    """
    if not isinstance(t1, TripleDistribution):
        t1 = TripleDistribution(t1)
    if not isinstance(t2, TripleDistribution):
        t2 = TripleDistribution(t2)
    dev = signaling_deviation(t1, t2)
    if dev > tol:
        raise SignalingError(f"marginal p(a1, a2) depends on Bob's setting "
                             f"(max deviation {dev:.3e})", max_deviation=dev)
    m1 = t1.alice_marginal()
    m2 = t2.alice_marginal()
    quad = t1.p[:, :, :, None] * t2.p[:, :, None, :]
    denom = np.sqrt(m1 * m2)[:, :, None, None]
    out = np.divide(quad, denom, out=np.zeros_like(quad), where=denom > 0)
    # renormalize away rounding so the result passes the sum-to-one check
    out /= out.sum()
    return QuadDistribution(out)


def marginal_residuals(q: QuadDistribution, t1: TripleDistribution,
                       t2: TripleDistribution) -> dict:
    """Largest entrywise deviation of each reproduced marginal."""
    return {
        "b1": float(np.max(np.abs(q.marginal_b1() - t1.p))),
        "b2": float(np.max(np.abs(q.marginal_b2() - t2.p))),
        "alice": float(np.max(np.abs(q.alice_marginal() - t1.alice_marginal()))),
    }


_SIGNS = np.array([1.0, -1.0])


def chsh_value_classical(q: QuadDistribution) -> float:
    """``|E[a1 (b1 + b2)] + E[a2 (b1 - b2)]| / 2`` with outcome 0 read as +1."""
    if not isinstance(q, QuadDistribution):
        q = QuadDistribution(q)
    if q.p.shape != (2, 2, 2, 2):
        raise InvalidInputError(f"CHSH needs binary outcomes, got shape {q.p.shape}")
    a1, a2, b1, b2 = np.meshgrid(_SIGNS, _SIGNS, _SIGNS, _SIGNS, indexing="ij")
    f = a1 * (b1 + b2) + a2 * (b1 - b2)
    return float(abs(np.sum(q.p * f)) / 2)
