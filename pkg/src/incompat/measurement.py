"""Effects, POVMs and observables, and the constructions that relate them.

The central construction is :func:`joint_from_S`: two dichotomic measurements
``{Q, 1-Q}`` and ``{P, 1-P}`` are jointly measurable exactly when some PSD
``S`` satisfies ``Q + P - 1 <= S <= Q, P``, and then
``{S, Q-S, P-S, 1-Q-P+S}`` is a joint observable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InfeasibleSError, InvalidInputError, NotUnitSquareError, ObservablesCompatibleError

EFFECT_TOL = 1e-9


@dataclass(frozen=True)
class Effect:
    """Operator ``0 <= E <= 1``."""

    op: np.ndarray

    def __post_init__(self):
        op = linalg.hermitian(self.op)
        w = linalg.eigvalsh(op)
        if w[0] < -EFFECT_TOL:
            raise InvalidInputError(f"effect is not PSD (min eigenvalue {w[0]:.3e})")
        if w[-1] > 1 + EFFECT_TOL:
            raise InvalidInputError(f"effect exceeds identity (max eigenvalue {w[-1]:.6g})")
        op.setflags(write=False)
        object.__setattr__(self, "op", op)

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @property
    def complement(self) -> "Effect":
        return Effect(np.eye(self.dim) - self.op)


def as_effect(e) -> Effect:
    return e if isinstance(e, Effect) else Effect(e)


@dataclass(frozen=True)
class DichotomicPOVM:
    effect: Effect

    @property
    def effects(self) -> tuple[Effect, Effect]:
        return self.effect, self.effect.complement


@dataclass(frozen=True)
class NOutcomePOVM:
    effects: tuple[Effect, ...]

    def __post_init__(self):
        effects = tuple(as_effect(e) for e in self.effects)
        if len(effects) < 2:
            raise InvalidInputError("a POVM needs at least two outcomes")
        dims = {e.dim for e in effects}
        if len(dims) != 1:
            raise InvalidInputError(f"POVM effects have mixed dimensions {sorted(dims)}")
        total = sum(e.op for e in effects)
        dev = np.max(np.abs(total - np.eye(effects[0].dim)))
        if dev > EFFECT_TOL:
            raise InvalidInputError(f"POVM effects do not sum to identity (max deviation {dev:.3e})")
        object.__setattr__(self, "effects", effects)

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    @property
    def dim(self) -> int:
        return self.effects[0].dim


@dataclass(frozen=True)
class JointObservable:
    """Four-outcome POVM ``{R++, R+-, R-+, R--}``."""

    R_pp: np.ndarray
    R_pm: np.ndarray
    R_mp: np.ndarray
    R_mm: np.ndarray

    def elements(self) -> tuple[np.ndarray, ...]:
        return self.R_pp, self.R_pm, self.R_mp, self.R_mm

    def validate(self, tol: float = EFFECT_TOL) -> None:
        names = ("R++", "R+-", "R-+", "R--")
        for name, r in zip(names, self.elements()):
            m = linalg.lambda_min(r)
            if m < -tol:
                raise InvalidInputError(f"{name} is not PSD (min eigenvalue {m:.3e})")
        d = self.R_pp.shape[0]
        dev = np.max(np.abs(sum(self.elements()) - np.eye(d)))
        if dev > tol:
            raise InvalidInputError(f"joint observable does not sum to identity ({dev:.3e})")


@dataclass(frozen=True)
class SharpObservable:
    """Observable with spectrum in ``{-1, +1}``."""

    op: np.ndarray

    def __post_init__(self):
        op = linalg.hermitian(self.op)
        check_unit_square(op)
        op.setflags(write=False)
        object.__setattr__(self, "op", op)


def check_unit_square(a, tol: float = 1e-9) -> None:
    a = np.asarray(a)
    dev = np.max(np.abs(a @ a - np.eye(a.shape[0])))
    if dev > tol:
        raise NotUnitSquareError(f"observable does not square to identity (max deviation {dev:.3e})")


def effect_to_observable(p, sign_convention: str = "minus_is_one") -> np.ndarray:
    """Map an effect to a [-1, 1]-valued observable.

    ``minus_is_one`` gives ``1 - 2P`` (the observable assigns -1 to the
    outcome of ``P``), ``plus_is_one`` gives ``2P - 1``.
    """
    p = as_effect(p)
    one = np.eye(p.dim)
    if sign_convention == "minus_is_one":
        return one - 2 * p.op
    if sign_convention == "plus_is_one":
        return 2 * p.op - one
    raise InvalidInputError(f"unknown sign convention {sign_convention!r}")


def joint_from_S(q, p, s, tol: float = EFFECT_TOL) -> JointObservable:
    """Build the joint observable ``{S, Q-S, P-S, 1-Q-P+S}``.

    Raises :class:`InfeasibleSError` naming the violated inequality of
    ``Q + P - 1 <= S <= Q, P`` (or ``S >= 0``).
    """
    q, p = as_effect(q), as_effect(p)
    if q.dim != p.dim:
        raise InvalidInputError(f"dimension mismatch: {q.dim} vs {p.dim}")
    s = linalg.hermitian(s, tol=max(tol, linalg.HERMITIAN_TOL))
    if s.shape != q.op.shape:
        raise InvalidInputError(f"S has shape {s.shape}, expected {q.op.shape}")
    one = np.eye(q.dim)
    joint = JointObservable(s, q.op - s, p.op - s, one - q.op - p.op + s)
    checks = (
        ("S >= 0", joint.R_pp),
        ("S <= Q", joint.R_pm),
        ("S <= P", joint.R_mp),
        ("Q + P - 1 <= S", joint.R_mm),
    )
    for which, r in checks:
        m = linalg.lambda_min(r)
        if m < -tol:
            raise InfeasibleSError(f"infeasible S: {which} violated (min eigenvalue {m:.3e})",
                                   which=which, min_eigenvalue=m)
    return joint


def marginals_of_joint(joint: JointObservable) -> tuple[np.ndarray, np.ndarray]:
    return joint.R_pp + joint.R_pm, joint.R_pp + joint.R_mp


def mix_noise(q, e, mu: float) -> Effect:
    """Noisy version ``(1 - mu) Q + mu E``."""
    if not 0.0 <= mu <= 1.0:
        raise InvalidInputError(f"noise weight must lie in [0, 1], got {mu}")
    q, e = as_effect(q), as_effect(e)
    if q.dim != e.dim:
        raise InvalidInputError(f"dimension mismatch: {q.dim} vs {e.dim}")
    return Effect((1 - mu) * q.op + mu * e.op)


def spectral_projectors(a, rel_gap: float = 1e-8) -> list[np.ndarray]:
    """Spectral projectors of a Hermitian matrix, ascending eigenvalue order.

    Eigenvalues closer than ``rel_gap * ||a||`` share one projector.
    """
    a = linalg.hermitian(a)
    w, v = np.linalg.eigh(a)
    scale = max(abs(w[0]), abs(w[-1]), 1e-300)
    groups = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[groups[-1][-1]] <= rel_gap * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    return [v[:, g] @ v[:, g].conj().T for g in groups]


def dichotomize_vn(a1, a2, tol: float = 1e-9) -> tuple[SharpObservable, SharpObservable]:
    """Reduce two sharp observables to a non-commuting pair of +-1 observables.

    All pairs of spectral projectors are compared and the pair with the
    largest commutator norm is turned into ``(2*Pi - 1, 2*Sigma - 1)``.
    """
    a1, a2 = linalg.hermitian(a1), linalg.hermitian(a2)
    if a1.shape != a2.shape:
        raise InvalidInputError(f"dimension mismatch: {a1.shape} vs {a2.shape}")
    best = None
    for pi in spectral_projectors(a1):
        for sigma in spectral_projectors(a2):
            k = linalg.commutator(pi, sigma)
            norm = float(np.linalg.norm(k, 2))
            if best is None or norm > best[0] + 1e-15:
                best = (norm, pi, sigma)
    norm, pi, sigma = best
    if norm <= tol:
        raise ObservablesCompatibleError("all spectral projectors commute; the observables are compatible")
    one = np.eye(a1.shape[0])
    return SharpObservable(2 * pi - one), SharpObservable(2 * sigma - one)

