"""CHSH Bell operators and the largest violation a pair of effects allows.

For effects ``Q`` and ``P`` on ``C^d`` let

    M(phi) = (Q+P-1) (x) [[c^2, cs], [cs, s^2]] - Q (x) diag(1, 0) - P (x) diag(0, 1)

with ``c = cos(phi)``, ``s = sin(phi)``.  The largest eigenvalue of ``M(phi)``
maximised over ``phi in [0, pi]`` is ``lambda*``, and ``1 + 2 lambda*`` is the
supremum of ``|<psi|B|psi>|`` over states and Bob's observables, where ``B``
is the CHSH operator built from ``A1 = 1 - 2P`` and ``A2 = 2Q - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvalidInputError
from .measurement import as_effect, check_unit_square

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0

_E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
_E22 = np.array([[0.0, 0.0], [0.0, 1.0]])
_EOFF = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class BellOperator:
    matrix: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray


@dataclass(frozen=True)
class ScanResult:
    lambda_star: float
    phi_star: float
    phis: np.ndarray
    profile: np.ndarray


@dataclass(frozen=True)
class ChshWitness:
    psi: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    phi_star: float
    value: float


def bell_operator(a1, a2, b1, b2) -> BellOperator:
    """``B = [A1 (x) (B1 + B2) + A2 (x) (B1 - B2)] / 2``."""
    a1, a2 = linalg.hermitian(a1), linalg.hermitian(a2)
    b1, b2 = linalg.hermitian(b1), linalg.hermitian(b2)
    if a1.shape != a2.shape:
        raise InvalidInputError(f"Alice's observables differ in shape: {a1.shape} vs {a2.shape}")
    if b1.shape != b2.shape:
        raise InvalidInputError(f"Bob's observables differ in shape: {b1.shape} vs {b2.shape}")
    m = 0.5 * (np.kron(a1, b1 + b2) + np.kron(a2, b1 - b2))
    return BellOperator(linalg.hermitian(m, tol=np.inf), a1, a2, b1, b2)


def bell_square_residual(bo: BellOperator, sign: float = -1.0) -> float:
    """Operator norm of ``B^2 - 1 - sign * [A1, A2] (x) [B1, B2] / 4``.

    Expanding the square with unit-square factors gives
    ``B^2 = 1 - [A1, A2] (x) [B1, B2] / 4``, so the default ``sign=-1``
    yields a residual at rounding level.  ``sign=+1`` measures the
    opposite-sign form, which holds only when a commutator vanishes.
    """
    if sign not in (-1.0, 1.0):
        raise InvalidInputError(f"sign must be +1 or -1, got {sign}")
    for a in (bo.A1, bo.A2, bo.B1, bo.B2):
        check_unit_square(a)
    ka = linalg.commutator(bo.A1, bo.A2)
    kb = linalg.commutator(bo.B1, bo.B2)
    r = bo.matrix @ bo.matrix - np.eye(bo.matrix.shape[0]) - sign * 0.25 * np.kron(ka, kb)
    return float(np.linalg.norm(r, 2))


def _commutator_norm(a1, a2) -> float:
    a1, a2 = linalg.hermitian(a1), linalg.hermitian(a2)
    check_unit_square(a1)
    check_unit_square(a2)
    return float(np.linalg.norm(linalg.commutator(a1, a2), 2))


def max_violation_fixed_B(a1, a2, check: bool | None = None) -> float:
    """``sqrt(1 + ||[A1, A2]||^2 / 4)``, the value reached with ``B_i = A_i``.

    With ``check`` (default: whenever ``d <= 16``) the formula is compared
    against the norm of the assembled Bell operator.
    """
    a1 = getattr(a1, "op", a1)
    a2 = getattr(a2, "op", a2)
    k = _commutator_norm(a1, a2)
    value = float(np.sqrt(1 + k * k / 4))
    if check is None:
        check = np.shape(a1)[0] <= 16
    if check:
        direct = linalg.operator_norm(bell_operator(a1, a2, a1, a2).matrix)
        if abs(direct - value) > 1e-8:
            raise ArithmeticError(f"fixed-B formula {value:.15g} disagrees with ||B|| = {direct:.15g}")
    return value


def max_violation_vn(a1, a2) -> float:
    """``sqrt(1 + ||[A1, A2]|| / 2)``, optimal over Bob's observables."""
    k = _commutator_norm(getattr(a1, "op", a1), getattr(a2, "op", a2))
    return float(np.sqrt(1 + k / 2))


def pauli_partners(a1, a2):
    """Bell operator with ``B1 = sigma_z``, ``B2 = sigma_x`` on a qubit."""
    return bell_operator(a1, a2, linalg.PAULI_Z, linalg.PAULI_X)


def _scan_terms(q, p):
    q, p = as_effect(q), as_effect(p)
    if q.dim != p.dim:
        raise InvalidInputError(f"dimension mismatch: {q.dim} vs {p.dim}")
    k = q.op + p.op - np.eye(q.dim)
    const = -np.kron(q.op, _E11) - np.kron(p.op, _E22)
    return np.kron(k, _E11), np.kron(k, _EOFF), np.kron(k, _E22), const


def scan_matrix(q, p, phi: float) -> np.ndarray:
    """The ``2d x 2d`` matrix whose top eigenvalue is ``mu(phi)``."""
    cc, cs, ss, const = _scan_terms(q, p)
    c, s = np.cos(phi), np.sin(phi)
    return c * c * cc + c * s * cs + s * s * ss + const


def _mu_batch(terms, phis):
    cc, cs, ss, const = terms
    c, s = np.cos(phis)[:, None, None], np.sin(phis)[:, None, None]
    mats = c * c * cc + c * s * cs + s * s * ss + const
    return np.linalg.eigvalsh(mats)[:, -1]


def mu_of_phi(q, p, phi: float) -> float:
    if not 0.0 <= phi <= np.pi:
        raise InvalidInputError(f"phi must lie in [0, pi], got {phi}")
    return float(_mu_batch(_scan_terms(q, p), np.array([phi]))[0])


def lambda_star_scan(q, p, grid: int = 2048, refine_tol: float = 1e-10) -> ScanResult:
    """Maximise ``mu(phi)`` over ``[0, pi]``.

    ``mu`` is evaluated on a uniform grid; every grid-local maximum is then
    refined by golden-section search on its two neighbouring cells.  All
    brackets are refined together, one batched eigenvalue call per step.
    """
    if grid < 3:
        raise InvalidInputError("grid needs at least 3 points")
    terms = _scan_terms(q, p)
    phis = np.linspace(0.0, np.pi, grid)
    mu = _mu_batch(terms, phis)

    left = np.concatenate(([-np.inf], mu[:-1]))
    right = np.concatenate((mu[1:], [-np.inf]))
    peaks = np.flatnonzero((mu >= left) & (mu >= right))
    # mu is Lipschitz in phi with constant ||Q+P-1|| <= 1, so a cell whose
    # endpoints are far below the grid maximum cannot hold the global maximum
    h = phis[1] - phis[0]
    peaks = peaks[mu[peaks] >= mu.max() - 2 * h]

    lo = phis[np.maximum(peaks - 1, 0)]
    hi = phis[np.minimum(peaks + 1, grid - 1)]
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = _mu_batch(terms, x1), _mu_batch(terms, x2)
    while np.max(hi - lo) > refine_tol:
        move_up = f1 < f2
        lo = np.where(move_up, x1, lo)
        hi = np.where(move_up, hi, x2)
        new_x1 = np.where(move_up, x2, hi - GOLDEN * (hi - lo))
        new_x2 = np.where(move_up, lo + GOLDEN * (hi - lo), x1)
        fx = _mu_batch(terms, np.where(move_up, new_x2, new_x1))
        f1, f2 = np.where(move_up, f2, fx), np.where(move_up, fx, f1)
        x1, x2 = new_x1, new_x2
    cand_phi = np.concatenate((phis, x1, x2))
    cand_mu = np.concatenate((mu, f1, f2))
    best = int(np.argmax(cand_mu))
    return ScanResult(float(cand_mu[best]), float(cand_phi[best]), phis, mu)


def max_chsh(q, p, grid: int = 2048) -> float:
    """``1 + 2 lambda*``, the largest CHSH value reachable with effects ``Q, P``."""
    return 1.0 + 2.0 * lambda_star_scan(q, p, grid=grid).lambda_star


def alice_observables(q, p) -> tuple[np.ndarray, np.ndarray]:
    """``A1 = 1 - 2P`` and ``A2 = 2Q - 1``."""
    q, p = as_effect(q), as_effect(p)
    one = np.eye(q.dim)
    return one - 2 * p.op, 2 * q.op - one


def extract_witness(q, p, grid: int = 2048) -> ChshWitness:
    """State and Bob observables attaining ``1 + 2 lambda*``.

    Bob holds a qubit with ``B1 = 1 - 2 diag(1, 0) = sigma_z`` and
    ``B2 = 1 - 2 |v><v|`` for ``v = (cos phi*, sin phi*)``; the state is the
    top eigenvector of the scan matrix at ``phi*``.
    """
    q, p = as_effect(q), as_effect(p)
    scan = lambda_star_scan(q, p, grid=grid)
    c, s = np.cos(scan.phi_star), np.sin(scan.phi_star)
    proj = np.array([[c * c, c * s], [c * s, s * s]])
    b1 = np.eye(2) - 2 * _E11
    b2 = np.eye(2) - 2 * proj
    top = linalg.hermitian_eig(scan_matrix(q, p, scan.phi_star))
    psi = top.eigenvectors[:, 0]
    psi = psi / np.linalg.norm(psi)
    a1, a2 = alice_observables(q, p)
    bo = bell_operator(a1, a2, b1, b2)
    value = float(np.vdot(psi, bo.matrix @ psi).real)
    return ChshWitness(psi, a1, a2, b1, b2, scan.phi_star, value)


def expectation(bo: BellOperator, psi) -> float:
    psi = np.asarray(psi, dtype=complex)
    return float(np.vdot(psi, bo.matrix @ psi).real)
