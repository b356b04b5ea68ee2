"""Dense complex Hermitian linear algebra.

Matrices are plain ``numpy`` arrays.  :func:`hermitian` is the single gate
through which user input enters: it checks squareness and Hermiticity and
returns an exactly Hermitian ``complex128`` copy.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError

HERMITIAN_TOL = 1e-12


class Spectrum(NamedTuple):
    """Eigen-decomposition with eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise InvalidInputError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix contains non-finite entries")
    return m


def hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``a`` as Hermitian and return ``(a + a^dagger) / 2``.

    Raises :class:`InvalidInputError` when the matrix is not square or when
    ``max|a - a^dagger|`` exceeds ``tol``.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"matrix is not square: shape {m.shape}")
    asym = np.max(np.abs(m - m.conj().T))
    if asym > tol:
        raise InvalidInputError(f"matrix is not Hermitian (max |H - H^dagger| = {asym:.3e})")
    return (m + m.conj().T) / 2


def _check_dims(*mats):
    shapes = {m.shape for m in mats}
    if len(shapes) != 1:
        raise InvalidInputError(f"dimension mismatch: {sorted(shapes)}")


def jacobi_eigh(h: np.ndarray, tol: float = 1e-13, max_sweeps: int = 100) -> Spectrum:
    """Cyclic Jacobi eigensolver for complex Hermitian matrices.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the classical real Jacobi rotation.  Sweeps run over ``p < q`` in
    row-major order until the off-diagonal Frobenius norm drops below
    ``tol * ||h||_F``.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n > 1 and scale > 0:
        for _ in range(max_sweeps):
            off = np.linalg.norm(a - np.diag(np.diag(a)))
            if off <= tol * scale:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    b = a[p, q]
                    mag = abs(b)
                    if mag <= 1e-300:
                        continue
                    app, aqq = a[p, p].real, a[q, q].real
                    theta = (aqq - app) / (2.0 * mag)
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    c = 1.0 / np.sqrt(t * t + 1.0)
                    s = t * c
                    phase = b / mag
                    # R = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                    rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                    idx = [p, q]
                    a[:, idx] = a[:, idx] @ rot
                    a[idx, :] = rot.conj().T @ a[idx, :]
                    a[p, q] = a[q, p] = 0.0
                    a[p, p] = a[p, p].real
                    a[q, q] = a[q, q].real
                    v[:, idx] = v[:, idx] @ rot
        else:
            raise RuntimeError("Jacobi eigensolver did not converge")
    w = np.diag(a).real
    # stable sort keeps the sweep order for ties
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], v[:, order])


def hermitian_eig(h, method: str = "lapack") -> Spectrum:
    """Full spectrum of a Hermitian matrix, eigenvalues descending.

    ``method="lapack"`` uses :func:`numpy.linalg.eigh`; ``method="jacobi"``
    uses :func:`jacobi_eigh`.  Both are deterministic for a fixed input.
    """
    h = hermitian(h)
    if method == "jacobi":
        return jacobi_eigh(h)
    if method != "lapack":
        raise InvalidInputError(f"unknown eigensolver {method!r}")
    w, v = np.linalg.eigh(h)
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def eigvalsh(h) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix (or a stack of them), ascending."""
    return np.linalg.eigvalsh(h)


def lambda_max(h) -> float:
    return float(np.linalg.eigvalsh(h)[-1])


def lambda_min(h) -> float:
    return float(np.linalg.eigvalsh(h)[0])


def operator_norm(h) -> float:
    """Spectral norm: ``max |eigenvalue|`` for Hermitian input.

    Non-Hermitian input (commutators of Hermitian matrices, say) falls back
    to the largest singular value.
    """
    m = as_matrix(h)
    if m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= HERMITIAN_TOL:
        w = np.linalg.eigvalsh(hermitian(m))
        return float(max(abs(w[0]), abs(w[-1])))
    return float(np.linalg.norm(m, 2))


def is_psd(h, tol: float = 0.0) -> bool:
    if tol < 0:
        raise InvalidInputError("tolerance must be nonnegative")
    return lambda_min(hermitian(h)) >= -tol


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def commutator(a, b) -> np.ndarray:
    """``ab - ba``; anti-Hermitian whenever ``a`` and ``b`` are Hermitian."""
    a, b = as_matrix(a), as_matrix(b)
    _check_dims(a, b)
    return a @ b - b @ a


def _spectral(h, tol):
    h = hermitian(h)
    w, v = np.linalg.eigh(h)
    if w[0] < -tol:
        raise InvalidInputError(f"matrix is not PSD (min eigenvalue {w[0]:.3e})")
    return np.clip(w, 0.0, None), v


def psd_sqrt(h, tol: float = 1e-9) -> np.ndarray:
    w, v = _spectral(h, tol)
    return hermitian((v * np.sqrt(w)) @ v.conj().T, tol=np.inf)


def pinv_sqrt(h, tol: float = 1e-9) -> np.ndarray:
    """Pseudo-inverse square root; eigenvalues below ``1e-10 * lambda_max`` map to 0."""
    w, v = _spectral(h, tol)
    cutoff = 1e-10 * w[-1]
    inv = np.zeros_like(w)
    keep = w > cutoff
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return hermitian((v * inv) @ v.conj().T, tol=np.inf)


def real_embedding(h) -> np.ndarray:
    """Real symmetric ``[[X, -Y], [Y, X]]`` for ``h = X + iY``.

    Each eigenvalue of ``h`` appears twice in the embedding.
    """
    h = hermitian(h)
    x, y = h.real, h.imag
    return np.block([[x, -y], [y, x]])


def hermitian_basis(d: int) -> np.ndarray:
    """Generalized Gell-Mann basis of d x d Hermitian matrices.

    Returns an array of shape ``(d*d, d, d)``, orthonormal under
    ``tr[G_i G_j] = delta_ij``.  Order: the d diagonal units, then for each
    ``j < k`` the symmetric and the antisymmetric element.
    """
    if d < 1:
        raise InvalidInputError("dimension must be positive")
    basis = []
    for j in range(d):
        g = np.zeros((d, d), dtype=complex)
        g[j, j] = 1.0
        basis.append(g)
    r = 1 / np.sqrt(2)
    for j in range(d):
        for k in range(j + 1, d):
            g = np.zeros((d, d), dtype=complex)
            g[j, k] = g[k, j] = r
            basis.append(g)
            g = np.zeros((d, d), dtype=complex)
            g[j, k] = -1j * r
            g[k, j] = 1j * r
            basis.append(g)
    return np.array(basis)


def basis_coefficients(h, basis: np.ndarray) -> np.ndarray:
    """Real coordinates ``tr[G_i h]`` of ``h`` in an orthonormal Hermitian basis."""
    return np.einsum("kab,ba->k", basis, h).real


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
