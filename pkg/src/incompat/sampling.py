"""Seeded random generators for states, effects and observables."""

from __future__ import annotations

import numpy as np


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_effect(d: int, rng: np.random.Generator) -> np.ndarray:
    """``U diag(u) U^dagger`` with Haar ``U`` and ``u`` uniform in [0, 1]."""
    u = haar_unitary(d, rng)
    h = (u * rng.uniform(0.0, 1.0, d)) @ u.conj().T
    return (h + h.conj().T) / 2


def wishart_effect(d: int, rng: np.random.Generator) -> np.ndarray:
    """Effect ``A^dagger A / ||A^dagger A||`` scaled by a uniform factor in (0, 1]."""
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    w = a.conj().T @ a
    w = w / np.linalg.eigvalsh(w)[-1]
    w = w * (1.0 - rng.uniform(0.0, 1.0))
    return (w + w.conj().T) / 2


def random_density(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_sharp_observable(d: int, rng: np.random.Generator) -> np.ndarray:
    """``U diag(+-1) U^dagger`` with at least one eigenvalue of each sign when ``d >= 2``."""
    signs = rng.choice([-1.0, 1.0], size=d)
    if d >= 2:
        signs[0], signs[1] = 1.0, -1.0
    u = haar_unitary(d, rng)
    h = (u * signs) @ u.conj().T
    return (h + h.conj().T) / 2


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2
