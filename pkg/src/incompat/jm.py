"""Joint measurability verdicts for pairs and families of measurements.

Two SDP values describe a pair of effects ``Q`` and ``P``:

* ``lambda0``, the least ``lambda`` with ``Q + P <= lambda 1 + S`` for some
  ``0 <= S <= Q, P``.  The pair is jointly measurable iff ``lambda0 <= 1``.
* ``lambda_star``, the optimum of the shifted problem.  The pair is jointly
  measurable iff ``lambda_star <= 0``, and ``1 + 2 lambda_star`` is the
  largest CHSH value it allows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import linalg, sdp
from .errors import InconsistentSolutionError, SolverError
from .measurement import JointObservable, NOutcomePOVM, as_effect, joint_from_S, mix_noise
from .sampling import wishart_effect

VERDICT_TOL = 1e-7
CERT_TOL = 1e-7
OBJ_TOL = 1e-6

COMPATIBLE = "compatible"
INCOMPATIBLE = "incompatible"
MARGINAL = "marginal"


@dataclass(frozen=True)
class JmReport:
    """Outcome of a joint-measurability analysis.

    ``joint`` is set only for compatible pairs and ``certificate`` only for
    incompatible ones.  ``lambda_star`` is ``None`` for the multi-outcome and
    multi-observable scenarios, which have no CHSH counterpart.
    ``marginal`` flags a verdict that the two SDP values do not agree on
    within the solver tolerance band.
    """

    lambda0: float
    lambda_star: float | None
    jointly_measurable: bool
    mu_robustness: float
    verdict: str
    marginal: bool = False
    joint: JointObservable | None = None
    certificate: object | None = None
    gap: float = 0.0
    solutions: dict = field(default_factory=dict, repr=False, compare=False)


@dataclass(frozen=True)
class NValuedCertificate:
    """Dual data ``(rho, Y_i, Z_j)`` with ``rho <= Y_i + Z_j`` for all ``i, j``."""

    rho: np.ndarray
    Y: tuple
    Z: tuple
    value: float


@dataclass(frozen=True)
class MultiCertificate:
    """Dual data ``(rho, X_a)`` with ``(|i|-1) rho <= sum_a i_a X_a``."""

    rho: np.ndarray
    X: tuple
    value: float


def mu_from_lambda0(lambda0: float, tol: float = VERDICT_TOL) -> float:
    """``max(0, 1 - 1/lambda0)``, the least noise weight that makes the pair compatible.

    Values of ``lambda0`` within ``tol`` of 1 count as compatible and give 0.
    """
    if lambda0 <= 1.0 + tol:
        return 0.0
    return 1.0 - 1.0 / lambda0


def _solve(prob, gap_tol, what):
    sol = sdp.solve_sdp(prob, gap_tol=gap_tol)
    if sol.status != sdp.OPTIMAL:
        raise SolverError(f"{what}: solver finished with status {sol.status!r} "
                          f"(gap {sol.gap:.3e})", solution=sol)
    return sol


def _verdict(flags):
    if all(flags):
        return COMPATIBLE, False
    if not any(flags):
        return INCOMPATIBLE, False
    return MARGINAL, True


def lambda0_sdp(q, p, gap_tol: float = 1e-8) -> float:
    return _solve(sdp.encode_pair_primal(q, p), gap_tol, "pair primal").primal_value


def lambda_star_sdp(q, p, gap_tol: float = 1e-8) -> float:
    return _solve(sdp.encode_pair_lambda_star(q, p), gap_tol, "shifted primal").primal_value


def analyze_pair(q, p, gap_tol: float = 1e-8, tol: float = VERDICT_TOL) -> JmReport:
    """Solve both pair programs and attach a joint observable or a dual certificate.

    The joint observable is built from the optimal ``S`` of the ``lambda0``
    program.  When ``lambda0 <= 1`` that ``S`` already satisfies
    ``Q + P - 1 <= Q + P - lambda0 1 <= S``, so no second solve is needed.
    """
    q, p = as_effect(q), as_effect(p)
    prob0 = sdp.encode_pair_primal(q, p)
    prob1 = sdp.encode_pair_lambda_star(q, p)
    sol0 = _solve(prob0, gap_tol, "pair primal")
    sol1 = _solve(prob1, gap_tol, "shifted primal")
    lam0, lam1 = sol0.primal_value, sol1.primal_value

    verdict, marginal = _verdict([lam0 <= 1 + tol, lam1 <= tol])
    # a marginal case is resolved by the lambda0 test, which is the defining one
    compatible = lam0 <= 1 + tol

    joint = certificate = None
    if compatible:
        s = sdp.primal_operator(prob0, sol0)
        joint = joint_from_S(q, p, s, tol=1e-9 + max(0.0, lam0 - 1.0))
    else:
        certificate = sdp.extract_dual_certificate(prob1, sol1)
    return JmReport(
        lambda0=lam0,
        lambda_star=lam1,
        jointly_measurable=compatible,
        mu_robustness=mu_from_lambda0(lam0, tol),
        verdict=verdict,
        marginal=marginal,
        joint=joint,
        certificate=certificate,
        gap=max(sol0.gap, sol1.gap),
        solutions={"lambda0": sol0, "lambda_star": sol1},
    )


@dataclass(frozen=True)
class NoiseCheck:
    mu: float
    lambda0_values: tuple
    worst: float


def robustness_mu(q, p, samples: int = 20, seed: int = 0, margin: float = 1e-3,
                  check: bool = True, tol: float = 1e-6) -> float:
    """Noise weight ``mu = max(0, 1 - 1/lambda0)``.

    With ``check`` the pair is mixed with ``samples`` seeded random effects
    at weight ``mu + margin`` and the largest resulting ``lambda0`` is
    compared against ``1 + tol``.  A failure only issues a
    :class:`RuntimeWarning`: sampling cannot prove a statement about every
    noise effect, and it cannot refute the formula either.
    """
    q, p = as_effect(q), as_effect(p)
    mu = mu_from_lambda0(lambda0_sdp(q, p))
    if check and mu > 0:
        result = noise_check(q, p, mu, samples=samples, seed=seed, margin=margin)
        if result.worst > 1 + tol:
            warnings.warn(f"pair mixed at noise {min(1.0, mu + margin):.6g} still has "
                          f"lambda0 = {result.worst:.9g} for some sampled effect",
                          RuntimeWarning, stacklevel=2)
    return mu


def noise_check(q, p, mu: float, samples: int = 20, seed: int = 0,
                margin: float = 1e-3, include_uniform: bool = True) -> NoiseCheck:
    """``lambda0`` of ``((1-w)Q + wE, (1-w)P + wE)`` with ``w = mu + margin``.

    ``E`` runs over ``1/2`` (when ``include_uniform``) and ``samples``
    Wishart-type effects from a generator seeded with ``seed``.
    """
    q, p = as_effect(q), as_effect(p)
    w = min(1.0, mu + margin)
    rng = np.random.default_rng(seed)
    noises = [np.eye(q.dim) / 2] if include_uniform else []
    noises += [wishart_effect(q.dim, rng) for _ in range(samples)]
    values = tuple(lambda0_sdp(mix_noise(q, e, w), mix_noise(p, e, w)) for e in noises)
    return NoiseCheck(w, values, max(values) if values else -np.inf)


def _min_eig(name, mat, tol):
    m = linalg.lambda_min((mat + mat.conj().T) / 2)
    if m < -tol:
        raise InconsistentSolutionError(f"dual certificate violates {name} (min eigenvalue {m:.3e})")


def _check_value(value, target, what):
    if abs(value - target) > OBJ_TOL * (1 + abs(target)):
        raise InconsistentSolutionError(f"{what}: certificate value {value:.12g} "
                                        f"does not match lambda0 = {target:.12g}")


def _check_trace(rho):
    tr = np.trace(rho).real
    if abs(tr - 1) > CERT_TOL:
        raise InconsistentSolutionError(f"tr[rho] = {tr:.12g}, expected 1")


def nvalued_certificate(prob, sol) -> NValuedCertificate:
    blk = lambda name: sol.X[prob.block(name)]  # noqa: E731
    K = prob.meta["n_outcomes"] - 1
    Q, P = prob.meta["Q"], prob.meta["P"]
    rho = blk("lambda")
    Y = tuple(blk(f"Q{i}") for i in range(K))
    Z = tuple(blk(f"P{j}") for j in range(K))
    _check_trace(rho)
    for i in range(K):
        _min_eig(f"Y{i} >= 0", Y[i], CERT_TOL)
        _min_eig(f"Z{i} >= 0", Z[i], CERT_TOL)
        for j in range(K):
            _min_eig(f"rho <= Y{i} + Z{j}", Y[i] + Z[j] - rho, CERT_TOL)
    value = sum(np.trace(Q[i] @ (rho - Y[i])).real + np.trace(P[i] @ (rho - Z[i])).real
                for i in range(K))
    _check_value(value, sol.primal_value, "N-outcome scenario")
    return NValuedCertificate(rho, Y, Z, float(value))


def multi_certificate(prob, sol) -> MultiCertificate:
    blk = lambda name: sol.X[prob.block(name)]  # noqa: E731
    T = prob.meta["T"]
    rho = blk("lambda")
    X = tuple(blk(f"T{a}") for a in range(len(T)))
    _check_trace(rho)
    for a, xa in enumerate(X):
        _min_eig(f"X{a} >= 0", xa, CERT_TOL)
    for i in prob.meta["indices"]:
        lhs = sum(xa for xa, bit in zip(X, i) if bit) - (sum(i) - 1) * rho
        _min_eig(f"({sum(i)}-1) rho <= X sum for i={''.join(map(str, i))}", lhs, CERT_TOL)
    value = sum(np.trace(t @ (rho - xa)).real for t, xa in zip(T, X))
    _check_value(value, sol.primal_value, "dichotomic family")
    return MultiCertificate(rho, X, float(value))


def _scenario_report(sol, cert, tol):
    lam0 = sol.primal_value
    compatible = lam0 <= 1 + tol
    return JmReport(
        lambda0=lam0,
        lambda_star=None,
        jointly_measurable=compatible,
        mu_robustness=mu_from_lambda0(lam0, tol),
        verdict=COMPATIBLE if compatible else INCOMPATIBLE,
        certificate=None if compatible else cert,
        gap=sol.gap,
        solutions={"lambda0": sol},
    )


def analyze_two_nvalued(qa, pb, gap_tol: float = 1e-8, tol: float = VERDICT_TOL) -> JmReport:
    """Two N-outcome POVMs.  The dual certificate is validated in every case."""
    if not isinstance(qa, NOutcomePOVM):
        qa = NOutcomePOVM(tuple(qa))
    if not isinstance(pb, NOutcomePOVM):
        pb = NOutcomePOVM(tuple(pb))
    prob = sdp.encode_two_nvalued(qa, pb)
    sol = _solve(prob, gap_tol, "N-outcome scenario")
    return _scenario_report(sol, nvalued_certificate(prob, sol), tol)


def analyze_multi_dichotomic(effects, gap_tol: float = 1e-8, tol: float = VERDICT_TOL) -> JmReport:
    """``M`` dichotomic observables ``{T_a, 1 - T_a}``, ``2 <= M <= 12``."""
    prob = sdp.encode_multi_dichotomic(effects)
    sol = _solve(prob, gap_tol, "dichotomic family")
    return _scenario_report(sol, multi_certificate(prob, sol), tol)
