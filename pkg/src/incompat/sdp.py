"""Dense semidefinite programming in inequality standard form.

Primal::

    minimize    <c, x>
    subject to  sum_i x_i F_i - C  >= 0

Dual::

    maximize    tr[C X]
    subject to  tr[X F_i] = c_i,  X >= 0

``C`` and every ``F_i`` are block diagonal with complex Hermitian blocks.  The
solver is an infeasible-start primal-dual path-following method using the
HKM search direction and Mehrotra predictor-corrector steps.  All arithmetic
stays in complex Hermitian form; it is equivalent to working on the real
embedding of each block.

The encoders at the bottom turn joint-measurability questions into
:class:`SdpProblem` instances.  Hermitian unknowns (``S``, ``R_ij``, ...) are
expanded in the orthonormal basis from :func:`linalg.hermitian_basis`.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import InconsistentSolutionError, InvalidInputError, SizeLimitError
from .measurement import NOutcomePOVM, as_effect

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAX_ITERATIONS = "max_iterations"

MAX_DICHOTOMIC = 12


class Block(NamedTuple):
    """One diagonal block: constant term and the variables acting on it."""

    name: str
    C: np.ndarray
    idx: np.ndarray  # variable indices with nonzero F_i on this block
    F: np.ndarray  # shape (len(idx), m, m)


@dataclass(frozen=True)
class SdpProblem:
    c: np.ndarray
    blocks: tuple[Block, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise InvalidInputError("cost vector must be a non-empty 1-d array")
        for b in self.blocks:
            if np.any(b.idx < 0) or np.any(b.idx >= c.size):
                raise InvalidInputError(f"block {b.name!r} references unknown variables")
            if b.F.shape[1:] != b.C.shape:
                raise InvalidInputError(f"block {b.name!r} has inconsistent shapes")
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def block_sizes(self) -> list[int]:
        return [b.C.shape[0] for b in self.blocks]

    def block(self, name: str) -> int:
        for k, b in enumerate(self.blocks):
            if b.name == name:
                return k
        raise KeyError(name)

    def C_dense(self) -> np.ndarray:
        return _block_diag([b.C for b in self.blocks])

    def F_dense(self, i: int) -> np.ndarray:
        mats = []
        for b in self.blocks:
            hit = np.flatnonzero(b.idx == i)
            mats.append(b.F[hit[0]] if hit.size else np.zeros_like(b.C))
        return _block_diag(mats)

    def apply(self, x) -> list[np.ndarray]:
        """Blocks of ``sum_i x_i F_i``."""
        x = np.asarray(x, dtype=float)
        return [np.einsum("k,kab->ab", x[b.idx], b.F) for b in self.blocks]

    def adjoint(self, X: Sequence[np.ndarray]) -> np.ndarray:
        """Vector ``(tr[F_i X])_i``."""
        out = np.zeros(self.n)
        for b, xb in zip(self.blocks, X):
            np.add.at(out, b.idx, np.einsum("kab,ba->k", b.F, xb).real)
        return out


@dataclass(frozen=True)
class SdpSolution:
    status: str
    x: np.ndarray
    X: tuple[np.ndarray, ...]
    primal_value: float
    dual_value: float
    gap: float
    iterations: int
    primal_infeasibility: float
    dual_infeasibility: float

    def X_dense(self) -> np.ndarray:
        return _block_diag(list(self.X))


def _block_diag(mats):
    size = sum(m.shape[0] for m in mats)
    out = np.zeros((size, size), dtype=complex)
    k = 0
    for m in mats:
        s = m.shape[0]
        out[k:k + s, k:k + s] = m
        k += s
    return out


def _herm(a):
    return (a + a.conj().T) / 2


def _max_step(L, d):
    """Largest alpha with ``L L^H + alpha d`` PSD (``inf`` if unbounded)."""
    linv = np.linalg.inv(L)
    w = np.linalg.eigvalsh(_herm(linv @ d @ linv.conj().T))
    return np.inf if w[0] >= 0 else -1.0 / w[0]


def _chol(a):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def _polish_dual(prob, X):
    """Correct ``X`` towards ``{tr[F_i X] = c_i}`` without leaving the cone.

    The correction has the form ``X^{1/2} (sum_j y_j F_j) X^{1/2}``, so the
    result stays PSD whenever ``||sum_j y_j F_j|| < 1``; ``y`` is the
    least-squares solution of the scaled normal equations.
    """
    n = prob.n
    roots = []
    for xb in X:
        w, v = np.linalg.eigh(xb)
        roots.append((v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T)
    gram = np.zeros((n, n))
    scaled = []
    for b, r in zip(prob.blocks, roots):
        sf = r @ b.F @ r
        scaled.append(sf)
        if b.idx.size:
            gram[np.ix_(b.idx, b.idx)] += np.einsum("iab,jba->ij", b.F, sf).real
    resid = prob.c - prob.adjoint(X)
    y = np.linalg.lstsq((gram + gram.T) / 2, resid, rcond=1e-13)[0]
    return [_herm(xb + np.einsum("k,kab->ab", y[b.idx], sf))
            for xb, b, sf in zip(X, prob.blocks, scaled)]


def solve_sdp(prob: SdpProblem, gap_tol: float = 1e-8, max_iter: int = 200,
              feas_tol: float = 1e-9) -> SdpSolution:
    """Solve ``prob`` and return primal and dual certificates.

    ``status`` is ``"optimal"`` once ``|primal - dual| <= gap_tol * (1 +
    |primal|)``, the primal residual is below ``feas_tol`` and the dual
    iterate, projected onto its equality constraints, is PSD within
    ``feas_tol``.  Divergent iterates are classified as ``"infeasible"``
    (primal) or ``"unbounded"``; otherwise the best iterate found is returned
    with status ``"max_iterations"``.
    """
    blocks = prob.blocks
    n = prob.n
    c = prob.c
    sizes = prob.block_sizes
    m_total = sum(sizes)
    normC = np.sqrt(sum(np.linalg.norm(b.C) ** 2 for b in blocks))
    normc = np.linalg.norm(c)

    fnorm = np.zeros(n)
    for b in blocks:
        np.add.at(fnorm, b.idx, np.linalg.norm(b.F, axis=(1, 2)) ** 2)
    fnorm = np.sqrt(fnorm)
    xi = max(10.0, np.sqrt(m_total), float(np.max((1 + np.abs(c)) / (1 + fnorm))) * np.sqrt(m_total))
    eta = max(10.0, np.sqrt(m_total), normC, float(np.max(fnorm)))

    x = np.zeros(n)
    X = [xi * np.eye(s, dtype=complex) for s in sizes]
    S = [eta * np.eye(s, dtype=complex) for s in sizes]
    tau = 0.98

    def evaluate(x, X, S):
        rp = [fx - b.C - s for fx, b, s in zip(prob.apply(x), blocks, S)]
        pinf = float(np.sqrt(sum(np.linalg.norm(r) ** 2 for r in rp)) / (1 + normC))
        pobj = float(c @ x)
        best = None
        # the raw iterate is strictly PSD; its projection onto the equality
        # constraints is exactly dual feasible but may leave the cone slightly
        for cand in (X, _polish_dual(prob, X)):
            dinf = np.linalg.norm(c - prob.adjoint(cand)) / (1 + normc)
            neg = max(0.0, -min(linalg.lambda_min(xb) for xb in cand))
            dobj = float(sum(np.trace(b.C @ xb).real for b, xb in zip(blocks, cand)))
            relgap = abs(pobj - dobj) / (1 + abs(pobj))
            merit = max(relgap / gap_tol, pinf / feas_tol, max(dinf, neg) / feas_tol)
            if best is None or merit < best[0]:
                best = (merit, (x, tuple(cand), pobj, dobj, pinf, float(max(dinf, neg))))
        return best

    status = MAX_ITERATIONS
    best = None
    stall = 0
    it = 0
    # The primal residual is carried by recursion rather than recomputed:
    # recomputing it injects rounding noise that S^{-1} amplifies once the
    # slack approaches the boundary of the cone.
    rp = [fx - b.C - s for fx, b, s in zip(prob.apply(x), blocks, S)]
    for it in range(1, max_iter + 1):
        Fx = prob.apply(x)
        rd = c - prob.adjoint(X)
        pobj = float(c @ x)
        dobj = float(sum(np.trace(b.C @ xb).real for b, xb in zip(blocks, X)))
        mu = float(sum(np.trace(xb @ sb).real for xb, sb in zip(X, S))) / m_total
        dinf = np.linalg.norm(rd) / (1 + normc)
        if not (np.isfinite(mu) and np.isfinite(pobj) and np.isfinite(dobj)):
            logger.debug("non-finite iterate at iteration %d", it)
            break

        merit, record = evaluate(x, X, S)
        if best is None or merit < best[0]:
            best = (merit, record)
            stall = 0
        else:
            stall += 1
        if merit <= 1.0:
            status = OPTIMAL
            break
        logger.debug("it=%d merit=%.3e pobj=%.12g dobj=%.12g mu=%.3e", it, merit, pobj, dobj, mu)
        if stall >= 8 and best[0] < 1e3:
            logger.debug("no progress for %d iterations", stall)
            break

        scale_x = 1 + normc
        if dobj > 1e6 * (1 + normC) * scale_x and np.linalg.norm(prob.adjoint(X)) <= 1e-6 * dobj:
            # X / tr[CX] approaches a ray with tr[F_i X] = 0 and tr[CX] > 0
            status = INFEASIBLE
            break
        if pobj < -1e6 * scale_x and dinf > feas_tol:
            lmin = min(linalg.lambda_min(_herm(fx)) for fx in Fx)
            if lmin >= -1e-6 * abs(pobj):
                status = UNBOUNDED
                break

        Sinv = [np.linalg.inv(s) for s in S]
        M = np.zeros((n, n))
        for b, si, xb in zip(blocks, Sinv, X):
            if b.idx.size == 0:
                continue
            U = si @ b.F @ xb
            M[np.ix_(b.idx, b.idx)] += np.einsum("iab,jba->ij", b.F, U).real
        M = (M + M.T) / 2
        LM = _chol(M)
        if LM is None:
            LM = _chol(M + 1e-14 * (1 + np.max(np.abs(np.diag(M)))) * np.eye(n))
            if LM is None:
                logger.debug("Schur complement not positive definite at iteration %d", it)
                break

        LS = [_chol(s) for s in S]
        LX = [_chol(xb) for xb in X]
        if any(l is None for l in LS + LX):
            logger.debug("iterate left the PSD cone at iteration %d", it)
            break

        def direction(sigma, corr):
            rhs = -c.copy()
            G = []
            for k, (b, si, xb, r) in enumerate(zip(blocks, Sinv, X, rp)):
                g = sigma * mu * si
                if corr is not None:
                    g = g - corr[k]
                G.append(g)
                np.add.at(rhs, b.idx, np.einsum("kab,ba->k", b.F, g - si @ r @ xb).real)
            dx = np.linalg.solve(LM.conj().T, np.linalg.solve(LM, rhs))
            dS = [fdx + r for fdx, r in zip(prob.apply(dx), rp)]
            dX = [_herm(g - xb - si @ ds @ xb) for g, xb, si, ds in zip(G, X, Sinv, dS)]
            return dx, dS, dX

        def steps(dS, dX):
            ap = min([1.0] + [tau * _max_step(l, d) for l, d in zip(LS, dS)])
            ad = min([1.0] + [tau * _max_step(l, d) for l, d in zip(LX, dX)])
            return ap, ad

        dx, dS, dX = direction(0.0, None)
        ap, ad = steps(dS, dX)
        mu_aff = sum(np.trace((xb + ad * dxb) @ (sb + ap * dsb)).real
                     for xb, dxb, sb, dsb in zip(X, dX, S, dS)) / m_total
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        corr = [si @ dsb @ dxb for si, dsb, dxb in zip(Sinv, dS, dX)]
        dx, dS, dX = direction(sigma, corr)
        ap, ad = steps(dS, dX)

        x = x + ap * dx
        rp = [(1 - ap) * r for r in rp]
        S = [_herm(s + ap * ds) for s, ds in zip(S, dS)]
        X = [_herm(xb + ad * dxb) for xb, dxb in zip(X, dX)]
        tau = 0.9 + 0.09 * min(ap, ad)

    if status in (INFEASIBLE, UNBOUNDED) or best is None:
        pobj = float(c @ x)
        dobj = float(sum(np.trace(b.C @ xb).real for b, xb in zip(blocks, X)))
        record = (x, tuple(X), pobj, dobj, np.nan, np.nan)
    else:
        record = best[1]
    x, X, pobj, dobj, pinf, dinf = record
    logger.debug("solve_sdp: status=%s iterations=%d primal=%.12g dual=%.12g",
                 status, it, pobj, dobj)
    return SdpSolution(status, x, X, pobj, dobj, pobj - dobj, it, pinf, dinf)


class _Builder:
    def __init__(self, n):
        self.n = n
        self.blocks = []

    def add(self, name, C, terms):
        """``terms`` maps a variable index or an index array to matrices."""
        C = np.asarray(C, dtype=complex)
        idx, mats = [], []
        for key, mat in terms:
            if np.ndim(key) == 0:
                idx.append(int(key))
                mats.append(np.asarray(mat, dtype=complex)[None])
            else:
                idx.extend(int(k) for k in key)
                mats.append(np.asarray(mat, dtype=complex))
        idx = np.array(idx, dtype=int)
        F = np.concatenate(mats) if mats else np.zeros((0,) + C.shape, dtype=complex)
        self.blocks.append(Block(name, C, idx, F))

    def problem(self, c, **meta):
        return SdpProblem(np.asarray(c, dtype=float), tuple(self.blocks), meta)


def _pair(q, p):
    q, p = as_effect(q), as_effect(p)
    if q.dim != p.dim:
        raise InvalidInputError(f"dimension mismatch: {q.dim} vs {p.dim}")
    return q, p


def encode_pair_primal(q, p) -> SdpProblem:
    """``min lambda`` s.t. ``Q + P <= lambda 1 + S`` and ``0 <= S <= Q, P``.

    Variables: ``x_0 = lambda`` followed by the ``d*d`` basis coordinates of
    ``S``.  The constant term is ``(Q+P) + 0 + (-Q) + (-P)`` block-wise.
    """
    q, p = _pair(q, p)
    d = q.dim
    G = linalg.hermitian_basis(d)
    s_idx = np.arange(1, d * d + 1)
    one = np.eye(d)
    b = _Builder(1 + d * d)
    b.add("lambda", q.op + p.op, [(0, one), (s_idx, G)])
    b.add("S>=0", np.zeros((d, d)), [(s_idx, G)])
    b.add("S<=Q", -q.op, [(s_idx, -G)])
    b.add("S<=P", -p.op, [(s_idx, -G)])
    c = np.zeros(1 + d * d)
    c[0] = 1.0
    return b.problem(c, kind="pair_primal", dim=d, basis=G, s_index=s_idx)


def encode_pair_lambda_star(q, p) -> SdpProblem:
    """``min lambda`` s.t. ``S - lambda 1 <= Q, P``, ``Q + P <= S + 1``, ``S >= 0``.

    Its optimum is the shifted value ``lambda*``; ``1 + 2 lambda*`` is the
    largest CHSH expectation the pair can produce.
    """
    q, p = _pair(q, p)
    d = q.dim
    G = linalg.hermitian_basis(d)
    s_idx = np.arange(1, d * d + 1)
    one = np.eye(d)
    b = _Builder(1 + d * d)
    b.add("S>=0", np.zeros((d, d)), [(s_idx, G)])
    b.add("S<=Q+lambda", -q.op, [(0, one), (s_idx, -G)])
    b.add("S<=P+lambda", -p.op, [(0, one), (s_idx, -G)])
    b.add("S>=Q+P-1", q.op + p.op - one, [(s_idx, G)])
    c = np.zeros(1 + d * d)
    c[0] = 1.0
    return b.problem(c, kind="pair_lambda_star", dim=d, basis=G, s_index=s_idx)


def encode_two_nvalued(qa: NOutcomePOVM, pb: NOutcomePOVM) -> SdpProblem:
    """Joint measurability of two N-outcome POVMs.

    Unknowns are ``lambda`` and ``R_ij`` for ``i, j < N`` (the last row and
    column of the joint POVM are implied by the marginals).
    """
    if not isinstance(qa, NOutcomePOVM):
        qa = NOutcomePOVM(tuple(qa))
    if not isinstance(pb, NOutcomePOVM):
        pb = NOutcomePOVM(tuple(pb))
    if qa.n_outcomes != pb.n_outcomes:
        raise InvalidInputError(f"outcome counts differ: {qa.n_outcomes} vs {pb.n_outcomes}")
    if qa.dim != pb.dim:
        raise InvalidInputError(f"dimension mismatch: {qa.dim} vs {pb.dim}")
    N, d = qa.n_outcomes, qa.dim
    G = linalg.hermitian_basis(d)
    dd = d * d
    K = N - 1
    n = 1 + K * K * dd

    def r_idx(i, j):
        start = 1 + (i * K + j) * dd
        return np.arange(start, start + dd)

    Q = [e.op for e in qa.effects[:K]]
    P = [e.op for e in pb.effects[:K]]
    b = _Builder(n)
    all_r = [(r_idx(i, j), G) for i in range(K) for j in range(K)]
    b.add("lambda", sum(Q) + sum(P), [(0, np.eye(d))] + all_r)
    for j in range(K):
        b.add(f"P{j}", -P[j], [(r_idx(i, j), -G) for i in range(K)])
    for i in range(K):
        b.add(f"Q{i}", -Q[i], [(r_idx(i, j), -G) for j in range(K)])
    for i in range(K):
        for j in range(K):
            b.add(f"R{i}{j}", np.zeros((d, d)), [(r_idx(i, j), G)])
    c = np.zeros(n)
    c[0] = 1.0
    return b.problem(c, kind="two_nvalued", dim=d, basis=G, n_outcomes=N, Q=Q, P=P)


def multi_indices(m: int) -> list[tuple[int, ...]]:
    """Multi-indices ``i`` in ``{0,1}^m`` with ``|i| >= 2``, in lexicographic order."""
    return [i for i in itertools.product((0, 1), repeat=m) if sum(i) >= 2]


def encode_multi_dichotomic(effects: Sequence) -> SdpProblem:
    """Joint measurability of ``M`` dichotomic observables ``{T_a, 1 - T_a}``.

    Unknowns are ``lambda`` and the joint elements ``R_i`` with ``|i| >= 2``.
    Elements with ``|i| = 1`` are implied slacks
    ``R_{e_a} = T_a - sum_{|i|>1, i_a=1} R_i`` and elements with ``|i| = 0``
    follow from normalization.
    """
    T = [as_effect(e) for e in effects]
    M = len(T)
    if M < 2:
        raise InvalidInputError("need at least two observables")
    if M > MAX_DICHOTOMIC:
        raise SizeLimitError(f"{M} observables exceed the limit of {MAX_DICHOTOMIC} (2^M blocks)")
    dims = {t.dim for t in T}
    if len(dims) != 1:
        raise InvalidInputError(f"dimension mismatch: {sorted(dims)}")
    d = T[0].dim
    G = linalg.hermitian_basis(d)
    dd = d * d
    idxs = multi_indices(M)
    n = 1 + len(idxs) * dd

    def r_idx(k):
        return np.arange(1 + k * dd, 1 + (k + 1) * dd)

    b = _Builder(n)
    for a in range(M):
        terms = [(r_idx(k), -G) for k, i in enumerate(idxs) if i[a] == 1]
        b.add(f"T{a}", -T[a].op, terms)
    terms = [(0, np.eye(d))] + [(r_idx(k), (sum(i) - 1) * G) for k, i in enumerate(idxs)]
    b.add("lambda", sum(t.op for t in T), terms)
    for k, i in enumerate(idxs):
        b.add("R" + "".join(map(str, i)), np.zeros((d, d)), [(r_idx(k), G)])
    c = np.zeros(n)
    c[0] = 1.0
    return b.problem(c, kind="multi_dichotomic", dim=d, basis=G, indices=idxs,
                     T=[t.op for t in T])


def primal_operator(prob: SdpProblem, sol: SdpSolution, index=None) -> np.ndarray:
    """Reassemble a Hermitian unknown from its basis coordinates.

    With ``index=None`` this is ``S`` of the pair encodings.
    """
    G = prob.meta["basis"]
    if index is None:
        index = prob.meta["s_index"]
    return linalg.hermitian(np.einsum("k,kab->ab", sol.x[index], G), tol=np.inf)


@dataclass(frozen=True)
class DualCertificate:
    """Dual certificate of one of the pair encodings.

    For ``kind == "lambda_star"``: ``X, Y, Z >= 0``, ``rho = Y + Z`` a density
    operator, ``X <= rho`` and
    ``value = tr[X(Q+P-1)] - tr[QY] - tr[PZ]``.

    For ``kind == "pair_primal"``: ``rho`` is a density operator with
    ``rho <= Y + Z``, ``X = rho`` and ``value = tr[rho(Q+P)] - tr[QY] - tr[PZ]``.
    """

    kind: str
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    rho: np.ndarray
    value: float


def extract_dual_certificate(prob: SdpProblem, sol: SdpSolution,
                             tol: float = 1e-7) -> DualCertificate:
    """Split the block dual variable of a pair encoding and verify it."""
    if sol.status != OPTIMAL:
        raise InconsistentSolutionError(f"solution status is {sol.status!r}, not optimal")
    kind = prob.meta.get("kind")
    blk = lambda name: sol.X[prob.block(name)]  # noqa: E731
    if kind == "pair_lambda_star":
        Y, Z, X = blk("S<=Q+lambda"), blk("S<=P+lambda"), blk("S>=Q+P-1")
        rho = Y + Z
        Qm = -prob.blocks[prob.block("S<=Q+lambda")].C
        Pm = -prob.blocks[prob.block("S<=P+lambda")].C
        one = np.eye(Qm.shape[0])
        value = (np.trace(X @ (Qm + Pm - one)) - np.trace(Qm @ Y) - np.trace(Pm @ Z)).real
        cert = DualCertificate("lambda_star", X, Y, Z, rho, float(value))
        upper = ("X <= rho", rho - X)
    elif kind == "pair_primal":
        rho, Y, Z = blk("lambda"), blk("S<=Q"), blk("S<=P")
        Qm = -prob.blocks[prob.block("S<=Q")].C
        Pm = -prob.blocks[prob.block("S<=P")].C
        value = (np.trace(rho @ (Qm + Pm)) - np.trace(Qm @ Y) - np.trace(Pm @ Z)).real
        cert = DualCertificate("pair_primal", rho, Y, Z, rho, float(value))
        upper = ("rho <= Y + Z", Y + Z - rho)
    else:
        raise InvalidInputError(f"no dual certificate for problem kind {kind!r}")

    checks = [("X >= 0", cert.X), ("Y >= 0", cert.Y), ("Z >= 0", cert.Z), upper]
    for name, mat in checks:
        m = linalg.lambda_min(_herm(mat))
        if m < -tol:
            raise InconsistentSolutionError(f"dual certificate violates {name} (min eigenvalue {m:.3e})")
    tr = np.trace(cert.rho).real
    if abs(tr - 1) > tol:
        raise InconsistentSolutionError(f"tr[rho] = {tr:.12g}, expected 1")
    if abs(cert.value - sol.dual_value) > tol * (1 + abs(sol.dual_value)):
        raise InconsistentSolutionError(
            f"certificate value {cert.value:.12g} differs from dual value {sol.dual_value:.12g}")
    return cert
