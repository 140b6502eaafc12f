"""
Maximum symmetric fidelities as constrained convex optimization.

For a state rho on S and one of the feasible sets

    BSym    {sigma : sigma = Pi sigma Pi}
    Sym     {sigma : sigma = U(g) sigma U(g)^dag for all g}
    BSE     {Tr_R[omega] : omega = Pi_SR omega Pi_SR}
    SymExt  {Tr_R[omega] : omega = U_SR(g) omega U_SR(g)^dag for all g}

the solver maximizes F(rho, sigma) over the set. Each set is the image of a
linear, completely positive map applied to a free density matrix, so the
conditional-gradient linear subproblem max_s Tr[grad . s] reduces through the
map's adjoint to a top-eigenvector computation.

The solver interleaves conditional gradient (Frank-Wolfe with line search)
with an alternating-Uhlmann polish: swap between the Uhlmann-optimal
purification of rho (a polar decomposition, closed form) and the projection
of that purification back onto the symmetric subspace (also closed form).
The reported gap is a certified bound on the remaining suboptimality: by
concavity of F(rho, .), f* <= f(sigma) + max_s <grad, s - sigma> at any
feasible point where the gradient is finite along feasible directions.

Register convention is S first: representations for the extendible sets act
on [S][R] and the partial trace removes the trailing R factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .groups import GroupRep, ProjectiveRepresentationError, twirl_matrix
from .qmath import (DensityMatrix, QsymError, _clip_spectrum, asarray,
                    fidelity, partial_trace, random_density_matrix, sqrtm_psd)

GRAD_EPS = 1e-9          # mixing weight toward the base point inside gradient evals
EIG_CUTOFF = 1e-14       # relative cutoff for pseudo-inverse square roots
DEFAULT_MAX_ITER = 50_000
DEFAULT_GAP_TOL = 1e-7


class ConvergenceError(QsymError):
    """Iteration budget exhausted with a certified gap above tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class OptReport:
    """Solver output: fidelity value, the optimizing state, and a certified
    bound on the remaining suboptimality."""

    value: float
    sigma_star: DensityMatrix
    iterations: int
    duality_or_bound_gap: float
    extension: DensityMatrix | None = None


# ---------------------------------------------------------------------------
# Feasible sets
# ---------------------------------------------------------------------------

def _range_isometry(projector: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((projector + projector.conj().T) / 2)
    return v[:, w > 0.5]


def _average(unitaries) -> np.ndarray:
    return sum(unitaries) / len(unitaries)


class FeasibleSet:
    """A symmetric feasible set over explicit unitaries.

    kind is one of bsym, sym, bse, symext, qc_sym. The free variable x is a
    density matrix on a smaller space; to_omega(x) produces the feasible
    carrier state (the extension omega for the extendible kinds), to_sigma(x)
    the state on S compared against rho. qc_sym additionally dephases the
    trailing classical factor of dimension qc_dims[1] (used for measurement
    covariance, where the optimization may be restricted to quantum-classical
    invariant states).
    """

    def __init__(self, kind: str, unitaries, s_dim: int, r_dim: int = 1,
                 qc_dims: tuple[int, int] | None = None, name: str = "set"):
        self.kind = kind
        self.name = name
        self.unitaries = [asarray(u) for u in unitaries]
        self.s_dim = s_dim
        self.r_dim = r_dim
        self.qc_dims = qc_dims
        d = s_dim * r_dim
        if self.unitaries[0].shape[0] != d:
            raise QsymError(f"unitary dim {self.unitaries[0].shape[0]} != s_dim*r_dim = {d}")
        if kind in ("bsym", "bse"):
            pi = _average(self.unitaries)
            if np.max(np.abs(pi @ pi - pi)) > 1e-9:
                raise ProjectiveRepresentationError(
                    f"{name}: the group average is not idempotent; projective phases "
                    "obstruct the Bose-symmetric feasible set")
            self.projector = pi
            self.iso = _range_isometry(pi)
            self.x_dim = self.iso.shape[1]
        elif kind in ("sym", "symext", "qc_sym"):
            self.projector = None
            self.iso = None
            self.x_dim = d
            if kind == "qc_sym" and (qc_dims is None or qc_dims[0] * qc_dims[1] != d):
                raise QsymError("qc_sym requires qc_dims = (quantum_dim, classical_dim)")
        else:
            raise QsymError(f"unknown feasible-set kind {kind!r}")

    @classmethod
    def from_rep(cls, kind: str, rep: GroupRep, s_dim: int, r_dim: int = 1) -> "FeasibleSet":
        return cls(kind, rep.unitaries, s_dim, r_dim, name=rep.name)

    # -- linear structure ---------------------------------------------------

    def _dephase(self, m: np.ndarray) -> np.ndarray:
        dq, dc = self.qc_dims
        t = m.reshape(dq, dc, dq, dc).copy()
        mask = np.eye(dc, dtype=bool)
        t *= mask[None, :, None, :]
        return t.reshape(dq * dc, dq * dc)

    def to_omega(self, x: np.ndarray) -> np.ndarray:
        if self.iso is not None:
            return self.iso @ x @ self.iso.conj().T
        out = twirl_matrix(self.unitaries, x)
        if self.kind == "qc_sym":
            out = self._dephase(out)
        return out

    def to_sigma(self, x: np.ndarray) -> np.ndarray:
        omega = self.to_omega(x)
        if self.r_dim == 1:
            return omega
        return partial_trace(omega, [self.s_dim, self.r_dim], keep={0}).a

    def base_x(self) -> np.ndarray:
        return np.eye(self.x_dim, dtype=complex) / self.x_dim

    def _lift_grad(self, grad: np.ndarray) -> np.ndarray:
        if self.r_dim == 1:
            return grad
        return np.kron(grad, np.eye(self.r_dim, dtype=complex))

    def lmo(self, grad: np.ndarray) -> tuple[float, np.ndarray]:
        """max_{sigma in set} Tr[grad sigma] and the achieving x-vertex."""
        lifted = self._lift_grad(grad)
        if self.iso is not None:
            h = self.iso.conj().T @ lifted @ self.iso
        else:
            if self.kind == "qc_sym":
                lifted = self._dephase(lifted)
            h = twirl_matrix(self.unitaries, lifted)  # the twirl is self-adjoint
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        vec = v[:, -1]
        return float(w[-1]), np.outer(vec, vec.conj())

    def feasibility_defect(self, omega: np.ndarray) -> float:
        """Max-norm violation of the set's defining condition."""
        if self.iso is not None:
            return float(np.max(np.abs(self.projector @ omega @ self.projector - omega)))
        out = twirl_matrix(self.unitaries, omega)
        if self.kind == "qc_sym":
            out = self._dephase(out)
        return float(np.max(np.abs(out - omega)))

    # -- purified lift for the alternating-Uhlmann polish ---------------------

    def purified_lift(self, rank_rho: int):
        """(Q, embed, extract) or None.

        Q projects the S (x) aux space onto vectors whose S-marginals are
        feasible; embed lifts an x iterate to range(Q); extract recovers
        (omega, x) from a vector. Follows the purification characterization
        of the invariant sets (invariant states are exactly the marginals of
        conjugate-pair-projector eigenvectors).
        """
        d = self.s_dim * self.r_dim
        if self.kind == "bsym":
            d_aux = max(self.x_dim, rank_rho)
            q = np.kron(self.projector, np.eye(d_aux))
            embed = lambda x: _canonical_purification(self.to_omega(x), d_aux, conj=False)

            def extract(wvec):
                omega = _marginal_first(wvec, d, d_aux)
                return omega, self.iso.conj().T @ omega @ self.iso
            return q, embed, extract

        if self.kind == "sym":
            q = _average([np.kron(u, u.conj()) for u in self.unitaries])
            embed = lambda x: _canonical_purification(self.to_omega(x), d, conj=True)

            def extract(wvec):
                omega = _marginal_first(wvec, d, d)
                return omega, omega
            return q, embed, extract

        if self.kind == "bse":
            e_dim = max(self.x_dim, math.ceil(rank_rho / self.r_dim), 1)
            q = np.kron(self.projector, np.eye(e_dim))
            embed = lambda x: _canonical_purification(self.to_omega(x), e_dim, conj=False)

            def extract(wvec):
                omega = _marginal_first(wvec, d, e_dim)
                return omega, self.iso.conj().T @ omega @ self.iso
            return q, embed, extract

        if self.kind == "symext":
            q = _average([np.kron(u, u.conj()) for u in self.unitaries])
            embed = lambda x: _canonical_purification(self.to_omega(x), d, conj=True)

            def extract(wvec):
                omega = _marginal_first(wvec, d, d)
                return omega, omega
            return q, embed, extract

        # qc_sym: conjugate-pair projector intersected with the
        # classically-correlated projector (they commute, since the shift
        # part permutes classical indices pairwise).
        dq, dc = self.qc_dims
        q_sym = _average([np.kron(u, u.conj()) for u in self.unitaries])
        cc = np.zeros((d * d, d * d), dtype=complex)
        for x in range(dc):
            ex = np.zeros((dc, dc))
            ex[x, x] = 1.0
            pix = np.kron(np.kron(np.eye(dq), ex), np.kron(np.eye(dq), ex))
            cc += pix
        q = q_sym @ cc
        embed = lambda x: _canonical_purification(self.to_omega(x), d, conj=True)

        def extract(wvec):
            omega = _marginal_first(wvec, d, d)
            return self._dephase(omega), omega
        return q, embed, extract


def _canonical_purification(omega: np.ndarray, dp: int, conj: bool) -> np.ndarray:
    """sum_k sqrt(l_k) v_k (x) e_k, or v_k (x) conj(v_k) when conj=True.

    The conjugated form is the group-invariant purification, so it lies in
    the range of the conjugate-pair projector whenever omega is invariant.
    """
    w, v = np.linalg.eigh((omega + omega.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    d = omega.shape[0]
    out = np.zeros(d * (d if conj else dp), dtype=complex)
    order = np.argsort(w)[::-1]
    for slot, k in enumerate(order):
        if w[k] <= 1e-16:
            break
        if conj:
            out += math.sqrt(w[k]) * np.kron(v[:, k], v[:, k].conj())
        else:
            if slot >= dp:
                break
            e = np.zeros(dp, dtype=complex)
            e[slot] = 1.0
            out += math.sqrt(w[k]) * np.kron(v[:, k], e)
    n = np.linalg.norm(out)
    return out / n if n > 0 else out


def _marginal_first(wvec: np.ndarray, d_first: int, d_rest: int) -> np.ndarray:
    m = wvec.reshape(d_first, d_rest)
    return m @ m.conj().T


# ---------------------------------------------------------------------------
# Problem container
# ---------------------------------------------------------------------------

@dataclass
class ConstrainedFidelityProblem:
    """Maximize F(rho, sigma) over one symmetric feasible set."""

    rho: DensityMatrix
    feasible: FeasibleSet

    @classmethod
    def bsym(cls, rep: GroupRep, rho: DensityMatrix):
        return cls(rho, FeasibleSet.from_rep("bsym", rep, rho.dim))

    @classmethod
    def sym(cls, rep: GroupRep, rho: DensityMatrix):
        return cls(rho, FeasibleSet.from_rep("sym", rep, rho.dim))

    @classmethod
    def bse(cls, rep: GroupRep, rho: DensityMatrix, r_qubits: int):
        return cls(rho, FeasibleSet.from_rep("bse", rep, rho.dim, 2 ** r_qubits))

    @classmethod
    def symext(cls, rep: GroupRep, rho: DensityMatrix, r_qubits: int):
        return cls(rho, FeasibleSet.from_rep("symext", rep, rho.dim, 2 ** r_qubits))

    def __post_init__(self):
        if self.rho.dim != self.feasible.s_dim:
            raise QsymError("state dimension does not match the feasible set")


# ---------------------------------------------------------------------------
# Fidelity value and gradient
# ---------------------------------------------------------------------------

def _fid(sqrt_rho: np.ndarray, sigma: np.ndarray) -> float:
    mid = sqrt_rho @ sigma @ sqrt_rho
    w = np.linalg.eigvalsh((mid + mid.conj().T) / 2)
    return float(np.sum(np.sqrt(_clip_spectrum(w))) ** 2)


def _fid_and_grad(sqrt_rho: np.ndarray, sigma: np.ndarray):
    """F and its gradient g * sqrt_rho (sqrt_rho sigma sqrt_rho)^{-1/2} sqrt_rho,
    pseudo-inverted on the support."""
    mid = sqrt_rho @ sigma @ sqrt_rho
    w, v = np.linalg.eigh((mid + mid.conj().T) / 2)
    sq = np.sqrt(np.clip(w, 0.0, None))
    g = float(np.sum(sq))
    cutoff = max(sq[-1], 1.0) * EIG_CUTOFF
    inv = np.where(sq > cutoff, 1.0 / np.maximum(sq, cutoff), 0.0)
    inv_half = (v * inv) @ v.conj().T
    grad = g * (sqrt_rho @ inv_half @ sqrt_rho)
    return g * g, (grad + grad.conj().T) / 2


def _line_search(sqrt_rho, ops: FeasibleSet, x, x_v, iters: int = 40) -> float:
    sigma_a = ops.to_sigma(x)
    sigma_b = ops.to_sigma(x_v)

    def f(gamma: float) -> float:
        return _fid(sqrt_rho, (1 - gamma) * sigma_a + gamma * sigma_b)

    lo, hi = 0.0, 1.0
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) < f(m2):
            lo = m1
        else:
            hi = m2
    gamma = (lo + hi) / 2
    return 1.0 if f(1.0) >= f(gamma) else gamma


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

def _certified_gap(sqrt_rho, ops: FeasibleSet, x_best: np.ndarray) -> float:
    """By concavity: f* <= f(x_reg) + <grad, lmo - sigma_reg>. The base point
    has maximal support among feasible states, so mixing it in keeps the
    gradient finite along every feasible direction."""
    x_reg = (1 - GRAD_EPS) * x_best + GRAD_EPS * ops.base_x()
    sigma_reg = ops.to_sigma(x_reg)
    f_reg, grad = _fid_and_grad(sqrt_rho, sigma_reg)
    lin, _ = ops.lmo(grad)
    f_best = _fid(sqrt_rho, ops.to_sigma(x_best))
    gap = f_reg + (lin - float(np.real(np.trace(grad @ sigma_reg)))) - f_best
    return max(gap, 0.0)


def _frank_wolfe(sqrt_rho, ops: FeasibleSet, x, budget: int, gap_tol: float):
    iters = 0
    for _ in range(budget):
        x_reg = (1 - GRAD_EPS) * x + GRAD_EPS * ops.base_x()
        sigma = ops.to_sigma(x_reg)
        _, grad = _fid_and_grad(sqrt_rho, sigma)
        lin, x_v = ops.lmo(grad)
        gap = lin - float(np.real(np.trace(grad @ sigma)))
        iters += 1
        if gap < gap_tol:
            break
        gamma = _line_search(sqrt_rho, ops, x, x_v)
        if gamma <= 0.0:
            break
        x = (1 - gamma) * x + gamma * x_v
    return x, iters


def _alternate_uhlmann(rho_a, sqrt_rho, ops: FeasibleSet, x,
                       max_iter: int = 4000, tol: float = 1e-14):
    lift = ops.purified_lift(max(1, int(np.sum(np.linalg.eigvalsh(rho_a) > 1e-12))))
    if lift is None:
        return x, 0
    q, embed, extract = lift
    d_s = ops.s_dim
    wvec = q @ embed(x)
    n = np.linalg.norm(wvec)
    if n < 1e-13:
        return x, 0
    wvec = wvec / n

    lam, evec = np.linalg.eigh(rho_a)
    keep = lam > 1e-14
    lam = np.clip(lam[keep], 0.0, None)
    e_frame = evec[:, keep]
    sqrt_lam = np.sqrt(lam)

    total_aux = wvec.size // d_s
    last = -1.0
    its = 0
    for its in range(1, max_iter + 1):
        m_w = wvec.reshape(d_s, total_aux)
        b = sqrt_lam[:, None] * (e_frame.conj().T @ m_w)
        ub, sv, vbh = np.linalg.svd(b, full_matrices=True)
        overlap = float(np.sum(sv))
        # Uhlmann-optimal purification of rho aligned with w.
        vb = ub @ vbh[:ub.shape[1], :]
        m_phi = e_frame @ (sqrt_lam[:, None] * vb)
        wnew = q @ m_phi.reshape(-1)
        n = np.linalg.norm(wnew)
        if n < 1e-13:
            break
        wvec = wnew / n
        if abs(overlap - last) < tol * max(1.0, overlap):
            break
        last = overlap

    omega, x_new = extract(wvec)
    tr = float(np.real(np.trace(omega)))
    if tr > 1e-13:
        x_new = x_new / float(np.real(np.trace(x_new)))
        if _fid(sqrt_rho, ops.to_sigma(x_new)) >= _fid(sqrt_rho, ops.to_sigma(x)):
            return x_new, its
    return x, its


def max_symmetric_fidelity(problem: ConstrainedFidelityProblem,
                           max_iter: int = DEFAULT_MAX_ITER,
                           gap_tol: float = DEFAULT_GAP_TOL,
                           fail_gap: float = 1e-5) -> OptReport:
    """Solve max F(rho, sigma) over the problem's feasible set.

    Raises ConvergenceError when the budget is exhausted with a certified gap
    above ``fail_gap``; the partial report rides on the exception.
    """
    rho_a = asarray(problem.rho)
    sqrt_rho = sqrtm_psd(rho_a)
    ops = problem.feasible

    x = ops.base_x()
    total = 0
    x, its = _alternate_uhlmann(rho_a, sqrt_rho, ops, x)
    total += its
    gap = _certified_gap(sqrt_rho, ops, x)

    fw_chunk = 200
    while gap > gap_tol and total < max_iter:
        x, its = _frank_wolfe(sqrt_rho, ops, x, min(fw_chunk, max_iter - total), gap_tol)
        total += its
        x, its = _alternate_uhlmann(rho_a, sqrt_rho, ops, x)
        total += its
        gap = _certified_gap(sqrt_rho, ops, x)
        fw_chunk = min(2 * fw_chunk, 5000)

    omega = ops.to_omega(x)
    omega = (omega + omega.conj().T) / 2
    omega = omega / np.real(np.trace(omega))
    sigma = ops.to_sigma(x)
    sigma = (sigma + sigma.conj().T) / 2
    sigma = sigma / np.real(np.trace(sigma))
    value = fidelity(rho_a, sigma)
    report = OptReport(
        value=value,
        sigma_star=DensityMatrix(sigma, tol=1e-8),
        iterations=total,
        duality_or_bound_gap=gap,
        extension=DensityMatrix(omega, tol=1e-8) if ops.r_dim > 1 else None,
    )
    if gap > fail_gap:
        raise ConvergenceError(
            f"solver stopped at certified gap {gap:.3e} > {fail_gap:.0e} "
            f"after {total} iterations", report)
    return report


# ---------------------------------------------------------------------------
# Independent bounds
# ---------------------------------------------------------------------------

def brute_force_fidelity_bound(problem: ConstrainedFidelityProblem,
                               samples: int, seed: int) -> float:
    """Lower bound: best fidelity over randomly sampled feasible states.

    Samples cycle through free-variable ranks so both extreme points (rank
    one) and interior states are visited.
    """
    ops = problem.feasible
    if ops.s_dim * ops.r_dim > 16:
        raise QsymError("brute-force sampling supports total dim <= 16")
    rng = np.random.default_rng(seed)
    rho_a = asarray(problem.rho)
    best = 0.0
    for i in range(samples):
        rank = 1 + i % ops.x_dim
        x = asarray(random_density_matrix(ops.x_dim, rng, rank=rank))
        best = max(best, fidelity(rho_a, ops.to_sigma(x)))
    return best


def twirl_lower_bound(problem: ConstrainedFidelityProblem) -> float:
    """F(rho, T_G(rho)) <= the Sym optimum, since the twirled state is feasible."""
    if problem.feasible.kind != "sym":
        raise QsymError("twirl_lower_bound applies to the Sym feasible set only")
    rho_a = asarray(problem.rho)
    return fidelity(rho_a, twirl_matrix(problem.feasible.unitaries, rho_a))
