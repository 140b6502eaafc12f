"""
Resource-theoretic predicates and monotonicity checks.

Free channels come in four flavors matching the four test kinds: Bose
symmetric channels (the adjoint maps the output group projector above the
input one), covariant channels, and (Bose-)symmetric-extendible channels.
The latter two are represented through a user-supplied covariant extension;
the toolkit verifies the defining conditions (channel extension /
no-signaling, covariance or the Bose adjoint condition) but never searches
for an extension.

monotone_check verifies that the acceptance probability of the matching test
never decreases under a free channel; it refuses to run on channels that
fail the free predicate, since monotonicity is only claimed for free ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import maxfid
from .groups import FiniteGroup, GroupRep, twirl_matrix
from .maxfid import ConstrainedFidelityProblem
from .qmath import (DensityMatrix, QsymError, asarray, partial_trace,
                    random_density_matrix, random_unitary)
from .symmetry_tests import TestKind, bose_acceptance


def _check_kraus(kraus, d_in: int, tol: float = 1e-9):
    ks = [np.atleast_2d(asarray(k)) for k in kraus]
    comp = sum(k.conj().T @ k for k in ks)
    if np.max(np.abs(comp - np.eye(d_in))) > tol:
        raise QsymError("Kraus operators do not form a channel (sum K^dag K != I)")
    return ks


def apply_channel(kraus, rho) -> np.ndarray:
    a = asarray(rho)
    return sum(k @ a @ k.conj().T for k in kraus)


def adjoint_apply(kraus, y) -> np.ndarray:
    a = asarray(y)
    return sum(k.conj().T @ a @ k for k in kraus)


def trivial_rep(group: FiniteGroup) -> GroupRep:
    """Every element represented by the scalar 1 (trivial input system)."""
    return GroupRep("trivial", group, [np.eye(1, dtype=complex)] * group.order)


@dataclass
class ChannelRep:
    """A channel with group representations on its input and output."""

    kraus: list
    in_rep: GroupRep
    out_rep: GroupRep

    def __post_init__(self):
        if self.in_rep.order != self.out_rep.order or not np.array_equal(
                self.in_rep.group.table, self.out_rep.group.table):
            raise QsymError("input and output representations must share the group")
        self.kraus = _check_kraus(self.kraus, self.in_rep.dim)
        if any(k.shape[0] != self.out_rep.dim for k in self.kraus):
            raise QsymError("Kraus output dimension does not match the output rep")

    @property
    def d_in(self) -> int:
        return self.in_rep.dim

    @property
    def d_out(self) -> int:
        return self.out_rep.dim

    def apply(self, rho) -> np.ndarray:
        return apply_channel(self.kraus, rho)

    def compose_after(self, first: "ChannelRep") -> "ChannelRep":
        """self o first (first acts first)."""
        if first.d_out != self.d_in:
            raise QsymError("composition dimension mismatch")
        ks = [k2 @ k1 for k2 in self.kraus for k1 in first.kraus]
        return ChannelRep(ks, first.in_rep, self.out_rep)


def state_as_channel(omega: DensityMatrix, out_rep: GroupRep) -> ChannelRep:
    """A state viewed as a channel from the trivial system."""
    w, v = np.linalg.eigh(omega.a)
    ks = [np.sqrt(max(lam, 0.0)) * v[:, i:i + 1] for i, lam in enumerate(w) if lam > 1e-15]
    return ChannelRep(ks, trivial_rep(out_rep.group), out_rep)


# ---------------------------------------------------------------------------
# Free-channel predicates
# ---------------------------------------------------------------------------

def is_covariant_channel(ch: ChannelRep, tol: float = 1e-9) -> bool:
    """N o U(g) = V(g) o N for all g, checked on a full operator basis via
    superoperator matrices."""
    smat = sum(np.kron(k, k.conj()) for k in ch.kraus)
    for u, v in zip(ch.in_rep.unitaries, ch.out_rep.unitaries):
        left = smat @ np.kron(u, u.conj())
        right = np.kron(v, v.conj()) @ smat
        if np.max(np.abs(left - right)) > tol:
            return False
    return True


def is_bose_symmetric_channel(ch: ChannelRep, tol: float = 1e-9) -> bool:
    """N^dag(Pi_B) >= Pi_A within tol."""
    pi_b = ch.out_rep.projector_matrix()
    pi_a = ch.in_rep.projector_matrix()
    diff = adjoint_apply(ch.kraus, pi_b) - pi_a
    return bool(np.min(np.linalg.eigvalsh((diff + diff.conj().T) / 2)) >= -tol)


@dataclass
class ExtendedChannel:
    """A channel N on S presented through its extension M on [S][R].

    The extension must be non-signaling from R to S' (equivalently,
    Tr_R' o M = N o Tr_R for a well-defined N); the free predicates check
    covariance (symmetric-extendible kind) or the Bose adjoint condition.
    """

    extension_kraus: list
    in_rep: GroupRep            # on [S][R]
    out_rep: GroupRep           # on [S'][R']
    r_in_qubits: int
    r_out_qubits: int

    def __post_init__(self):
        self.extension_kraus = _check_kraus(self.extension_kraus, self.in_rep.dim)
        if any(k.shape[0] != self.out_rep.dim for k in self.extension_kraus):
            raise QsymError("extension Kraus output dim does not match the output rep")

    @property
    def s_in_dim(self) -> int:
        return self.in_rep.dim // 2 ** self.r_in_qubits

    @property
    def s_out_dim(self) -> int:
        return self.out_rep.dim // 2 ** self.r_out_qubits

    def _reduced_superop(self):
        """Superoperator of Tr_R' o M as a map on [S][R]."""
        d_in, d_s_out = self.in_rep.dim, self.s_out_dim
        r_out = 2 ** self.r_out_qubits
        cols = []
        for i in range(d_in):
            for j in range(d_in):
                eij = np.zeros((d_in, d_in), dtype=complex)
                eij[i, j] = 1.0
                out = apply_channel(self.extension_kraus, eij)
                red = partial_trace(out, [d_s_out, r_out], keep={0}).a
                cols.append(red.reshape(-1))
        return np.array(cols).T  # (d_s_out^2) x (d_in^2)

    def induced_kraus(self) -> list:
        """Kraus operators of N: S -> S' via a Stinespring square root of the
        induced map (valid once no-signaling holds)."""
        d_s = self.s_in_dim
        r_in = 2 ** self.r_in_qubits
        pi_r = np.eye(r_in) / r_in
        d_out = self.s_out_dim
        choi = np.zeros((d_s * d_out, d_s * d_out), dtype=complex)
        for i in range(d_s):
            for j in range(d_s):
                eij = np.zeros((d_s, d_s), dtype=complex)
                eij[i, j] = 1.0
                out = apply_channel(self.extension_kraus, np.kron(eij, pi_r))
                red = partial_trace(out, [d_out, 2 ** self.r_out_qubits], keep={0}).a
                choi[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = red
        w, v = np.linalg.eigh((choi + choi.conj().T) / 2)
        ks = []
        for lam, vec in zip(w, v.T):
            if lam > 1e-12:
                ks.append(np.sqrt(lam) * vec.reshape(d_s, d_out).T)
        return ks

    def is_nonsignaling(self, tol: float = 1e-9) -> bool:
        """Tr_R' o M = (Tr_R' o M) o (replace R by pi_R): the extension
        condition, checked on a full operator basis."""
        d_s = self.s_in_dim
        r_in = 2 ** self.r_in_qubits
        smat = self._reduced_superop()
        # Superoperator of the R-replacer on [S][R].
        pi_r = np.eye(r_in, dtype=complex) / r_in
        d_in = d_s * r_in
        rep_cols = []
        for i in range(d_in):
            for j in range(d_in):
                eij = np.zeros((d_in, d_in), dtype=complex)
                eij[i, j] = 1.0
                red = partial_trace(eij, [d_s, r_in], keep={0}).a
                rep_cols.append(np.kron(red, pi_r).reshape(-1))
        repl = np.array(rep_cols).T
        return bool(np.max(np.abs(smat - smat @ repl)) <= tol)

    def is_covariant_extension(self, tol: float = 1e-9) -> bool:
        smat = sum(np.kron(k, k.conj()) for k in self.extension_kraus)
        for u, v in zip(self.in_rep.unitaries, self.out_rep.unitaries):
            if np.max(np.abs(smat @ np.kron(u, u.conj())
                             - np.kron(v, v.conj()) @ smat)) > tol:
                return False
        return True

    def is_bose_extension(self, tol: float = 1e-9) -> bool:
        pi_out = self.out_rep.projector_matrix(check=False)
        pi_in = self.in_rep.projector_matrix(check=False)
        diff = adjoint_apply(self.extension_kraus, pi_out) - pi_in
        return bool(np.min(np.linalg.eigvalsh((diff + diff.conj().T) / 2)) >= -tol)


# ---------------------------------------------------------------------------
# Monotonicity
# ---------------------------------------------------------------------------

@dataclass
class MonotoneReport:
    kind: TestKind
    before: list[float] = field(default_factory=list)
    after: list[float] = field(default_factory=list)

    @property
    def margins(self) -> list[float]:
        return [a - b for a, b in zip(self.after, self.before)]

    def passed(self, slack: float = 1e-8) -> bool:
        return all(m >= -slack for m in self.margins)


def _measure(kind: TestKind, rep: GroupRep, rho: DensityMatrix, r_qubits: int) -> float:
    if kind == TestKind.BOSE_SYMMETRY:
        return bose_acceptance(rep, rho)
    if kind == TestKind.SYMMETRY:
        prob = ConstrainedFidelityProblem.sym(rep, rho)
    elif kind == TestKind.BOSE_SYMMETRIC_EXTENDIBILITY:
        prob = ConstrainedFidelityProblem.bse(rep, rho, r_qubits)
    else:
        prob = ConstrainedFidelityProblem.symext(rep, rho, r_qubits)
    return maxfid.max_symmetric_fidelity(prob).value


def monotone_check(kind: TestKind, channel, states, slack: float = 1e-8) -> MonotoneReport:
    """Verify measure(N(rho)) >= measure(rho) - slack for every state.

    ``channel`` is a ChannelRep for the Bose/covariant kinds and an
    ExtendedChannel for the extendible kinds. Raises when the channel fails
    the matching free predicate: monotonicity is only claimed for free
    channels.
    """
    report = MonotoneReport(kind)
    if kind in (TestKind.BOSE_SYMMETRY, TestKind.SYMMETRY):
        if not isinstance(channel, ChannelRep):
            raise QsymError("this kind takes a ChannelRep")
        free = (is_bose_symmetric_channel(channel) if kind == TestKind.BOSE_SYMMETRY
                else is_covariant_channel(channel))
        if not free:
            raise QsymError(f"channel is not free for kind {kind.value}")
        for rho in states:
            report.before.append(_measure(kind, channel.in_rep, rho, 0))
            after = DensityMatrix(channel.apply(rho), tol=1e-8)
            report.after.append(_measure(kind, channel.out_rep, after, 0))
    else:
        if not isinstance(channel, ExtendedChannel):
            raise QsymError("the extendible kinds take an ExtendedChannel")
        if not channel.is_nonsignaling():
            raise QsymError("the supplied extension is signaling, so it extends no channel")
        free = (channel.is_bose_extension()
                if kind == TestKind.BOSE_SYMMETRIC_EXTENDIBILITY
                else channel.is_covariant_extension())
        if not free:
            raise QsymError(f"extension is not free for kind {kind.value}")
        induced = channel.induced_kraus()
        for rho in states:
            report.before.append(_measure(kind, channel.in_rep, rho, channel.r_in_qubits))
            after = DensityMatrix(apply_channel(induced, rho), tol=1e-8)
            report.after.append(_measure(kind, channel.out_rep, after, channel.r_out_qubits))
    if not report.passed(slack):
        worst = min(report.margins)
        raise QsymError(f"monotonicity violated: worst margin {worst:.3e}")
    return report


# ---------------------------------------------------------------------------
# Random free channels (constructive families, used for property tests)
# ---------------------------------------------------------------------------

def random_covariant_channel(in_rep: GroupRep, out_rep: GroupRep,
                             rng: np.random.Generator, env_dim: int = 2) -> ChannelRep:
    """Group-average of a random channel: K_{g,e} = V(g) K_e U(g)^dag / sqrt|G|."""
    d_in, d_out = in_rep.dim, out_rep.dim
    iso = random_unitary(d_out * env_dim, rng).a[:, :d_in]
    base = [iso.reshape(d_out, env_dim, d_in)[:, e, :] for e in range(env_dim)]
    order = in_rep.order
    ks = []
    for u, v in zip(in_rep.unitaries, out_rep.unitaries):
        for k in base:
            ks.append(v @ k @ u.conj().T / np.sqrt(order))
    return ChannelRep(ks, in_rep, out_rep)


def random_bose_symmetric_channel(in_rep: GroupRep, out_rep: GroupRep,
                                  rng: np.random.Generator) -> ChannelRep:
    """Isometry from range(Pi_in) into range(Pi_out), plus an arbitrary
    channel on the complement; satisfies the Bose condition by construction."""
    pi_in = in_rep.projector_matrix()
    pi_out = out_rep.projector_matrix()
    w_in, v_in = np.linalg.eigh(pi_in)
    w_out, v_out = np.linalg.eigh(pi_out)
    range_in = v_in[:, w_in > 0.5]
    range_out = v_out[:, w_out > 0.5]
    comp_in = v_in[:, w_in <= 0.5]
    r_in, r_out = range_in.shape[1], range_out.shape[1]
    if r_out < r_in:
        raise QsymError("need rank(Pi_out) >= rank(Pi_in) for this construction")
    emb = random_unitary(r_out, rng).a[:, :r_in]
    t = range_out @ emb @ range_in.conj().T                   # range -> range isometry
    ks = [t]
    if comp_in.shape[1] > 0:
        # Arbitrary channel on the complement: measure in a basis of the
        # complement and reprepare random pure outputs.
        d_out = out_rep.dim
        for j in range(comp_in.shape[1]):
            out_vec = random_unitary(d_out, rng).a[:, 0]
            ks.append(np.outer(out_vec, comp_in[:, j].conj()))
    return ChannelRep(ks, in_rep, out_rep)


def random_invariant_state(rep: GroupRep, rng: np.random.Generator,
                           bose: bool = False) -> DensityMatrix:
    rho = random_density_matrix(rep.dim, rng)
    if bose:
        pi = rep.projector_matrix()
        m = pi @ rho.a @ pi
        tr = np.real(np.trace(m))
        if tr < 1e-12:
            raise QsymError("projector annihilates the sampled state")
        return DensityMatrix(m / tr, tol=1e-8)
    return DensityMatrix(twirl_matrix(rep.unitaries, rho.a), tol=1e-8)


def random_free_extension(in_rep: GroupRep, rng: np.random.Generator,
                          r_qubits: int, bose: bool = False) -> ExtendedChannel:
    """lambda * identity + (1 - lambda) * replace-with-invariant-state: a free
    extension for both extendible kinds (same input and output registers)."""
    lam = float(rng.uniform(0.2, 0.9))
    d = in_rep.dim
    omega = random_invariant_state(in_rep, rng, bose=bose)
    w, v = np.linalg.eigh(omega.a)
    ks = [np.sqrt(lam) * np.eye(d, dtype=complex)]
    for i, ev in enumerate(w):
        if ev <= 1e-15:
            continue
        for j in range(d):
            basis = np.zeros((1, d), dtype=complex)
            basis[0, j] = 1.0
            ks.append(np.sqrt((1 - lam) * max(ev, 0.0)) * v[:, i:i + 1] @ basis)
    return ExtendedChannel(ks, in_rep, in_rep, r_qubits, r_qubits)
