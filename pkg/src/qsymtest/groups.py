"""
Finite groups, their unitary representations, and control-register plumbing.

Each built-in representation carries, besides the unitaries themselves, the
published control-state-to-element mapping and a short circuit preparing the
uniform superposition over mapped control states, so the test circuits can be
assembled byte-for-byte against their reference diagrams.

Built-in names: z2, c3, c4, d3, q8, s2, s3, collective_u, collective_phase_n2.
Direct products are addressable as e.g. ``product(s2, s2)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qmath import (CMatrix, DensityMatrix, QsymError, asarray, basis_state,
                    permutation_operator)
from .simulator import Circuit, run_statevector, ry_matrix

TOL = 1e-10


class ProjectiveRepresentationError(QsymError):
    """The group average of a projective representation is not idempotent, so
    it cannot serve as the acceptance projector of a Bose-symmetry test."""


# ---------------------------------------------------------------------------
# Abstract finite groups
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteGroup:
    """Finite group as an explicit multiplication table.

    Element 0 is the identity. ``table[i, j]`` is the index of element i*j.
    """

    elements: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        n = len(self.elements)
        t = np.asarray(self.table, dtype=int)
        object.__setattr__(self, "table", t)
        if t.shape != (n, n):
            raise QsymError("multiplication table shape does not match element count")
        # Rearrangement theorem: every row and column is a permutation.
        full = set(range(n))
        for i in range(n):
            if set(t[i, :]) != full or set(t[:, i]) != full:
                raise QsymError(f"row/column {i} of the table is not a permutation")
        if any(t[0, j] != j or t[j, 0] != j for j in range(n)):
            raise QsymError("element 0 does not act as the identity")
        if n <= 12:
            for i, j, k in itertools.product(range(n), repeat=3):
                if t[t[i, j], k] != t[i, t[j, k]]:
                    raise QsymError(f"associativity fails on triple ({i},{j},{k})")

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def inverse(self) -> tuple[int, ...]:
        inv = [int(np.where(self.table[i, :] == 0)[0][0]) for i in range(self.order)]
        return tuple(inv)

    def mul(self, i: int, j: int) -> int:
        return int(self.table[i, j])


def cyclic_group(n: int, names: tuple[str, ...] | None = None) -> FiniteGroup:
    table = np.array([[(i + j) % n for j in range(n)] for i in range(n)])
    return FiniteGroup(names or tuple(f"g{i}" if i else "e" for i in range(n)), table)


def direct_product_group(a: FiniteGroup, b: FiniteGroup) -> FiniteGroup:
    na, nb = a.order, b.order
    names = tuple(f"{x}|{y}" for x in a.elements for y in b.elements)
    table = np.zeros((na * nb, na * nb), dtype=int)
    for i1, j1 in itertools.product(range(na), range(nb)):
        for i2, j2 in itertools.product(range(na), range(nb)):
            table[i1 * nb + j1, i2 * nb + j2] = a.mul(i1, i2) * nb + b.mul(j1, j2)
    return FiniteGroup(names, table)


def table_from_unitaries(unitaries, tol: float = 1e-8) -> np.ndarray:
    """Derive the multiplication table by matching products up to a phase.

    Raises if some product matches no element; the result is validated by the
    FiniteGroup constructor.
    """
    us = [asarray(u) for u in unitaries]
    n = len(us)
    d = us[0].shape[0]
    table = np.zeros((n, n), dtype=int)
    for i, j in itertools.product(range(n), repeat=2):
        prod = us[i] @ us[j]
        hit = -1
        for k in range(n):
            overlap = np.trace(us[k].conj().T @ prod) / d
            if abs(abs(overlap) - 1.0) < tol and np.max(np.abs(prod - overlap * us[k])) < tol:
                hit = k
                break
        if hit < 0:
            raise QsymError(f"product of elements {i},{j} matches no group element")
        table[i, j] = hit
    return table


# ---------------------------------------------------------------------------
# Unitary representations with control-register data
# ---------------------------------------------------------------------------

class GroupRep:
    """A finite group with a unitary representation on ``system_qubits`` qubits.

    ``control_map`` sends element indices to control-register basis states and
    ``prep_circuit`` prepares (1/sqrt|G|) sum_g |g>_C from |0...0>. Both may be
    None for representations used only in convex optimization (no circuit
    form). Projective representations are allowed: products must match table
    entries up to a recorded global phase.
    """

    def __init__(self, name: str, group: FiniteGroup, unitaries,
                 control_qubits: int | None = None,
                 control_map: dict[int, int] | None = None,
                 prep_circuit: Circuit | None = None):
        self.name = name
        self.group = group
        self.unitaries = [asarray(u) for u in unitaries]
        if len(self.unitaries) != group.order:
            raise QsymError("one unitary per group element is required")
        d = self.unitaries[0].shape[0]
        if d & (d - 1) or any(u.shape != (d, d) for u in self.unitaries):
            raise QsymError("representation unitaries must share a power-of-two dimension")
        self.system_qubits = d.bit_length() - 1
        for i, u in enumerate(self.unitaries):
            if not CMatrix(u).is_unitary(TOL):
                raise QsymError(f"representation matrix for element {i} is not unitary")
        self.phases = self._check_homomorphism()
        self.control_qubits = control_qubits
        self.control_map = dict(control_map) if control_map is not None else None
        self.prep_circuit = prep_circuit
        if self.control_map is not None:
            if control_qubits is None or prep_circuit is None:
                raise QsymError("control_map requires control_qubits and prep_circuit")
            vals = list(self.control_map.values())
            if len(set(vals)) != group.order or len(self.control_map) != group.order:
                raise QsymError("control_map must injectively cover all elements")
            if any(v < 0 or v >= 2 ** control_qubits for v in vals):
                raise QsymError("control_map state out of register range")
            self._check_prep()
        self.state_to_element = ({v: k for k, v in self.control_map.items()}
                                 if self.control_map is not None else {})
        self._projector_cache: np.ndarray | None = None

    def _check_homomorphism(self) -> np.ndarray:
        g = self.group
        d = self.unitaries[0].shape[0]
        phases = np.ones((g.order, g.order), dtype=complex)
        for i, j in itertools.product(range(g.order), repeat=2):
            prod = self.unitaries[i] @ self.unitaries[j]
            target = self.unitaries[g.mul(i, j)]
            phase = np.trace(target.conj().T @ prod) / d
            if abs(abs(phase) - 1.0) > 1e-9 or np.max(np.abs(prod - phase * target)) > 1e-9:
                raise QsymError(
                    f"{self.name}: U({i})U({j}) does not match U({g.mul(i, j)}) up to phase")
            phases[i, j] = phase
        return phases

    def _check_prep(self):
        if self.prep_circuit.num_qubits != self.control_qubits:
            raise QsymError("prep circuit width does not match the control register")
        out = run_statevector(self.prep_circuit, basis_state(2 ** self.control_qubits, 0))
        amp = 1.0 / math.sqrt(self.group.order)
        mapped = set(self.control_map.values())
        for b, a in enumerate(out.amplitudes):
            if b in mapped:
                # Real positive amplitudes required: acceptance projects onto
                # the prepared |+>_C, so phased preparations would silently
                # change the test.
                if abs(a - amp) > TOL:
                    raise QsymError(
                        f"{self.name}: prep amplitude on mapped state {b} is {a}, "
                        f"expected {amp:.12f} (real positive)")
            elif abs(a) > TOL:
                raise QsymError(f"{self.name}: prep leaks amplitude {a} onto unmapped state {b}")

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def dim(self) -> int:
        return 2 ** self.system_qubits

    def conjugate_unitaries(self) -> list[np.ndarray]:
        return [u.conj() for u in self.unitaries]

    def projector_matrix(self, check: bool = True) -> np.ndarray:
        if self._projector_cache is None:
            pi = sum(self.unitaries) / self.order
            if check and np.max(np.abs(pi @ pi - pi)) > 1e-9:
                raise ProjectiveRepresentationError(
                    f"{self.name}: the group average is not idempotent; the projective "
                    "phases obstruct a Bose-symmetry test for this representation")
            self._projector_cache = pi
        return self._projector_cache

    def plus_state(self) -> np.ndarray:
        """|+>_C as prepared by the preparation circuit."""
        if self.prep_circuit is None:
            raise QsymError(f"{self.name} has no control-register preparation circuit")
        return run_statevector(self.prep_circuit,
                               basis_state(2 ** self.control_qubits, 0)).amplitudes

    def __repr__(self):
        return (f"GroupRep({self.name!r}, order={self.order}, "
                f"system_qubits={self.system_qubits})")


class ProductRep(GroupRep):
    """Direct product of representations acting on concatenated registers."""

    def __init__(self, factors: list[GroupRep]):
        if len(factors) < 2:
            raise QsymError("a product representation needs at least two factors")
        group = factors[0].group
        for f in factors[1:]:
            group = direct_product_group(group, f.group)
        unitaries = []
        for idx in itertools.product(*(range(f.order) for f in factors)):
            u = factors[0].unitaries[idx[0]]
            for f, i in zip(factors[1:], idx[1:]):
                u = np.kron(u, f.unitaries[i])
            unitaries.append(u)
        control_qubits = None
        control_map = None
        prep = None
        if all(f.control_map is not None for f in factors):
            control_qubits = sum(f.control_qubits for f in factors)
            prep = Circuit(control_qubits)
            offset = 0
            for f in factors:
                prep.extend(f.prep_circuit, offset=offset)
                offset += f.control_qubits
            control_map = {}
            for flat, idx in enumerate(itertools.product(*(range(f.order) for f in factors))):
                state = 0
                for f, i in zip(factors, idx):
                    state = (state << f.control_qubits) | f.control_map[i]
                control_map[flat] = state
        name = "product(" + ",".join(f.name for f in factors) + ")"
        super().__init__(name, group, unitaries, control_qubits, control_map, prep)
        self.factors = list(factors)


# ---------------------------------------------------------------------------
# Spec operations
# ---------------------------------------------------------------------------

def group_projector(rep: GroupRep) -> CMatrix:
    """Pi = (1/|G|) sum_g U(g); raises ProjectiveRepresentationError when the
    average fails to be a projector."""
    return CMatrix(rep.projector_matrix(check=True))


def twirl_matrix(unitaries, m) -> np.ndarray:
    a = asarray(m)
    return sum(u @ a @ u.conj().T for u in unitaries) / len(unitaries)


def twirl(rep: GroupRep, rho: DensityMatrix) -> DensityMatrix:
    """Group twirl T_G(rho) = (1/|G|) sum_g U(g) rho U(g)^dag."""
    a = asarray(rho)
    if a.shape[0] != rep.dim:
        raise QsymError(f"state dim {a.shape[0]} != representation dim {rep.dim}")
    return DensityMatrix(twirl_matrix(rep.unitaries, a))


def hamming_projector(n: int, k: int) -> CMatrix:
    """Projector onto the n-qubit computational subspace of Hamming weight k."""
    if not 0 <= k <= n:
        raise QsymError(f"need 0 <= k <= n, got k={k}, n={n}")
    diag = np.array([1.0 if bin(x).count("1") == k else 0.0 for x in range(2 ** n)])
    return CMatrix(np.diag(diag).astype(complex))


def symmetric_subspace_projector(k: int, local_dim: int = 2) -> CMatrix:
    """Pi_sym = (1/k!) sum_{pi in S_k} W(pi) on k systems of the local dim;
    rank C(local_dim + k - 1, k)."""
    if k < 1:
        raise QsymError("k must be >= 1")
    dims = [local_dim] * k
    acc = np.zeros((local_dim ** k,) * 2, dtype=complex)
    for perm in itertools.permutations(range(k)):
        acc += permutation_operator(dims, list(perm)).a
    return CMatrix(acc / math.factorial(k))


def permutation_rep_unitary(perm, local_dim: int = 2) -> np.ndarray:
    """W(pi) sending the content of slot i to slot pi(i)."""
    k = len(perm)
    inv = [0] * k
    for i, p in enumerate(perm):
        inv[p] = i
    return permutation_operator([local_dim] * k, inv).a


# ---------------------------------------------------------------------------
# Built-in registry
# ---------------------------------------------------------------------------

_CNOT01 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H2 = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_I2 = np.eye(2, dtype=complex)

THETA_SIX = 2 * math.atan(1 / math.sqrt(2))    # superposition of 6 (and the 3-of-4 block)
THETA_THREE = 2 * math.atan(math.sqrt(2))      # superposition of 3


def _block_diag(*blocks) -> np.ndarray:
    dims = [b.shape[0] for b in blocks]
    out = np.zeros((sum(dims), sum(dims)), dtype=complex)
    pos = 0
    for b in blocks:
        out[pos:pos + b.shape[0], pos:pos + b.shape[0]] = b
        pos += b.shape[0]
    return out


def _prep_three_of_six() -> Circuit:
    # (|00> + |01> + |10>)/sqrt(3) on two qubits, then H on the third gives
    # the uniform superposition over the six states 000..101.
    c = Circuit(3)
    c.ry(0, THETA_SIX)
    c.gate_u(_block_diag(_H2, _I2), 0, 1)  # H on q1 when q0 = 0
    c.h(2)
    return c


def _prep_three() -> Circuit:
    # (|00> + |01> + |11>)/sqrt(3)
    c = Circuit(2)
    c.ry(1, THETA_THREE)
    c.gate_u(_block_diag(_I2, _H2), 1, 0)  # H on q0 when q1 = 1
    return c


def _prep_collective_u() -> Circuit:
    # (|00>+|01>+|10>)/sqrt(3) on q0 q1 and (|000>+|001>+|010>+|100>)/2 on
    # q2 q3 q4, jointly covering the twelve mapped control states.
    c = Circuit(5)
    c.ry(0, THETA_SIX)
    c.gate_u(_block_diag(_H2, _I2), 0, 1)
    c.ry(2, math.pi / 3)
    c.gate_u(_block_diag(ry_matrix(THETA_SIX), _I2), 2, 3)
    c.gate_u(_block_diag(_H2, _I2, _I2, _I2), 2, 3, 4)
    return c


def _build_z2() -> GroupRep:
    group = cyclic_group(2, ("e", "g"))
    z = np.diag([1.0, -1.0]).astype(complex)
    return GroupRep("z2", group, [_I2, z], 1, {0: 0, 1: 1}, Circuit(1).h(0))


def _build_d3() -> GroupRep:
    f = _CNOT01
    r = _CNOT01 @ _SWAP
    words = {"e": np.eye(4, dtype=complex), "f": f, "r": r, "r2": r @ r,
             "fr": f @ r, "fr2": f @ r @ r}
    order = ["e", "fr2", "fr", "r", "f", "r2"]  # control states 000..101
    unitaries = [words[w] for w in order]
    group = FiniteGroup(tuple(order), table_from_unitaries(unitaries))
    return GroupRep("d3", group, unitaries, 3, {i: i for i in range(6)},
                    _prep_three_of_six())


def _build_c3() -> GroupRep:
    a = _SWAP @ _CNOT01
    unitaries = [np.eye(4, dtype=complex), a, a @ a]
    group = cyclic_group(3, ("e", "a", "b"))
    return GroupRep("c3", group, unitaries, 2, {0: 0, 1: 1, 2: 3}, _prep_three())


def _build_c4() -> GroupRep:
    x0 = np.kron(_X, _I2)
    x1 = np.kron(_I2, _X)
    a = x0 @ _SWAP
    unitaries = [np.eye(4, dtype=complex), a, x0 @ x1, x1 @ _SWAP]
    group = cyclic_group(4, ("e", "a", "b", "c"))
    return GroupRep("c4", group, unitaries, 2, {i: i for i in range(4)},
                    Circuit(2).h(0).h(1))


def _build_q8() -> GroupRep:
    sx, sy, sz = _X, np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0]).astype(complex)
    blocks = {
        "e": _I2, "ebar": -_I2,
        "i": -1j * sx, "ibar": 1j * sx,
        "j": -1j * sy, "jbar": 1j * sy,
        "k": -1j * sz, "kbar": 1j * sz,
    }
    order = ["e", "ibar", "j", "kbar", "k", "jbar", "i", "ebar"]  # states 000..111
    unitaries = [_block_diag(_I2, blocks[w]) for w in order]
    group = FiniteGroup(tuple(order), table_from_unitaries(unitaries))
    return GroupRep("q8", group, unitaries, 3, {i: i for i in range(8)},
                    Circuit(3).h(0).h(1).h(2))


def _bilateral(axis: str) -> np.ndarray:
    # B_a = R_a(-pi/2) (x) R_a(-pi/2)
    sig = {"x": _X, "y": np.array([[0, -1j], [1j, 0]]), "z": np.diag([1.0, -1.0])}[axis]
    r = (math.cos(math.pi / 4) * _I2 + 1j * math.sin(math.pi / 4) * np.asarray(sig, dtype=complex))
    return np.kron(r, r)


def _build_collective_u() -> GroupRep:
    bx, by, bz = _bilateral("x"), _bilateral("y"), _bilateral("z")
    words = {
        "e": np.eye(4, dtype=complex),
        "a": bx @ bx, "b": by @ by, "c": bz @ bz,
        "g": bx @ by, "ga": by @ bx @ by @ bx, "gb": bz @ bx, "gc": by @ bz,
        "h": by @ bx, "ha": bz @ bx @ bz @ bx, "hb": bx @ by @ bx @ by,
        "hc": by @ bz @ by @ bz,
    }
    order = ["e", "a", "b", "c", "g", "ga", "gb", "gc", "h", "ha", "hb", "hc"]
    unitaries = [words[w] for w in order]
    group = FiniteGroup(tuple(order), table_from_unitaries(unitaries))
    # Unary encoding: two qubits select {e, g, h}, three select {e, a, b, c}.
    control_map = {
        0: 0b00000, 1: 0b00001, 2: 0b00010, 3: 0b00100,
        4: 0b01000, 5: 0b01001, 6: 0b01010, 7: 0b01100,
        8: 0b10000, 9: 0b10001, 10: 0b10010, 11: 0b10100,
    }
    return GroupRep("collective_u", group, unitaries, 5, control_map,
                    _prep_collective_u())


def collective_u_local() -> GroupRep:
    """Single-qubit factor of the collective-rotation two-design: the twelve
    products of R_a(-pi/2) rotations (a projective representation; its
    average is not a projector, so it serves covariance tests, not Bose
    tests)."""
    def r(axis):
        sig = {"x": _X, "y": np.array([[0, -1j], [1j, 0]]), "z": np.diag([1.0, -1.0])}[axis]
        return (math.cos(math.pi / 4) * _I2
                + 1j * math.sin(math.pi / 4) * np.asarray(sig, dtype=complex))
    bx, by, bz = r("x"), r("y"), r("z")
    words = {
        "e": _I2, "a": bx @ bx, "b": by @ by, "c": bz @ bz,
        "g": bx @ by, "ga": by @ bx @ by @ bx, "gb": bz @ bx, "gc": by @ bz,
        "h": by @ bx, "ha": bz @ bx @ bz @ bx, "hb": bx @ by @ bx @ by,
        "hc": by @ bz @ by @ bz,
    }
    order = ["e", "a", "b", "c", "g", "ga", "gb", "gc", "h", "ha", "hb", "hc"]
    unitaries = [words[w] for w in order]
    group = FiniteGroup(tuple(order), table_from_unitaries(unitaries))
    return GroupRep("collective_u_local", group, unitaries)


def collective_phase_unitaries(n: int) -> list[np.ndarray]:
    """U_y = sum_x exp[i pi (2y-n)(2x-n)/(n+1)] P_x for y = 0..n (P_x projects
    onto Hamming weight x). Averaging them reproduces the weight-n/2 projector."""
    ps = [hamming_projector(n, x).a for x in range(n + 1)]
    out = []
    for y in range(n + 1):
        u = np.zeros((2 ** n,) * 2, dtype=complex)
        for x in range(n + 1):
            u += np.exp(1j * math.pi * (2 * y - n) * (2 * x - n) / (n + 1)) * ps[x]
        out.append(u)
    return out


def _build_collective_phase_n2() -> GroupRep:
    u0, u1, u2 = collective_phase_unitaries(2)
    # U_1 is the identity; the group is cyclic of order three.
    group = cyclic_group(3, ("e", "a", "b"))
    return GroupRep("collective_phase_n2", group, [u1, u0, u2], 2,
                    {0: 0, 1: 1, 2: 3}, _prep_three())


def _symmetric_group_elements(k: int):
    return list(itertools.permutations(range(k)))


def _build_s2() -> GroupRep:
    unitaries = [np.eye(4, dtype=complex), permutation_rep_unitary((1, 0))]
    group = FiniteGroup(("e", "a"), np.array([[0, 1], [1, 0]]))
    return GroupRep("s2", group, unitaries, 1, {0: 0, 1: 1}, Circuit(1).h(0))


def _build_s3() -> GroupRep:
    perms = {
        "e": (0, 1, 2),
        "a": (0, 2, 1),   # swap systems 2,3
        "b": (2, 1, 0),   # swap systems 1,3
        "c": (1, 0, 2),   # swap systems 1,2
        "d": (1, 2, 0),
        "f": (2, 0, 1),
    }
    order = ["e", "a", "b", "f", "c", "d"]  # control states 000..101
    unitaries = [permutation_rep_unitary(perms[w]) for w in order]
    group = FiniteGroup(tuple(order), table_from_unitaries(unitaries))
    return GroupRep("s3", group, unitaries, 3, {i: i for i in range(6)},
                    _prep_three_of_six())


def symmetric_group_rep(k: int, local_dim: int = 2) -> GroupRep:
    """S_k permuting k systems (no control data for k > 3)."""
    if local_dim == 2 and k == 2:
        return builtin("s2")
    if local_dim == 2 and k == 3:
        return builtin("s3")
    perms = _symmetric_group_elements(k)
    perms.sort(key=lambda p: p != tuple(range(k)))  # identity first
    unitaries = [permutation_rep_unitary(p, local_dim) for p in perms]
    group = FiniteGroup(tuple("".join(map(str, p)) for p in perms),
                        table_from_unitaries(unitaries))
    return GroupRep(f"s{k}", group, unitaries)


_BUILDERS = {
    "z2": _build_z2,
    "c3": _build_c3,
    "c4": _build_c4,
    "d3": _build_d3,
    "q8": _build_q8,
    "s2": _build_s2,
    "s3": _build_s3,
    "collective_u": _build_collective_u,
    "collective_phase_n2": _build_collective_phase_n2,
}


@lru_cache(maxsize=None)
def builtin(name: str) -> GroupRep:
    """Look up a built-in representation; raises on unknown names."""
    key = name.strip().lower()
    if key not in _BUILDERS:
        raise QsymError(f"unknown group {name!r}; known: {sorted(_BUILDERS)}")
    return _BUILDERS[key]()


def builtin_names() -> list[str]:
    return sorted(_BUILDERS)


def resolve(name: str) -> GroupRep:
    """Resolve a registry name, including product(a, b, ...) composition."""
    key = name.strip().lower()
    if key.startswith("product(") and key.endswith(")"):
        inner = key[len("product("):-1]
        parts = [p.strip() for p in inner.split(",") if p.strip()]
        if len(parts) < 2:
            raise QsymError("product(...) needs at least two factor names")
        return ProductRep([resolve(p) for p in parts])
    return builtin(key)
