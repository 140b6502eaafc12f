"""
Circuit construction and exact execution on statevector / density backends.

Circuits are gate lists over named qubit registers. Execution is exact (no
shot sampling). The density backend supports a toy per-gate depolarizing
noise channel: after each gate, the gate's target qubits are replaced by the
maximally mixed state with probability p.

Gate matrices are never materialized on the full register; each gate is
applied to its target axes of the state tensor. Controlled-group gates are
applied block by block over the control basis, one representation unitary
per mapped control state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .qmath import CMatrix, DensityMatrix, PureState, QsymError, asarray, statevec

if TYPE_CHECKING:
    from .groups import GroupRep

SQ2 = 1.0 / np.sqrt(2.0)
_H = np.array([[SQ2, SQ2], [SQ2, -SQ2]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]], dtype=complex)


def prep_unitary(target_state) -> np.ndarray:
    """A unitary whose first column is the given state (Householder two-level
    construction), i.e. it prepares the state from |0...0>."""
    t = statevec(target_state)
    n = t.size
    t = t / np.linalg.norm(t)
    phase = t[0] / abs(t[0]) if abs(t[0]) > 1e-12 else 1.0
    tp = t / phase
    e0 = np.zeros(n, dtype=complex)
    e0[0] = 1.0
    w = tp - e0
    nw2 = np.real(np.vdot(w, w))
    if nw2 < 1e-24:
        return phase * np.eye(n, dtype=complex)
    return phase * (np.eye(n, dtype=complex) - 2.0 * np.outer(w, w.conj()) / nw2)


@dataclass(frozen=True)
class NoiseModel:
    """Per-gate depolarizing channel with probability p on the gate's targets."""

    p: float

    def __post_init__(self):
        if not (0.0 <= self.p < 1.0):
            raise QsymError(f"depolarizing probability must be in [0, 1), got {self.p}")


@dataclass(frozen=True)
class Gate:
    """One circuit operation.

    kind is one of h, x, y, z, cnot, swap, ry, rz, u (arbitrary unitary on the
    listed qubits), prep (state preparation from |0..0> on the listed qubits),
    controlled_group (first ``rep.control_qubits`` targets are the control
    register, the rest carry the representation unitaries).
    """

    kind: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: np.ndarray | None = None
    rep: "GroupRep | None" = None
    conjugated: bool = False

    def local_matrix(self) -> np.ndarray:
        """Dense matrix on the gate's targets (controlled_group included)."""
        if self.kind == "h":
            return _H
        if self.kind == "x":
            return _X
        if self.kind == "y":
            return _Y
        if self.kind == "z":
            return _Z
        if self.kind == "cnot":
            return _CNOT
        if self.kind == "swap":
            return _SWAP
        if self.kind == "ry":
            return ry_matrix(self.params[0])
        if self.kind == "rz":
            return rz_matrix(self.params[0])
        if self.kind in ("u", "prep"):
            return self.matrix
        if self.kind == "controlled_group":
            return controlled_group_unitary(self.rep, self.conjugated).a
        raise QsymError(f"unknown gate kind {self.kind!r}")


class Circuit:
    """Ordered gate list over named, possibly non-contiguous qubit registers."""

    def __init__(self, num_qubits: int, registers: dict[str, Sequence[int]] | None = None):
        if num_qubits < 1 or num_qubits > 12:
            raise QsymError(f"num_qubits must be in [1, 12], got {num_qubits}")
        self.num_qubits = num_qubits
        self.registers = {k: tuple(v) for k, v in (registers or {}).items()}
        for name, qs in self.registers.items():
            if any(q < 0 or q >= num_qubits for q in qs):
                raise QsymError(f"register {name!r} indices {qs} out of range")
        self.gates: list[Gate] = []

    def _add(self, gate: Gate) -> "Circuit":
        if len(set(gate.targets)) != len(gate.targets):
            raise QsymError(f"duplicate targets in {gate.kind}: {gate.targets}")
        if any(q < 0 or q >= self.num_qubits for q in gate.targets):
            raise QsymError(f"gate {gate.kind} targets {gate.targets} out of range")
        if gate.kind == "u":
            m = CMatrix(gate.matrix)
            if m.dim != 2 ** len(gate.targets):
                raise QsymError("unitary payload dimension does not match target count")
            if not m.is_unitary(1e-10):
                raise QsymError("unitary payload fails is_unitary(1e-10)")
        self.gates.append(gate)
        return self

    def h(self, q: int) -> "Circuit":
        return self._add(Gate("h", (q,)))

    def x(self, q: int) -> "Circuit":
        return self._add(Gate("x", (q,)))

    def y(self, q: int) -> "Circuit":
        return self._add(Gate("y", (q,)))

    def z(self, q: int) -> "Circuit":
        return self._add(Gate("z", (q,)))

    def cnot(self, control: int, target: int) -> "Circuit":
        return self._add(Gate("cnot", (control, target)))

    def swap(self, a: int, b: int) -> "Circuit":
        return self._add(Gate("swap", (a, b)))

    def ry(self, q: int, theta: float) -> "Circuit":
        return self._add(Gate("ry", (q,), (float(theta),)))

    def rz(self, q: int, theta: float) -> "Circuit":
        return self._add(Gate("rz", (q,), (float(theta),)))

    def gate_u(self, matrix, *qubits: int) -> "Circuit":
        return self._add(Gate("u", tuple(qubits), matrix=asarray(matrix)))

    def prep(self, state, *qubits: int) -> "Circuit":
        return self._add(Gate("prep", tuple(qubits), matrix=prep_unitary(state)))

    def controlled_group(self, rep: "GroupRep", controls: Sequence[int],
                         targets: Sequence[int], conjugated: bool = False) -> "Circuit":
        if len(controls) != rep.control_qubits:
            raise QsymError("control register width does not match the representation")
        if len(targets) != rep.system_qubits:
            raise QsymError("target register width does not match the representation")
        return self._add(Gate("controlled_group", tuple(controls) + tuple(targets),
                              rep=rep, conjugated=conjugated))

    def extend(self, other: "Circuit", offset: int = 0) -> "Circuit":
        for g in other.gates:
            shifted = tuple(t + offset for t in g.targets)
            self._add(Gate(g.kind, shifted, g.params, g.matrix, g.rep, g.conjugated))
        return self


def controlled_group_unitary(rep: "GroupRep", conjugated: bool = False) -> CMatrix:
    """Dense block unitary sum_g |g><g|_C (x) U(g); unmapped control states
    carry identity blocks."""
    dc = 2 ** rep.control_qubits
    ds = 2 ** rep.system_qubits
    out = np.zeros((dc * ds, dc * ds), dtype=complex)
    eye = np.eye(ds, dtype=complex)
    for b in range(dc):
        g = rep.state_to_element.get(b)
        block = eye if g is None else rep.unitaries[g]
        if conjugated and g is not None:
            block = block.conj()
        out[b * ds:(b + 1) * ds, b * ds:(b + 1) * ds] = block
    return CMatrix(out)


# ---------------------------------------------------------------------------
# Tensor application helpers
# ---------------------------------------------------------------------------

def _apply_matrix_axes(tensor: np.ndarray, mat: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to the listed axes of a (2,)*m tensor."""
    k = len(axes)
    moved = np.moveaxis(tensor, axes, range(k))
    shape = moved.shape
    flat = moved.reshape(2 ** k, -1)
    out = (mat @ flat).reshape(shape)
    return np.moveaxis(out, range(k), axes)


def _apply_group_blocks(tensor: np.ndarray, gate: Gate, axes_offset: int, conj: bool) -> np.ndarray:
    """Apply the controlled-group gate blockwise over the control basis."""
    rep = gate.rep
    c = rep.control_qubits
    ctrl_axes = [t + axes_offset for t in gate.targets[:c]]
    sys_axes = [t + axes_offset for t in gate.targets[c:]]
    moved = np.moveaxis(tensor, ctrl_axes + sys_axes, range(c + rep.system_qubits))
    shape = moved.shape
    flat = moved.reshape(2 ** c, 2 ** rep.system_qubits, -1)
    out = flat.copy()
    for b, g in rep.state_to_element.items():
        u = rep.unitaries[g]
        if gate.conjugated:
            u = u.conj()
        if conj:
            u = u.conj()
        out[b] = u @ flat[b]
    out = out.reshape(shape)
    return np.moveaxis(out, range(c + rep.system_qubits), ctrl_axes + sys_axes)


def _apply_gate_vec(tensor: np.ndarray, gate: Gate) -> np.ndarray:
    if gate.kind == "controlled_group":
        return _apply_group_blocks(tensor, gate, 0, conj=False)
    return _apply_matrix_axes(tensor, gate.local_matrix(), list(gate.targets))


def _apply_gate_density(tensor: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    # rho as a (2,)*2n tensor: row axes [0, n), column axes [n, 2n).
    if gate.kind == "controlled_group":
        tensor = _apply_group_blocks(tensor, gate, 0, conj=False)
        return _apply_group_blocks(tensor, gate, n, conj=True)
    m = gate.local_matrix()
    tensor = _apply_matrix_axes(tensor, m, list(gate.targets))
    return _apply_matrix_axes(tensor, m.conj(), [t + n for t in gate.targets])


def _depolarize(tensor: np.ndarray, targets: Sequence[int], n: int, p: float) -> np.ndarray:
    """rho -> (1-p) rho + p * (Tr_T rho) (x) I/2^k reinserted on targets T."""
    k = len(targets)
    row = list(targets)
    col = [t + n for t in targets]
    moved = np.moveaxis(tensor, row + col, range(2 * k))
    shape = moved.shape
    flat = moved.reshape(2 ** k, 2 ** k, -1)
    traced = np.einsum("aab->b", flat)
    mixed = np.multiply.outer(np.eye(2 ** k, dtype=complex) / 2 ** k, traced).reshape(shape)
    out = (1.0 - p) * moved + p * mixed
    return np.moveaxis(out, range(2 * k), row + col)


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------

def run_statevector(circuit: Circuit, input_state: PureState) -> PureState:
    """Exact statevector execution; output norm is 1 within 1e-9."""
    n = circuit.num_qubits
    v = statevec(input_state)
    if v.size != 2 ** n:
        raise QsymError(f"input dim {v.size} != 2^{n}")
    t = v.reshape((2,) * n).copy()
    for gate in circuit.gates:
        t = _apply_gate_vec(t, gate)
    out = t.reshape(-1)
    return PureState(out / np.linalg.norm(out))


def run_density(circuit: Circuit, input_state: DensityMatrix,
                noise: NoiseModel | None = None) -> DensityMatrix:
    """Exact density-matrix execution with optional per-gate depolarizing noise."""
    n = circuit.num_qubits
    r = asarray(input_state)
    if r.shape[0] != 2 ** n:
        raise QsymError(f"input dim {r.shape[0]} != 2^{n}")
    t = r.reshape((2,) * (2 * n)).copy()
    p = noise.p if noise is not None else 0.0
    for gate in circuit.gates:
        t = _apply_gate_density(t, gate, n)
        if p > 0.0:
            t = _depolarize(t, list(gate.targets), n, p)
    out = t.reshape(2 ** n, 2 ** n)
    out = (out + out.conj().T) / 2
    return DensityMatrix(out / np.trace(out).real)


def acceptance_probability(circuit: Circuit, input_state,
                           accept_projector: CMatrix,
                           register: str = "C",
                           noise: NoiseModel | None = None) -> float:
    """Run the circuit and project the named control register.

    The projector must act on the control register only; for pure noiseless
    runs this equals ||(P_C (x) I)|final>||^2.
    """
    proj = accept_projector if isinstance(accept_projector, CMatrix) else CMatrix(accept_projector)
    if not proj.is_projector(1e-9):
        raise QsymError("accept_projector fails is_projector(1e-9)")
    qubits = circuit.registers.get(register)
    if qubits is None:
        raise QsymError(f"circuit has no register named {register!r}")
    if proj.dim != 2 ** len(qubits):
        raise QsymError("projector dimension does not match the control register")
    n = circuit.num_qubits
    if isinstance(input_state, PureState) and noise is None:
        final = run_statevector(circuit, input_state)
        t = final.amplitudes.reshape((2,) * n)
        t = _apply_matrix_axes(t, proj.a, list(qubits))
        val = float(np.real(np.vdot(final.amplitudes, t.reshape(-1))))
    else:
        rho = input_state.density() if isinstance(input_state, PureState) else input_state
        final = run_density(circuit, rho, noise)
        t = final.a.reshape((2,) * (2 * n))
        t = _apply_matrix_axes(t, proj.a, list(qubits))
        val = float(np.real(np.trace(t.reshape(2 ** n, 2 ** n))))
    return min(max(val, 0.0), 1.0)


def expectation_on_axes(state_vec: np.ndarray, op: np.ndarray, axes: Sequence[int], n: int) -> float:
    """<psi| (Op on axes) |psi> for a 2^n statevector (real part)."""
    t = state_vec.reshape((2,) * n)
    t2 = _apply_matrix_axes(t, op, list(axes))
    return float(np.real(np.vdot(state_vec, t2.reshape(-1))))
