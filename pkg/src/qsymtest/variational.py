"""
Variational provers: a parameterized circuit takes the place of the
all-powerful prover, trained by gradient ascent on the exact acceptance
probability.

The ansatz alternates a layer of single-qubit Ry, Rz rotations on every
prover qubit with a linear chain of CNOTs; parameters are the 2 * qubits *
layers rotation angles. Objectives are always evaluated exactly: from the
statevector in the noiseless case (projecting with the verifier projector,
which equals the full-circuit acceptance), and from the density-matrix
backend with per-gate depolarizing noise in the noisy case (running the full
circuit including control-register preparation).
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .qmath import QsymError
from .simulator import (Circuit, NoiseModel, acceptance_probability,
                        expectation_on_axes, _apply_matrix_axes, ry_matrix,
                        rz_matrix)
from .symmetry_tests import (TestKind, TestSpec, acceptance_projector,
                             build_test_circuit, circuit_input,
                             prover_shape, _initial_vector)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ansatz:
    """Hardware-efficient prover ansatz: per layer, Ry and Rz on every qubit
    followed by a CNOT chain."""

    num_qubits: int
    layers: int = 3

    def __post_init__(self):
        if self.num_qubits < 1 or self.layers < 1:
            raise QsymError("ansatz needs at least one qubit and one layer")

    @property
    def n_params(self) -> int:
        return 2 * self.num_qubits * self.layers

    def gate_list(self, params: np.ndarray, offset: int = 0):
        """(matrix, target qubits) pairs implementing the ansatz at the given
        qubit offset."""
        params = np.asarray(params, dtype=float)
        if params.size != self.n_params:
            raise QsymError(f"expected {self.n_params} parameters, got {params.size}")
        gates = []
        idx = 0
        for _ in range(self.layers):
            for q in range(self.num_qubits):
                gates.append((ry_matrix(params[idx]), (offset + q,)))
                gates.append((rz_matrix(params[idx + 1]), (offset + q,)))
                idx += 2
            for q in range(self.num_qubits - 1):
                gates.append(("cnot", (offset + q, offset + q + 1)))
        return gates


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer settings; gradients are central finite differences on exact
    acceptance probabilities (no shot noise)."""

    optimizer: str = "fd_ascent"      # or "spsa"
    step_size: float = 0.2
    max_iters: int = 2000
    restarts: int = 3
    seed: int = 0
    noise: NoiseModel | None = None
    fd_shift: float = 1e-4
    patience: int = 150
    patience_tol: float = 1e-9

    def __post_init__(self):
        if self.step_size <= 0:
            raise QsymError("step size must be positive")
        if self.restarts < 1:
            raise QsymError("at least one restart is required")
        if self.optimizer not in ("fd_ascent", "spsa"):
            raise QsymError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class TrainingTrace:
    """Per-iteration record of the best restart, plus provenance."""

    objectives: np.ndarray            # raw objective at each iteration
    best_objectives: np.ndarray       # running best (monotone)
    params_history: np.ndarray        # parameter snapshot per iteration
    final_params: np.ndarray
    final_objective: float
    wall_time_s: float
    seed: int
    restart_objectives: list[float] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        rows = ["iteration,objective"]
        rows += [f"{i},{v:.12f}" for i, v in enumerate(self.objectives)]
        with open(path, "w") as fh:
            fh.write("\n".join(rows) + "\n")

    def to_json(self, path) -> None:
        payload = {
            "seed": self.seed,
            "final_objective": self.final_objective,
            "final_params": list(map(float, self.final_params)),
            "wall_time_s": self.wall_time_s,
            "restart_objectives": self.restart_objectives,
            "config": self.config,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)


# ---------------------------------------------------------------------------
# Objective evaluation
# ---------------------------------------------------------------------------

class _Objective:
    """Exact acceptance probability as a function of ansatz parameters."""

    def __init__(self, spec: TestSpec, ansatz: Ansatz, noise: NoiseModel | None):
        if spec.kind == TestKind.BOSE_SYMMETRY:
            raise QsymError("the Bose symmetry test has no prover to train")
        shape = prover_shape(spec)
        if ansatz.num_qubits != shape.width:
            raise QsymError(
                f"ansatz acts on {ansatz.num_qubits} qubits but the prover workspace "
                f"is {shape.width} qubits wide")
        self.spec = spec
        self.ansatz = ansatz
        self.noise = noise
        self.shape = shape
        s = spec.s_qubits
        if noise is None:
            self.n = s + shape.width
            self.init = _initial_vector(spec, shape).reshape((2,) * self.n)
            self.proj = acceptance_projector(spec)
            self.axes = list(range(s)) + [s + q for q in shape.acted_slots]
            self.offset = s
        else:
            self.circuit_base, self.accept = build_test_circuit(spec)
            self.input = circuit_input(spec, pure=False)
            self.offset = spec.rep.control_qubits + s

    def __call__(self, params: np.ndarray) -> float:
        gates = self.ansatz.gate_list(params, offset=self.offset)
        if self.noise is None:
            t = self.init
            for mat, targets in gates:
                if isinstance(mat, str):
                    t = _apply_matrix_axes(t, _CNOT, list(targets))
                else:
                    t = _apply_matrix_axes(t, mat, list(targets))
            vec = t.reshape(-1)
            val = expectation_on_axes(vec, self.proj, self.axes, self.n)
            return min(max(val, 0.0), 1.0)
        circ = Circuit(self.circuit_base.num_qubits, self.circuit_base.registers)
        prep_len = len(self.spec.rep.prep_circuit.gates)
        for g in self.circuit_base.gates[:prep_len]:
            circ.gates.append(g)
        for mat, targets in gates:
            if isinstance(mat, str):
                circ.cnot(*targets)
            else:
                circ.gate_u(mat, *targets)
        for g in self.circuit_base.gates[prep_len:]:
            circ.gates.append(g)
        return acceptance_probability(circ, self.input, self.accept, noise=self.noise)


_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def _fd_gradient(f, params: np.ndarray, shift: float) -> np.ndarray:
    grad = np.zeros_like(params)
    for i in range(params.size):
        up = params.copy()
        dn = params.copy()
        up[i] += shift
        dn[i] -= shift
        grad[i] = (f(up) - f(dn)) / (2 * shift)
    return grad


def train(spec: TestSpec, ansatz: Ansatz, cfg: TrainConfig) -> TrainingTrace:
    """Train the variational prover; returns the best restart's trace.

    Deterministic for a fixed config: restarts draw their initializations
    from a single seeded generator.
    """
    f = _Objective(spec, ansatz, cfg.noise)
    rng = np.random.default_rng(cfg.seed)
    t0 = time.perf_counter()
    best = None
    restart_finals = []
    for _ in range(cfg.restarts):
        params = rng.uniform(-np.pi, np.pi, size=ansatz.n_params)
        objs = []
        snaps = []
        best_val, best_params = -1.0, params.copy()
        stale = 0
        for _ in range(cfg.max_iters):
            val = f(params)
            objs.append(val)
            snaps.append(params.copy())
            if val > best_val + cfg.patience_tol:
                best_val, best_params = val, params.copy()
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
            if cfg.optimizer == "fd_ascent":
                grad = _fd_gradient(f, params, cfg.fd_shift)
            else:
                delta = rng.choice([-1.0, 1.0], size=params.size)
                diff = (f(params + cfg.fd_shift * delta)
                        - f(params - cfg.fd_shift * delta))
                grad = diff / (2 * cfg.fd_shift) * delta
            params = params + cfg.step_size * grad
        restart_finals.append(best_val)
        if best is None or best_val > best[0]:
            best = (best_val, best_params, np.array(objs), np.array(snaps))
    wall = time.perf_counter() - t0
    best_val, best_params, objs, snaps = best
    running = np.maximum.accumulate(objs)
    return TrainingTrace(
        objectives=objs,
        best_objectives=running,
        params_history=snaps,
        final_params=best_params,
        final_objective=float(best_val),
        wall_time_s=wall,
        seed=cfg.seed,
        restart_objectives=[float(v) for v in restart_finals],
        config={
            "optimizer": cfg.optimizer, "step_size": cfg.step_size,
            "max_iters": cfg.max_iters, "restarts": cfg.restarts,
            "noise_p": cfg.noise.p if cfg.noise else 0.0,
            "fd_shift": cfg.fd_shift, "layers": ansatz.layers,
            "prover_qubits": ansatz.num_qubits,
        },
    )


def noise_resilient_eval(trace: TrainingTrace, spec: TestSpec, ansatz: Ansatz) -> float:
    """Noiseless re-evaluation of (noisily) trained parameters.

    Typically at least the noisy objective; a violation of that pattern is
    logged, not raised, since the pattern is empirical.
    """
    f = _Objective(spec, ansatz, noise=None)
    val = f(trace.final_params)
    if val < trace.final_objective - 1e-9:
        log.warning("noiseless re-evaluation %.6f fell below the trained objective %.6f",
                    val, trace.final_objective)
    return val


def default_ansatz(spec: TestSpec, layers: int = 3) -> Ansatz:
    """Ansatz sized to the spec's prover workspace."""
    return Ansatz(num_qubits=prover_shape(spec).width, layers=layers)
