"""
Configuration-driven experiment runner.

A single YAML config selects one experiment:

    experiment: exact | maxfid | train | suite
    group:      registry name (exact/maxfid/train)
    kind:       bose | sym | bse | symext
    state:      state preset name
    suite:      suite name (suite experiments)
    seed:       integer (required for train)
    out:        output JSON path
    train:      {layers, max_iters, restarts, step_size, noise_p, optimizer}

Results are written atomically as JSON with a stable schema; training also
writes the iteration/objective trace as CSV next to the JSON. Exit codes:
0 success, 2 validation error, 3 solver non-convergence.

Suites may evaluate rows in parallel; set QSYMTEST_THREADS to a worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import yaml

from . import groups, presets
from .maxfid import ConvergenceError
from .qmath import CMatrix, DensityMatrix, QsymError
from .simulator import Circuit, NoiseModel, acceptance_probability
from .symmetry_tests import (TestKind, TestSpec, bose_acceptance,
                             k_extendibility_spec, optimal_acceptance)
from .variational import TrainConfig, default_ansatz, train

SCHEMA_VERSION = 1
TABLE_TOL = 2e-3
THREADS_ENV = "QSYMTEST_THREADS"


class ConfigError(QsymError):
    """Invalid or incomplete experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description parsed from the YAML config."""

    experiment: str                      # exact | maxfid | train | suite
    group: str | None = None
    kind: str | None = None
    state: str | None = None
    suite: str | None = None
    seed: int | None = None
    out: str | None = None
    train: dict | None = None

    @classmethod
    def from_mapping(cls, cfg: dict) -> "ExperimentConfig":
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a mapping")
        experiment = str(cfg.get("experiment", "")).strip().lower()
        if experiment not in ("exact", "maxfid", "train", "suite"):
            raise ConfigError(f"unknown experiment {experiment!r}")
        out = cls(experiment=experiment,
                  group=cfg.get("group"),
                  kind=cfg.get("kind"),
                  state=cfg.get("state"),
                  suite=cfg.get("suite"),
                  seed=cfg.get("seed"),
                  out=cfg.get("out"),
                  train=cfg.get("train"))
        out.validate()
        return out

    def validate(self) -> None:
        if self.experiment == "suite":
            if not self.suite:
                raise ConfigError("suite experiments need a 'suite' name")
            presets.suite(self.suite)
            return
        if not self.group or not self.state:
            raise ConfigError("exact/maxfid/train experiments need group and state")
        TestKind.parse(self.kind or "")
        groups.resolve(self.group)
        presets.state(self.state)
        if self.experiment == "train" and self.seed is None:
            raise ConfigError("train experiments need a seed")


# ---------------------------------------------------------------------------
# Spec assembly
# ---------------------------------------------------------------------------

def _build_spec(group_name: str, kind: TestKind, state_name: str,
                extendibility_k: int | None = None) -> TestSpec:
    state = presets.state(state_name)
    if extendibility_k is not None:
        bose = kind == TestKind.BOSE_SYMMETRIC_EXTENDIBILITY
        if kind not in (TestKind.BOSE_SYMMETRIC_EXTENDIBILITY,
                        TestKind.SYMMETRIC_EXTENDIBILITY):
            raise ConfigError("extendibility suites use the bse/symext kinds")
        return k_extendibility_spec(state, extendibility_k, bose=bose)
    rep = groups.resolve(group_name)
    s_qubits = state.dim.bit_length() - 1
    r_qubits = rep.system_qubits - s_qubits
    if kind in (TestKind.BOSE_SYMMETRY, TestKind.SYMMETRY):
        if r_qubits != 0:
            raise ConfigError(
                f"state {state_name!r} has {s_qubits} qubits but {group_name} acts on "
                f"{rep.system_qubits}; the bose/sym kinds need matching widths")
    elif r_qubits < 1:
        raise ConfigError("the extendible kinds need a state smaller than the group register")
    return TestSpec(kind=kind, rep=rep, state=state, r_qubits=max(r_qubits, 0))


def _reference_for(group: str, kind: str, state: str):
    for s in presets.SUITES.values():
        if s.group == group and s.kind == kind:
            for row in s.rows:
                if row.state == state:
                    return row.reference
    return None


def _evaluate_suite_row(suite: presets.Suite, row: presets.SuiteRow) -> dict:
    kind = TestKind.parse(suite.kind)
    spec = _build_spec(suite.group, kind, row.state, suite.extendibility_k)
    if kind == TestKind.BOSE_SYMMETRY:
        value = bose_acceptance(spec.rep, spec.state)
        method = "closed_form"
    else:
        value = optimal_acceptance(spec).acceptance
        method = "convex_opt"
    out = {
        "state": row.state,
        "method": method,
        "value": value,
        "reference": row.reference,
        "deviation": abs(value - row.reference),
    }
    if row.note:
        out["note"] = row.note
    if row.erratum_derived is not None:
        out["erratum_derived_value"] = row.erratum_derived
    return out


def run_suite(name: str) -> list[dict]:
    suite = presets.suite(name)
    workers = int(os.environ.get(THREADS_ENV, "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda r: _evaluate_suite_row(suite, r), suite.rows))
    return [_evaluate_suite_row(suite, r) for r in suite.rows]


def _run_exact(group: str, kind: TestKind, state_name: str) -> dict:
    if kind != TestKind.BOSE_SYMMETRY:
        raise ConfigError("the exact experiment runs the prover-free Bose test; "
                          "use maxfid or train for the other kinds")
    rep = groups.resolve(group)
    state = presets.state(state_name)
    if state.dim != rep.dim:
        raise ConfigError(f"state {state_name!r} does not match the {group} register")
    c = rep.control_qubits
    s = rep.system_qubits
    circ = Circuit(c + s, {"C": tuple(range(c)), "S": tuple(range(c, c + s))})
    circ.extend(rep.prep_circuit, offset=0)
    circ.controlled_group(rep, list(range(c)), list(range(c, c + s)))
    plus = rep.plus_state()
    proj = CMatrix(np.outer(plus, plus.conj()))
    inp = DensityMatrix(np.kron(np.diag([1.0] + [0.0] * (2 ** c - 1)).astype(complex),
                                state.a))
    value = acceptance_probability(circ, inp, proj)
    ref = _reference_for(group, "bose", state_name)
    return {"state": state_name, "method": "circuit_exact", "value": value,
            "reference": ref,
            "deviation": abs(value - ref) if ref is not None else None}


def _run_maxfid(group: str, kind: TestKind, state_name: str) -> dict:
    spec = _build_spec(group, kind, state_name)
    res = optimal_acceptance(spec)
    ref = _reference_for(group, kind.value, state_name)
    return {"state": state_name, "method": res.method, "value": res.acceptance,
            "reference": ref,
            "deviation": abs(res.acceptance - ref) if ref is not None else None}


def _run_train(group: str, kind: TestKind, state_name: str, seed: int,
               overrides: dict, trace_path: str | None) -> dict:
    spec = _build_spec(group, kind, state_name)
    layers = int(overrides.get("layers", 3))
    noise_p = float(overrides.get("noise_p", 0.0))
    cfg = TrainConfig(
        optimizer=str(overrides.get("optimizer", "fd_ascent")),
        step_size=float(overrides.get("step_size", 0.2)),
        max_iters=int(overrides.get("max_iters", 2000)),
        restarts=int(overrides.get("restarts", 3)),
        seed=seed,
        noise=NoiseModel(noise_p) if noise_p > 0 else None,
    )
    ansatz = default_ansatz(spec, layers=layers)
    trace = train(spec, ansatz, cfg)
    if trace_path:
        trace.to_csv(trace_path)
        trace.to_json(os.path.splitext(trace_path)[0] + ".params.json")
    ref = _reference_for(group, kind.value, state_name)
    return {"state": state_name, "method": "variational",
            "value": trace.final_objective, "reference": ref,
            "deviation": abs(trace.final_objective - ref) if ref is not None else None,
            "iterations": int(len(trace.objectives))}


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def run(config_path: str, out_override: str | None = None,
        seed_override: int | None = None) -> int:
    """Execute one experiment config; returns the process exit code."""
    t0 = time.perf_counter()
    try:
        with open(config_path) as fh:
            raw = yaml.safe_load(fh) or {}
        if isinstance(raw, dict):
            if seed_override is not None:
                raw = dict(raw, seed=seed_override)
            if out_override is not None:
                raw = dict(raw, out=out_override)
        cfg = ExperimentConfig.from_mapping(raw)
        out_path = cfg.out
        result = {"schema": SCHEMA_VERSION, "experiment": cfg.experiment}
        if cfg.experiment == "suite":
            s = presets.suite(cfg.suite)
            result.update({"suite": s.name, "group": s.group, "kind": s.kind,
                           "rows": run_suite(s.name)})
        else:
            kind = TestKind.parse(cfg.kind)
            result.update({"group": cfg.group, "kind": kind.value})
            if cfg.experiment == "exact":
                result["rows"] = [_run_exact(cfg.group, kind, cfg.state)]
            elif cfg.experiment == "maxfid":
                result["rows"] = [_run_maxfid(cfg.group, kind, cfg.state)]
            else:
                trace_path = None
                if out_path:
                    trace_path = os.path.splitext(out_path)[0] + ".trace.csv"
                result["rows"] = [_run_train(cfg.group, kind, cfg.state, int(cfg.seed),
                                             cfg.train or {}, trace_path)]
        result["meta"] = {
            "seed": cfg.seed,
            "tolerances": {"table": TABLE_TOL, "solver_gap": 1e-7},
            "runtime_ms": round((time.perf_counter() - t0) * 1000, 3),
        }
        text = json.dumps(result, indent=2) + "\n"
        if out_path:
            _atomic_write(out_path, text)
        else:
            sys.stdout.write(text)
        return 0
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 3
    except (QsymError, OSError, yaml.YAMLError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2


def list_presets() -> str:
    lines = ["groups:"]
    lines += [f"  {n}" for n in groups.builtin_names()]
    lines.append("  product(<name>, <name>, ...)")
    lines.append("states:")
    lines += [f"  {n}" for n in presets.state_names()]
    lines.append("suites:")
    lines += [f"  {n}" for n in presets.suite_names()]
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qsymtest",
        description="Exact simulation, convex benchmarking, and variational "
                    "training of quantum symmetry tests.")
    parser.add_argument("--config", help="experiment config (YAML)")
    parser.add_argument("--out", help="output JSON path (overrides the config)")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--list", action="store_true",
                        help="list groups, state presets, and suites")
    args = parser.parse_args(argv)
    if args.list:
        print(list_presets())
        return 0
    if not args.config:
        parser.print_usage(sys.stderr)
        print("either --config or --list is required", file=sys.stderr)
        return 2
    return run(args.config, args.out, args.seed)


if __name__ == "__main__":
    sys.exit(main())
