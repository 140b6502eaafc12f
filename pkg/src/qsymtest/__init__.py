"""
qsymtest: classical simulation and benchmarking of quantum symmetry tests.

Subpackages: qmath (linear algebra and quantum primitives), simulator
(circuits and exact backends), groups (finite groups and representations),
symmetry_tests (the four tests and their specializations), maxfid (maximum
symmetric fidelities by convex optimization), variational (trainable
provers), resource (free-channel predicates and monotones), cli (experiment
runner).
"""

from .qmath import CMatrix, DensityMatrix, PureState, fidelity, kron, partial_trace, purify
from .simulator import Circuit, Gate, NoiseModel, acceptance_probability, run_density, run_statevector
from .groups import FiniteGroup, GroupRep, ProductRep, builtin, group_projector, twirl
from .symmetry_tests import TestKind, TestResult, TestSpec, bose_acceptance, optimal_acceptance
from .maxfid import ConstrainedFidelityProblem, OptReport, max_symmetric_fidelity
from .variational import Ansatz, TrainConfig, TrainingTrace, train

__version__ = "0.1.0"
