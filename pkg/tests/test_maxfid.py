"""Convex solver for maximum symmetric fidelities: exactness, bounds, order."""

import numpy as np
import pytest

from qsymtest import groups
from qsymtest.maxfid import (ConstrainedFidelityProblem, ConvergenceError,
                             FeasibleSet, brute_force_fidelity_bound,
                             max_symmetric_fidelity, twirl_lower_bound)
from qsymtest.qmath import (DensityMatrix, QsymError, fidelity,
                            partial_trace, random_density_matrix)


def pure(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


class TestBSymExactness:
    def test_matches_projector_trace(self):
        # Theorem-1 identity on a module-level sample (the acceptance suite
        # runs the full 20-states-per-group version).
        rng = np.random.default_rng(0)
        for name in ("z2", "d3", "collective_u", "s3"):
            rep = groups.builtin(name)
            pi = rep.projector_matrix()
            for _ in range(5):
                rho = random_density_matrix(rep.dim, rng)
                direct = float(np.real(np.trace(pi @ rho.a)))
                got = max_symmetric_fidelity(
                    ConstrainedFidelityProblem.bsym(rep, rho)).value
                assert abs(got - direct) <= 1e-6

    def test_sigma_star_feasible(self):
        rng = np.random.default_rng(1)
        rep = groups.builtin("d3")
        rho = random_density_matrix(4, rng)
        rep_out = max_symmetric_fidelity(ConstrainedFidelityProblem.bsym(rep, rho))
        fs = FeasibleSet.from_rep("bsym", rep, 4)
        assert fs.feasibility_defect(rep_out.sigma_star.a) <= 1e-8


class TestBounds:
    def test_sandwich_on_sym(self):
        rng = np.random.default_rng(2)
        rep = groups.builtin("d3")
        for _ in range(6):
            rho = random_density_matrix(4, rng)
            prob = ConstrainedFidelityProblem.sym(rep, rho)
            val = max_symmetric_fidelity(prob).value
            lower = twirl_lower_bound(prob)
            brute = brute_force_fidelity_bound(prob, samples=200, seed=3)
            assert lower <= val + 1e-9
            assert brute <= val + 1e-6
            assert val <= 1.0 + 1e-12

    def test_twirl_bound_examples(self):
        z2 = groups.builtin("z2")
        plus = pure([1, 1])
        prob = ConstrainedFidelityProblem.sym(z2, plus)
        assert abs(twirl_lower_bound(prob) - 0.5) <= 1e-10
        # and it is tight here
        assert abs(max_symmetric_fidelity(prob).value - 0.5) <= 1e-9
        # feasible rho: bound equals one
        mixed = DensityMatrix(np.diag([0.3, 0.7]))
        assert abs(twirl_lower_bound(ConstrainedFidelityProblem.sym(z2, mixed)) - 1.0) <= 1e-10

    def test_twirl_bound_wrong_kind(self):
        z2 = groups.builtin("z2")
        with pytest.raises(QsymError):
            twirl_lower_bound(ConstrainedFidelityProblem.bsym(z2, pure([1, 0])))

    def test_brute_force_reaches_feasible_optimum(self):
        # A pure state inside the feasible set: sampling approaches one.
        z2 = groups.builtin("z2")
        prob = ConstrainedFidelityProblem.sym(z2, pure([1, 0]))
        assert brute_force_fidelity_bound(prob, samples=10_000, seed=5) >= 1 - 1e-3

    def test_brute_force_z2_plus(self):
        z2 = groups.builtin("z2")
        prob = ConstrainedFidelityProblem.sym(z2, pure([1, 1]))
        assert abs(brute_force_fidelity_bound(prob, samples=4000, seed=7) - 0.5) <= 1e-3

    def test_brute_force_random_bse(self):
        # Sampling oracle: within 1e-3 of the solver on twenty seeded
        # single-qubit instances.
        rng = np.random.default_rng(8)
        d3 = groups.builtin("d3")
        for seed in range(20):
            rho = random_density_matrix(2, rng)
            prob = ConstrainedFidelityProblem.bse(d3, rho, 1)
            val = max_symmetric_fidelity(prob).value
            bound = brute_force_fidelity_bound(prob, samples=10_000, seed=seed)
            assert bound <= val + 1e-6
            assert bound >= val - 1e-3

    def test_brute_force_dim_cap(self):
        rng = np.random.default_rng(9)
        prob = ConstrainedFidelityProblem(
            random_density_matrix(4, rng),
            FeasibleSet("symext", [np.eye(32, dtype=complex)], 4, 8))
        with pytest.raises(QsymError):
            brute_force_fidelity_bound(prob, 10, 0)


class TestOrderAndStructure:
    def test_bse_below_symext(self):
        # Bose-extendible states form a subset of the extendible ones.
        rng = np.random.default_rng(3)
        d3 = groups.builtin("d3")
        for _ in range(30):
            rho = random_density_matrix(2, rng)
            bse = max_symmetric_fidelity(ConstrainedFidelityProblem.bse(d3, rho, 1)).value
            gse = max_symmetric_fidelity(ConstrainedFidelityProblem.symext(d3, rho, 1)).value
            assert bse <= gse + 1e-6

    def test_value_concave_in_rho(self):
        rng = np.random.default_rng(4)
        d3 = groups.builtin("d3")
        for _ in range(10):
            r1 = random_density_matrix(4, rng)
            r2 = random_density_matrix(4, rng)
            lam = float(rng.uniform(0, 1))
            mix = DensityMatrix(lam * r1.a + (1 - lam) * r2.a)
            v_mix = max_symmetric_fidelity(ConstrainedFidelityProblem.sym(d3, mix)).value
            v1 = max_symmetric_fidelity(ConstrainedFidelityProblem.sym(d3, r1)).value
            v2 = max_symmetric_fidelity(ConstrainedFidelityProblem.sym(d3, r2)).value
            assert v_mix >= lam * v1 + (1 - lam) * v2 - 1e-8

    def test_extension_marginal_matches_sigma(self):
        rng = np.random.default_rng(5)
        d3 = groups.builtin("d3")
        rho = random_density_matrix(2, rng)
        rep = max_symmetric_fidelity(ConstrainedFidelityProblem.symext(d3, rho, 1))
        marg = partial_trace(rep.extension, [2, 2], keep={0}).a
        assert np.max(np.abs(marg - rep.sigma_star.a)) <= 1e-8
        # extension is invariant
        fs = FeasibleSet.from_rep("symext", d3, 2, 2)
        assert fs.feasibility_defect(rep.extension.a) <= 1e-8

    def test_achieved_fidelity_matches_value(self):
        rng = np.random.default_rng(6)
        d3 = groups.builtin("d3")
        rho = random_density_matrix(4, rng)
        rep = max_symmetric_fidelity(ConstrainedFidelityProblem.sym(d3, rho))
        assert abs(fidelity(rho, rep.sigma_star) - rep.value) <= 1e-9


class TestReferenceValues:
    def test_sym_pi_tensor_2(self):
        d3 = groups.builtin("d3")
        prob = ConstrainedFidelityProblem.sym(d3, DensityMatrix(np.eye(4) / 4))
        assert abs(max_symmetric_fidelity(prob).value - 1.0) <= 1e-6

    def test_two_extendible_psi_plus(self):
        s2 = groups.builtin("s2")
        us = [np.kron(np.eye(2, dtype=complex), u) for u in s2.unitaries]
        prob = ConstrainedFidelityProblem(pure([0, 1, 1, 0]),
                                          FeasibleSet("symext", us, 4, 2))
        assert abs(max_symmetric_fidelity(prob).value - 0.75) <= 1e-6

    def test_c4_gs_derived_value(self):
        # Regression for the documented table erratum: under the printed
        # four-cycle representation, the commutant argument forces this
        # optimum to 1/2 exactly (the printed 0.7501 belongs to a
        # SWAP-symmetric set instead).
        c4 = groups.builtin("c4")
        rho = DensityMatrix(np.diag([0.5, 0, 0.5, 0]).astype(complex))
        report = max_symmetric_fidelity(ConstrainedFidelityProblem.sym(c4, rho))
        assert abs(report.value - 0.5) <= 1e-6
        assert report.duality_or_bound_gap <= 1e-7
        # ... and the SWAP-commutant optimum reproduces the printed value.
        swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                        dtype=complex)
        swap_set = FeasibleSet("sym", [np.eye(4, dtype=complex), swap], 4)
        alt = max_symmetric_fidelity(ConstrainedFidelityProblem(rho, swap_set))
        assert abs(alt.value - 0.75) <= 1e-6


class TestConvergenceReporting:
    def test_failure_raises_with_report(self):
        z2 = groups.builtin("z2")
        prob = ConstrainedFidelityProblem.sym(z2, pure([1, 1]))
        with pytest.raises(ConvergenceError) as err:
            max_symmetric_fidelity(prob, fail_gap=-1.0)
        assert err.value.report is not None
        assert abs(err.value.report.value - 0.5) <= 1e-6
