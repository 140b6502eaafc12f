"""Group registry: tables, representations, projectors, twirls, preparations."""

import itertools
import math

import numpy as np
import pytest

from qsymtest import groups
from qsymtest.groups import (FiniteGroup, GroupRep, ProductRep,
                             ProjectiveRepresentationError, builtin,
                             collective_phase_unitaries, group_projector,
                             hamming_projector, resolve,
                             symmetric_subspace_projector, twirl)
from qsymtest.qmath import DensityMatrix, random_density_matrix
from qsymtest.simulator import Circuit

ALL_NAMES = groups.builtin_names()


class TestFiniteGroup:
    def test_builtin_tables_are_groups(self):
        # Constructor enforces rearrangement, identity, associativity.
        for name in ALL_NAMES:
            g = builtin(name).group
            inv = g.inverse
            for i in range(g.order):
                assert g.mul(i, inv[i]) == 0
                assert g.mul(inv[i], i) == 0

    def test_bad_table_rejected(self):
        with pytest.raises(Exception):
            FiniteGroup(("e", "a"), np.array([[0, 0], [1, 1]]))

    def test_d3_table_matches_published(self):
        # Rows/columns e, f, r, r2, fr, fr2 in the reference ordering.
        rep = builtin("d3")
        names = list(rep.group.elements)
        order = [names.index(x) for x in ("e", "f", "r", "r2", "fr", "fr2")]
        published = [
            ["e", "f", "r", "r2", "fr", "fr2"],
            ["f", "e", "fr", "fr2", "r", "r2"],
            ["r", "fr2", "r2", "e", "f", "fr"],
            ["r2", "fr", "e", "r", "fr2", "f"],
            ["fr", "r2", "fr2", "f", "e", "r"],
            ["fr2", "r", "f", "fr", "r2", "e"],
        ]
        for i, row in enumerate(published):
            for j, expect in enumerate(row):
                got = rep.group.mul(order[i], order[j])
                assert names[got] == expect, (i, j)

    def test_s3_table_matches_published(self):
        rep = builtin("s3")
        names = list(rep.group.elements)
        order = [names.index(x) for x in ("e", "a", "b", "c", "d", "f")]
        published = [
            ["e", "a", "b", "c", "d", "f"],
            ["a", "e", "d", "f", "b", "c"],
            ["b", "f", "e", "d", "c", "a"],
            ["c", "d", "f", "e", "a", "b"],
            ["d", "c", "a", "b", "f", "e"],
            ["f", "b", "c", "a", "e", "d"],
        ]
        for i, row in enumerate(published):
            for j, expect in enumerate(row):
                assert names[rep.group.mul(order[i], order[j])] == expect, (i, j)


class TestRepresentations:
    def test_homomorphism_up_to_phase(self):
        # Exhaustive product check; the phase matrix is all ones for the
        # genuine representations and unimodular for the projective ones.
        for name in ALL_NAMES:
            rep = builtin(name)
            np.testing.assert_allclose(np.abs(rep.phases), 1.0, atol=1e-9)
            if name not in ("collective_u",):
                np.testing.assert_allclose(rep.phases, np.ones_like(rep.phases),
                                           atol=1e-9, err_msg=name)

    def test_prep_amplitudes_exact(self):
        for name in ALL_NAMES:
            rep = builtin(name)
            amp = 1 / math.sqrt(rep.order)
            plus = rep.plus_state()
            mapped = set(rep.control_map.values())
            for b, a in enumerate(plus):
                if b in mapped:
                    assert abs(a - amp) <= 1e-10, name
                else:
                    assert abs(a) <= 1e-10, name

    def test_prep_angles(self):
        assert abs(groups.THETA_SIX - 2 * math.atan(1 / math.sqrt(2))) < 1e-15
        assert abs(groups.THETA_THREE - 2 * math.atan(math.sqrt(2))) < 1e-15
        assert builtin("d3").order == 6
        assert builtin("collective_u").control_qubits == 5

    def test_projector_commutes_with_unitaries(self):
        for name in ALL_NAMES:
            rep = builtin(name)
            pi = rep.projector_matrix()
            for u in rep.unitaries:
                assert np.max(np.abs(u @ pi - pi)) <= 1e-10, name
                assert np.max(np.abs(pi @ u - pi)) <= 1e-10, name

    def test_known_projectors(self):
        np.testing.assert_allclose(builtin("z2").projector_matrix(),
                                   np.diag([1.0, 0.0]), atol=1e-12)
        singlet = np.zeros(4, dtype=complex)
        singlet[1], singlet[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        np.testing.assert_allclose(builtin("collective_u").projector_matrix(),
                                   np.outer(singlet, singlet.conj()), atol=1e-12)
        np.testing.assert_allclose(builtin("collective_phase_n2").projector_matrix(),
                                   hamming_projector(2, 1).a, atol=1e-12)

    def test_projective_rep_refused_for_bose(self):
        # {I, iZ} squares to -I: the average is not idempotent.
        g = FiniteGroup(("e", "g"), np.array([[0, 1], [1, 0]]))
        rep = GroupRep("phased", g, [np.eye(2), 1j * np.diag([1.0, -1.0])])
        with pytest.raises(ProjectiveRepresentationError):
            group_projector(rep)

    def test_phased_prep_rejected(self):
        g = FiniteGroup(("e", "g"), np.array([[0, 1], [1, 0]]))
        prep = Circuit(1).x(0).h(0)   # amplitudes 1/sqrt2, -1/sqrt2
        with pytest.raises(Exception):
            GroupRep("bad_prep", g, [np.eye(2), np.diag([1.0, -1.0])],
                     1, {0: 0, 1: 1}, prep)

    def test_unknown_name(self):
        with pytest.raises(Exception):
            builtin("so3")


class TestTwirl:
    def test_fixed_point_and_idempotence(self):
        rng = np.random.default_rng(0)
        for name in ALL_NAMES:
            rep = builtin(name)
            for _ in range(5):
                rho = random_density_matrix(rep.dim, rng)
                t1 = twirl(rep, rho)
                t2 = twirl(rep, t1)
                assert abs(np.trace(t1.a) - 1) <= 1e-10
                assert np.max(np.abs(t2.a - t1.a)) <= 1e-9, name
                for u in rep.unitaries:
                    assert np.max(np.abs(u @ t1.a @ u.conj().T - t1.a)) <= 1e-9

    def test_z2_plus_to_mixed(self):
        plus = np.full((2, 2), 0.5, dtype=complex)
        out = twirl(builtin("z2"), DensityMatrix(plus))
        np.testing.assert_allclose(out.a, np.eye(2) / 2, atol=1e-12)

    def test_collective_u_twirl_is_werner(self):
        # Same singlet overlap before and after, and the output is a Werner
        # state: w P + (1-w)(I-P)/3.
        rng = np.random.default_rng(1)
        rep = builtin("collective_u")
        p_singlet = rep.projector_matrix()
        for _ in range(10):
            rho = random_density_matrix(4, rng)
            w_before = float(np.real(np.trace(p_singlet @ rho.a)))
            out = twirl(rep, rho).a
            w_after = float(np.real(np.trace(p_singlet @ out)))
            assert abs(w_before - w_after) <= 1e-10
            werner = w_after * p_singlet + (1 - w_after) * (np.eye(4) - p_singlet) / 3
            assert np.max(np.abs(out - werner)) <= 1e-9


class TestSubspaceProjectors:
    def test_hamming_examples(self):
        np.testing.assert_allclose(hamming_projector(2, 1).a,
                                   np.diag([0, 1.0, 1.0, 0]), atol=1e-15)
        np.testing.assert_allclose(hamming_projector(2, 0).a,
                                   np.diag([1.0, 0, 0, 0]), atol=1e-15)
        with pytest.raises(Exception):
            hamming_projector(2, 3)

    def test_symmetric_subspace_ranks(self):
        for k, d in [(2, 2), (3, 2), (2, 3), (4, 2)]:
            pi = symmetric_subspace_projector(k, d)
            assert pi.is_projector(1e-10)
            assert abs(np.trace(pi.a) - math.comb(d + k - 1, k)) <= 1e-9

    def test_symmetric_projector_commutes_with_permutations(self):
        from qsymtest.groups import permutation_rep_unitary
        pi = symmetric_subspace_projector(3, 2).a
        for perm in itertools.permutations(range(3)):
            w = permutation_rep_unitary(perm)
            assert np.max(np.abs(w @ pi - pi @ w)) <= 1e-12

    def test_collective_phase_average_identity(self):
        # Summing the three diagonal-phase unitaries reproduces the middle
        # Hamming projector for n = 2.
        us = collective_phase_unitaries(2)
        avg = sum(us) / 3
        np.testing.assert_allclose(avg, hamming_projector(2, 1).a, atol=1e-10)
        for u in us:
            np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)

    def test_collective_phase_odd_n_vanishes(self):
        us = collective_phase_unitaries(3)
        assert np.max(np.abs(sum(us) / 4)) <= 1e-10


class TestProducts:
    def test_product_rep_structure(self):
        prod = ProductRep([builtin("z2"), builtin("s2")])
        assert prod.order == 4
        assert prod.system_qubits == 3
        assert prod.control_qubits == 2
        # Tensor structure of the unitaries.
        z = np.diag([1.0, -1.0])
        swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
        np.testing.assert_allclose(prod.unitaries[3], np.kron(z, swap), atol=1e-12)
        assert group_projector(prod).is_projector(1e-9)

    def test_resolve_product_syntax(self):
        rep = resolve("product(s2, s2)")
        assert rep.order == 4
        assert rep.system_qubits == 4
        with pytest.raises(Exception):
            resolve("product(s2)")

    def test_product_prep(self):
        rep = resolve("product(z2, z2)")
        plus = rep.plus_state()
        np.testing.assert_allclose(plus, np.full(4, 0.5), atol=1e-12)
