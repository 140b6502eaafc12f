"""Free-channel predicates, transitivity, and monotonicity."""

import numpy as np
import pytest

from qsymtest import groups, resource as rt
from qsymtest.groups import FiniteGroup, GroupRep
from qsymtest.qmath import DensityMatrix, QsymError, random_density_matrix
from qsymtest.simulator import Circuit, rz_matrix
from qsymtest.symmetry_tests import TestKind as Kind
from qsymtest.symmetry_tests import bose_acceptance

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def x_group():
    return GroupRep("x2", FiniteGroup(("e", "x"), np.array([[0, 1], [1, 0]])),
                    [I2, X], 1, {0: 0, 1: 1}, Circuit(1).h(0))


class TestPredicates:
    def test_identity_channel_free(self):
        z2 = groups.builtin("z2")
        ch = rt.ChannelRep([I2], z2, z2)
        assert rt.is_covariant_channel(ch)
        assert rt.is_bose_symmetric_channel(ch)

    def test_twirl_channel_covariant(self):
        d3 = groups.builtin("d3")
        ch = rt.ChannelRep([u / np.sqrt(d3.order) for u in d3.unitaries], d3, d3)
        assert rt.is_covariant_channel(ch)

    def test_rz_not_covariant_vs_x(self):
        xg = x_group()
        ch = rt.ChannelRep([rz_matrix(np.pi / 3)], xg, xg)
        assert not rt.is_covariant_channel(ch)

    def test_projection_isometry_channel_bose(self):
        # Project into range(Pi), embed isometrically, dump the rest.
        rng = np.random.default_rng(0)
        d3 = groups.builtin("d3")
        ch = rt.random_bose_symmetric_channel(d3, d3, rng)
        assert rt.is_bose_symmetric_channel(ch)

    def test_kraus_validation(self):
        z2 = groups.builtin("z2")
        with pytest.raises(QsymError):
            rt.ChannelRep([0.7 * I2], z2, z2)


class TestTransitivity:
    def test_bose_composition(self):
        rng = np.random.default_rng(1)
        z2 = groups.builtin("z2")
        for _ in range(5):
            a = rt.random_bose_symmetric_channel(z2, z2, rng)
            b = rt.random_bose_symmetric_channel(z2, z2, rng)
            assert rt.is_bose_symmetric_channel(b.compose_after(a))

    def test_covariant_composition(self):
        rng = np.random.default_rng(2)
        z2 = groups.builtin("z2")
        for _ in range(5):
            a = rt.random_covariant_channel(z2, z2, rng)
            b = rt.random_covariant_channel(z2, z2, rng)
            assert rt.is_covariant_channel(b.compose_after(a))


class TestTrivialInput:
    def test_state_is_free_iff_bose_symmetric(self):
        rng = np.random.default_rng(3)
        z2 = groups.builtin("z2")
        for _ in range(10):
            omega = random_density_matrix(2, rng)
            ch = rt.state_as_channel(omega, z2)
            lhs = rt.is_bose_symmetric_channel(ch, tol=1e-8)
            rhs = abs(bose_acceptance(z2, omega) - 1.0) <= 1e-8
            assert lhs == rhs
        member = DensityMatrix(np.diag([1.0, 0.0]))
        assert rt.is_bose_symmetric_channel(rt.state_as_channel(member, z2))


class TestMonotones:
    def test_bose_monotone(self):
        rng = np.random.default_rng(4)
        z2 = groups.builtin("z2")
        for _ in range(5):
            ch = rt.random_bose_symmetric_channel(z2, z2, rng)
            states = [random_density_matrix(2, rng) for _ in range(5)]
            report = rt.monotone_check(Kind.BOSE_SYMMETRY, ch, states)
            assert report.passed()

    def test_covariant_monotone(self):
        rng = np.random.default_rng(5)
        z2 = groups.builtin("z2")
        for _ in range(5):
            ch = rt.random_covariant_channel(z2, z2, rng)
            states = [random_density_matrix(2, rng) for _ in range(5)]
            report = rt.monotone_check(Kind.SYMMETRY, ch, states)
            assert report.passed()

    def test_twirl_channel_output_symmetric(self):
        # After a twirl, the symmetric fidelity is exactly one.
        d3 = groups.builtin("d3")
        ch = rt.ChannelRep([u / np.sqrt(d3.order) for u in d3.unitaries], d3, d3)
        rng = np.random.default_rng(6)
        states = [random_density_matrix(4, rng) for _ in range(3)]
        report = rt.monotone_check(Kind.SYMMETRY, ch, states)
        assert all(a >= 1 - 1e-6 for a in report.after)

    def test_extended_monotones(self):
        rng = np.random.default_rng(7)
        d3 = groups.builtin("d3")
        for kind, bose in [(Kind.BOSE_SYMMETRIC_EXTENDIBILITY, True),
                           (Kind.SYMMETRIC_EXTENDIBILITY, False)]:
            ext = rt.random_free_extension(d3, rng, r_qubits=1, bose=bose)
            assert ext.is_nonsignaling()
            states = [random_density_matrix(2, rng) for _ in range(4)]
            report = rt.monotone_check(kind, ext, states)
            assert report.passed()

    def test_refuses_non_free_channel(self):
        xg = x_group()
        ch = rt.ChannelRep([rz_matrix(np.pi / 3)], xg, xg)
        with pytest.raises(QsymError):
            rt.monotone_check(Kind.SYMMETRY, ch, [DensityMatrix(I2 / 2)])

    def test_free_channels_preserve_free_states(self):
        rng = np.random.default_rng(8)
        z2 = groups.builtin("z2")
        for _ in range(5):
            ch = rt.random_bose_symmetric_channel(z2, z2, rng)
            sigma = rt.random_invariant_state(z2, rng, bose=True)
            out = DensityMatrix(ch.apply(sigma), tol=1e-8)
            assert abs(bose_acceptance(z2, out) - 1.0) <= 1e-8


class TestExtensions:
    def test_signaling_extension_rejected(self):
        # A SWAP extension signals from R to S'.
        d3 = groups.builtin("d3")
        swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
                        dtype=complex)
        ext = rt.ExtendedChannel([swap], d3, d3, 1, 1)
        assert not ext.is_nonsignaling()
        with pytest.raises(QsymError):
            rt.monotone_check(Kind.SYMMETRIC_EXTENDIBILITY, ext,
                              [DensityMatrix(I2 / 2)])

    def test_induced_channel_of_identity_extension(self):
        d3 = groups.builtin("d3")
        ext = rt.ExtendedChannel([np.eye(4, dtype=complex)], d3, d3, 1, 1)
        ks = ext.induced_kraus()
        rng = np.random.default_rng(9)
        rho = random_density_matrix(2, rng)
        out = rt.apply_channel(ks, rho)
        np.testing.assert_allclose(out, rho.a, atol=1e-10)
