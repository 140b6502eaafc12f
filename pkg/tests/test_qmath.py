"""Core linear-algebra and quantum-primitive checks."""

import numpy as np
import pytest

from qsymtest.qmath import (CMatrix, DensityMatrix, PureState, QsymError,
                            complex_conjugate, fidelity, hermitian_eig, kron,
                            partial_trace, purify, random_density_matrix,
                            random_pure_state, random_unitary)

I2 = np.eye(2, dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


class TestCMatrix:
    def test_predicates(self):
        assert CMatrix(Z).is_hermitian()
        assert CMatrix(Z).is_unitary()
        assert not CMatrix(Z).is_psd()
        assert CMatrix(np.diag([1.0, 0.0])).is_projector()
        assert not CMatrix(np.diag([0.5, 0.5])).is_projector()

    def test_rejects_nonfinite(self):
        with pytest.raises(QsymError):
            CMatrix([[np.nan, 0], [0, 1]])

    def test_rejects_nonsquare(self):
        with pytest.raises(QsymError):
            CMatrix(np.zeros((2, 3)))

    def test_immutable(self):
        m = CMatrix(I2)
        with pytest.raises(AttributeError):
            m.a = Z


class TestStates:
    def test_density_validation(self):
        with pytest.raises(QsymError):
            DensityMatrix(np.diag([0.7, 0.7]))   # trace
        with pytest.raises(QsymError):
            DensityMatrix(np.array([[0.5, 0.5], [-0.5, 0.5]]))  # not hermitian
        with pytest.raises(QsymError):
            DensityMatrix(np.diag([1.5, -0.5]))  # not psd

    def test_pure_norm(self):
        with pytest.raises(QsymError):
            PureState([1.0, 1.0])
        psi = PureState(np.array([1, 1j]) / np.sqrt(2))
        np.testing.assert_allclose(np.trace(psi.density().a), 1.0)


class TestKron:
    def test_identity(self):
        np.testing.assert_allclose(kron(I2, I2).a, np.eye(4))

    def test_ordering_left_most_significant(self):
        np.testing.assert_allclose(kron(Z, I2).a, np.diag([1, 1, -1, -1]))

    def test_hadamard_pair(self):
        out = kron(H, H).a @ np.array([1, 0, 0, 0], dtype=complex)
        np.testing.assert_allclose(out, np.full(4, 0.5), atol=1e-12)


class TestPartialTrace:
    def test_maximally_entangled_marginal(self):
        phi = np.zeros(4, dtype=complex)
        phi[0] = phi[3] = 1 / np.sqrt(2)
        out = partial_trace(np.outer(phi, phi.conj()), [2, 2], keep={1})
        np.testing.assert_allclose(out.a, I2 / 2, atol=1e-12)

    def test_product_state(self):
        rng = np.random.default_rng(0)
        rho = random_density_matrix(3, rng).a
        sig = random_density_matrix(4, rng).a
        out = partial_trace(np.kron(rho, sig), [3, 4], keep={0})
        np.testing.assert_allclose(out.a, rho, atol=1e-12)

    def test_against_index_summation_oracle(self):
        # Brute-force component sums on a random two-qubit state.
        rng = np.random.default_rng(1)
        rho = random_density_matrix(4, rng).a
        expect = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                expect[i, j] = sum(rho[i * 2 + k, j * 2 + k] for k in range(2))
        np.testing.assert_allclose(partial_trace(rho, [2, 2], keep={0}).a, expect,
                                   atol=1e-14)
        expect2 = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                expect2[i, j] = sum(rho[k * 2 + i, k * 2 + j] for k in range(2))
        np.testing.assert_allclose(partial_trace(rho, [2, 2], keep={1}).a, expect2,
                                   atol=1e-14)

    def test_dim_mismatch(self):
        with pytest.raises(QsymError):
            partial_trace(np.eye(4), [2, 3], keep={0})


class TestEig:
    def test_pauli_z(self):
        vals, _ = hermitian_eig(Z)
        np.testing.assert_allclose(vals, [1.0, -1.0])

    def test_projector_spectrum(self):
        p = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
        vals, _ = hermitian_eig(p)
        assert all(min(abs(v), abs(v - 1)) <= 1e-9 for v in vals)

    def test_reconstruction(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        m = (a + a.conj().T) / 2
        vals, vecs = hermitian_eig(m)
        recon = vecs.a @ np.diag(vals) @ vecs.a.conj().T
        assert np.max(np.abs(recon - m)) <= 1e-9 * 8

    def test_rejects_non_hermitian(self):
        with pytest.raises(QsymError):
            hermitian_eig(np.array([[0, 1], [0, 0]], dtype=complex))


class TestFidelity:
    def test_self(self):
        rng = np.random.default_rng(3)
        rho = random_density_matrix(4, rng)
        assert abs(fidelity(rho, rho) - 1.0) <= 1e-10

    def test_orthogonal(self):
        assert fidelity(np.diag([1.0, 0]), np.diag([0, 1.0])) <= 1e-12

    def test_pure_state_closed_form(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            psi = random_pure_state(4, rng)
            sig = random_density_matrix(4, rng)
            direct = float(np.real(psi.amplitudes.conj() @ sig.a @ psi.amplitudes))
            assert abs(fidelity(psi.density(), sig) - direct) <= 1e-10

    def test_symmetry_and_unitary_invariance(self):
        rng = np.random.default_rng(5)
        for dim in (4, 8):
            for _ in range(8):
                rho = random_density_matrix(dim, rng)
                sig = random_density_matrix(dim, rng)
                f = fidelity(rho, sig)
                assert 0.0 <= f <= 1.0
                assert abs(f - fidelity(sig, rho)) <= 1e-9
                u = random_unitary(dim, rng).a
                f2 = fidelity(u @ rho.a @ u.conj().T, u @ sig.a @ u.conj().T)
                assert abs(f - f2) <= 1e-9

    def test_dim_mismatch(self):
        with pytest.raises(QsymError):
            fidelity(np.eye(2) / 2, np.eye(4) / 4)


class TestPurify:
    def test_pure_input(self):
        psi = purify(DensityMatrix(np.diag([1.0, 0.0])))
        # |0> (x) |0> up to a global phase
        assert abs(abs(psi.amplitudes[0]) - 1.0) <= 1e-10

    def test_maximally_mixed(self):
        psi = purify(DensityMatrix(I2 / 2))
        assert psi.dim == 4
        marg = partial_trace(psi.density(), [2, 2], keep={0})
        np.testing.assert_allclose(marg.a, I2 / 2, atol=1e-9)

    def test_marginals_random(self):
        # Spec invariant: 50 random states, dims 2..8, marginal within 1e-9.
        rng = np.random.default_rng(6)
        for t in range(50):
            dim = int(rng.integers(2, 9))
            rho = random_density_matrix(dim, rng)
            psi = purify(rho)
            dp = psi.dim // dim
            marg = partial_trace(psi.density(), [dim, dp], keep={0})
            assert np.max(np.abs(marg.a - rho.a)) <= 1e-9


class TestConjugate:
    def test_real_matrix_fixed(self):
        np.testing.assert_allclose(complex_conjugate(CNOT).a, CNOT)

    def test_rz_negates_angle(self):
        theta = 0.7
        rz = np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])
        np.testing.assert_allclose(complex_conjugate(rz).a,
                                   np.diag([np.exp(1j * theta / 2), np.exp(-1j * theta / 2)]))

    def test_t_gate(self):
        t = np.diag([1.0, np.exp(1j * np.pi / 4)])
        np.testing.assert_allclose(complex_conjugate(t).a, t.conj().T, atol=1e-15)

    def test_involution(self):
        rng = np.random.default_rng(7)
        m = random_unitary(4, rng)
        np.testing.assert_allclose(complex_conjugate(complex_conjugate(m)).a, m.a)
