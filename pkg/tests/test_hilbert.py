import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import herm, random_hermitian_matrix, random_unit
from rqslab.errors import ConvergenceFailure, DimensionMismatch, NonFinite, NotHermitian, ZeroVector
from rqslab.hilbert import (
    HermitianOperator,
    StateVector,
    eigendecompose,
    inner_product,
    normalize,
    tensor_product_operator,
    tensor_product_state,
)
from rqslab.models import observer_coupling, system_projector_s2


def loop_inner(a, b):
    total = 0j
    for x, y in zip(a, b):
        total += x.conjugate() * y
    return total


def kron_by_index(a, b):
    # row-major, first factor slowest
    out = np.zeros(len(a) * len(b), dtype=complex)
    for i in range(len(a)):
        for j in range(len(b)):
            out[i * len(b) + j] = a[i] * b[j]
    return out


class TestInnerProduct:
    def test_orthonormal_basis(self, e0, e1):
        assert inner_product(e0, e0) == 1 + 0j
        assert inner_product(e0, e1) == 0j

    def test_superposition_against_loop(self, e1):
        a = StateVector([1 / math.sqrt(2), 1 / math.sqrt(2)])
        expected = loop_inner(a.amps, e1.amps)
        assert expected == pytest.approx(1 / math.sqrt(2))
        assert inner_product(a, e1) == pytest.approx(expected, abs=1e-15)

    def test_conjugates_first_argument(self):
        a = StateVector([1j, 0])
        b = StateVector([1, 0])
        assert inner_product(a, b) == pytest.approx(-1j)

    def test_dim_mismatch(self, e0):
        with pytest.raises(DimensionMismatch):
            inner_product(e0, StateVector.basis(3, 0))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 12))
    def test_conjugate_symmetry(self, seed, n):
        rng = np.random.default_rng(seed)
        a, b = StateVector(random_unit(rng, n)), StateVector(random_unit(rng, n))
        assert abs(inner_product(a, b) - inner_product(b, a).conjugate()) <= 1e-15


class TestStateVector:
    def test_physical_requires_unit_norm(self):
        with pytest.raises(ValueError):
            StateVector([1.0, 1.0])
        v = StateVector([1.0, 1.0], is_physical=False)
        assert not v.is_physical

    def test_non_finite_rejected(self):
        with pytest.raises(NonFinite):
            StateVector([np.nan, 0.0], is_physical=False)

    def test_immutable(self, e0):
        with pytest.raises(ValueError):
            e0.amps[0] = 2.0

    def test_normalize(self):
        v = normalize(StateVector([3.0, 4.0j], is_physical=False))
        assert v.norm() == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(v.amps, [0.6, 0.8j])

    def test_normalize_zero(self):
        with pytest.raises(ZeroVector):
            normalize(np.zeros(3))


class TestHermitianOperator:
    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            herm([[0, 1], [0, 0]])

    def test_tolerance_boundary(self):
        herm([[0, 1 + 5e-13], [1, 0]])
        with pytest.raises(NotHermitian):
            herm([[0, 1 + 2e-12], [1, 0]])

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatch):
            HermitianOperator(np.zeros((2, 3)))


def quadratic_eigs(m):
    # closed-form eigenvalues of a 2x2 Hermitian matrix
    a, d = m[0, 0].real, m[1, 1].real
    b = abs(m[0, 1])
    mean, half = 0.5 * (a + d), math.sqrt(0.25 * (a - d) ** 2 + b * b)
    return mean - half, mean + half


class TestEigendecompose:
    def test_identity(self):
        d = eigendecompose(HermitianOperator.identity(3))
        np.testing.assert_array_equal(d.eigenvalues, [1.0, 1.0, 1.0])

    def test_observer_coupling_against_quadratic_formula(self):
        h = observer_coupling(2.0)
        expected = quadratic_eigs(h.matrix)
        assert expected == pytest.approx((-2.0, 2.0))
        d = eigendecompose(h)
        np.testing.assert_allclose(d.eigenvalues, expected, atol=1e-14)

    def test_detector_spectrum(self):
        h = tensor_product_operator(system_projector_s2(), observer_coupling(1.0))
        d = eigendecompose(h)
        np.testing.assert_allclose(d.eigenvalues, [-1.0, 0.0, 0.0, 1.0], atol=1e-14)

    def test_zero_matrix(self):
        d = eigendecompose(HermitianOperator(np.zeros((3, 3))))
        np.testing.assert_array_equal(d.eigenvalues, 0.0)
        np.testing.assert_array_equal(d.eigenvectors, np.eye(3))

    def test_ascending_and_matches_lapack(self, rng):
        for n in range(1, 17):
            h = random_hermitian_matrix(rng, n, scale=3.0)
            d = eigendecompose(HermitianOperator(h))
            assert np.all(np.diff(d.eigenvalues) >= 0)
            np.testing.assert_allclose(d.eigenvalues, np.linalg.eigvalsh(h), atol=1e-12)

    def test_degenerate_spectrum(self, rng):
        q, _ = np.linalg.qr(random_hermitian_matrix(rng, 5) + 1j * np.eye(5))
        h = (q * np.array([1.0, 1.0, 1.0, -2.0, -2.0])) @ q.conj().T
        h = 0.5 * (h + h.conj().T)
        d = eigendecompose(HermitianOperator(h))
        np.testing.assert_allclose(d.eigenvalues, [-2, -2, 1, 1, 1], atol=1e-13)
        assert np.linalg.norm(d.reconstruct() - h) <= 1e-10 * max(1, np.linalg.norm(h))

    def test_convergence_failure(self, rng):
        h = HermitianOperator(random_hermitian_matrix(rng, 6))
        with pytest.raises(ConvergenceFailure):
            eigendecompose(h, max_sweeps=1)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.floats(1e-3, 1e3))
    def test_reconstruction_and_orthonormality(self, seed, n, scale):
        h = random_hermitian_matrix(np.random.default_rng(seed), n, scale)
        d = eigendecompose(HermitianOperator(h))
        v = d.eigenvectors
        assert np.linalg.norm(d.reconstruct() - h) <= 1e-10 * max(1.0, np.linalg.norm(h))
        assert np.linalg.norm(v.conj().T @ v - np.eye(n)) <= 1e-10


class TestTensorProducts:
    def test_basis_states(self, e0):
        np.testing.assert_array_equal(tensor_product_state(e0, e0).amps, StateVector.basis(4, 0).amps)

    def test_ordering(self, e0):
        c1, c2 = 0.6, 0.8j
        out = tensor_product_state(StateVector([c1, c2]), e0)
        np.testing.assert_allclose(out.amps, [c1, 0, c2, 0])

    def test_against_index_oracle(self):
        a = StateVector([1 / math.sqrt(2), 1 / math.sqrt(2)])
        b = StateVector([0, 1])
        expected = kron_by_index(a.amps, b.amps)
        np.testing.assert_allclose(expected, [0, 1 / math.sqrt(2), 0, 1 / math.sqrt(2)])
        np.testing.assert_allclose(tensor_product_state(a, b).amps, expected, atol=1e-16)
        assert tensor_product_state(a, b).is_physical

    def test_operator_identity_and_diagonal(self):
        i4 = tensor_product_operator(HermitianOperator.identity(2), HermitianOperator.identity(2))
        np.testing.assert_array_equal(i4.matrix, np.eye(4))
        d = tensor_product_operator(HermitianOperator.diagonal([0, 1]), HermitianOperator.diagonal([2, 3]))
        np.testing.assert_array_equal(d.matrix, np.diag([0, 0, 2, 3]))

    def test_detector_hamiltonian_block(self):
        h = tensor_product_operator(system_projector_s2(), observer_coupling(1.0)).matrix
        expected = np.zeros((4, 4), dtype=complex)
        expected[3, 2] = 1j  # i*kappa |S2 O2><S2 O1|
        expected[2, 3] = -1j
        np.testing.assert_array_equal(h, expected)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
    def test_norm_multiplicative(self, seed, n, m):
        rng = np.random.default_rng(seed)
        a = StateVector(rng.normal(size=n) + 1j * rng.normal(size=n), is_physical=False)
        b = StateVector(rng.normal(size=m) + 1j * rng.normal(size=m), is_physical=False)
        out = tensor_product_state(a, b)
        assert abs(out.norm() - a.norm() * b.norm()) <= 1e-12 * max(1.0, a.norm() * b.norm())
        np.testing.assert_allclose(out.amps, kron_by_index(a.amps, b.amps), atol=1e-14)
