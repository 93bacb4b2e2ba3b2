import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_unit
from rqslab.errors import DimensionMismatch, InvalidPartition
from rqslab.hilbert import HermitianOperator, StateVector
from rqslab.models import DetectorModel, detector_context, detector_exact_state, detector_norm_limit, measurement_time
from rqslab.preclusion import Branch, PartitionSpec, branch_decompose, preclude
from rqslab.rqsl import norm_limit
from rqslab.dynamics import energy_variance

E4 = np.eye(4)


def detector_partition():
    return PartitionSpec.from_rays([("S1⊗O1", E4[0]), ("S2⊗O2", E4[3])], rest_label="rest")


def final_state(c2):
    m = DetectorModel.from_c2(c2, 1.0)
    return detector_exact_state(m, 1.0, measurement_time(m, 1.0))


def random_partition(rng, n):
    """Random orthonormal basis grouped into 1..n labelled blocks."""
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    cuts = sorted(rng.choice(np.arange(1, n), size=rng.integers(0, n), replace=False)) if n > 1 else []
    blocks = np.split(np.arange(n), cuts)
    items = []
    for k, idx in enumerate(blocks):
        cols = q[:, idx]
        p = cols @ cols.conj().T
        items.append((f"b{k}", HermitianOperator(0.5 * (p + p.conj().T))))
    return PartitionSpec(tuple(items))


def projection_oracle(state, vec):
    amp = sum(v.conjugate() * s for v, s in zip(vec, state))
    return abs(amp)


class TestPartition:
    def test_from_rays_adds_complement(self):
        p = detector_partition()
        assert p.labels == ["S1⊗O1", "S2⊗O2", "rest"]
        np.testing.assert_allclose(p.projectors[2][1].matrix, np.diag([0, 1, 1, 0]))

    def test_full_rays_have_no_rest(self):
        p = PartitionSpec.from_rays([(str(i), E4[i]) for i in range(4)])
        assert p.labels == ["0", "1", "2", "3"]

    def test_not_idempotent(self):
        with pytest.raises(InvalidPartition):
            PartitionSpec((("a", HermitianOperator(2 * np.eye(2))),))

    def test_overlapping(self):
        half = np.full((2, 2), 0.5)
        with pytest.raises(InvalidPartition):
            PartitionSpec((("a", HermitianOperator(np.diag([1.0, 0.0]))), ("b", HermitianOperator(half))))

    def test_incomplete(self):
        with pytest.raises(InvalidPartition):
            PartitionSpec((("a", HermitianOperator(np.diag([1.0, 0.0]))),))

    def test_duplicate_labels(self):
        with pytest.raises(InvalidPartition):
            PartitionSpec((("a", HermitianOperator(np.diag([1.0, 0.0]))), ("a", HermitianOperator(np.diag([0.0, 1.0])))))


class TestBranchDecompose:
    def test_detector_final_state(self):
        branches = branch_decompose(final_state(0.6), detector_partition())
        norms = [b.norm for b in branches]
        np.testing.assert_allclose(norms, [0.8, 0.6, 0.0], atol=1e-15)

    def test_basis_state_single_ray(self):
        e = StateVector.basis(3, 1)
        p = PartitionSpec.from_rays([("e1", e)], rest_label="rest")
        branches = branch_decompose(e, p)
        assert branches[0].norm == 1.0
        assert branches[1].norm == 0.0

    def test_equal_superposition(self):
        psi = StateVector(np.full(4, 0.5))
        p = PartitionSpec.from_rays([(str(i), E4[i]) for i in range(4)])
        expected = [projection_oracle(psi.amps, E4[i]) for i in range(4)]
        assert expected == [0.5] * 4
        np.testing.assert_allclose([b.norm for b in branch_decompose(psi, p)], expected, atol=1e-16)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            branch_decompose(StateVector.basis(2, 0), detector_partition())

    def test_branch_norm_checked(self):
        with pytest.raises(ValueError):
            Branch("x", StateVector([1.0, 0.0], is_physical=False), 0.5)


class TestPreclude:
    def test_zero_threshold_reassembles(self):
        psi = final_state(0.6)
        out = preclude(branch_decompose(psi, detector_partition()), 0.0)
        assert not out.report.removed_labels
        np.testing.assert_allclose(out.state.amps, psi.amps, atol=1e-12)

    def test_maverick_branch_removed(self):
        psi = final_state(1e-6)
        out = preclude(branch_decompose(psi, detector_partition()), 1e-3)
        assert out.report.kept_labels == ("S1⊗O1",)
        assert out.state.is_physical
        np.testing.assert_allclose(out.state.amps, E4[0], atol=1e-15)

    def test_equality_survives(self):
        b = Branch("x", StateVector([0.25, 0.0], is_physical=False), 0.25)
        out = preclude([b], 0.25)
        assert out.report.kept_labels == ("x",)

    def test_all_precluded(self):
        out = preclude(branch_decompose(final_state(0.6), detector_partition()), 2.0)
        assert out.state is None
        assert out.report.all_precluded
        assert out.report.survived_norm == 0.0

    def test_no_renormalize(self):
        out = preclude(branch_decompose(final_state(0.6), detector_partition()), 0.7, renormalize=False)
        assert not out.state.is_physical
        assert out.report.survived_norm == pytest.approx(0.8)
        np.testing.assert_allclose(out.state.amps, 0.8 * E4[0], atol=1e-15)

    def test_negative_threshold(self):
        with pytest.raises(ValueError):
            preclude(branch_decompose(final_state(0.6), detector_partition()), -1.0)

    @pytest.mark.parametrize("c2, dt_min", [(0.6, 1e-3), (1e-4, 1e-3), (1e-3, 1.0), (0.3, 2.5)])
    def test_threshold_from_norm_limit(self, c2, dt_min):
        # thresholding mechanics only: compare |c2| with the configured NormLim
        m = DetectorModel.from_c2(c2, 1.0)
        lim = norm_limit(energy_variance(detector_context(m)), dt_min, 1.0)
        assert lim == pytest.approx(detector_norm_limit(m, 1.0, dt_min))
        out = preclude(branch_decompose(final_state(c2), detector_partition()), lim)
        assert ("S2⊗O2" in out.report.kept_labels) == (c2 >= lim)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(0, 1.1))
    def test_pythagoras(self, seed, n, _):
        rng = np.random.default_rng(seed)
        psi = StateVector(random_unit(rng, n))
        branches = branch_decompose(psi, random_partition(rng, n))
        assert abs(sum(b.norm**2 for b in branches) - 1.0) <= 1e-10

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(0, 1.1), st.floats(0, 1.1))
    def test_monotone(self, seed, n, t1, t2):
        lo, hi = sorted((t1, t2))
        rng = np.random.default_rng(seed)
        branches = branch_decompose(StateVector(random_unit(rng, n)), random_partition(rng, n))
        kept_lo = set(preclude(branches, lo).report.kept_labels)
        kept_hi = set(preclude(branches, hi).report.kept_labels)
        assert kept_hi <= kept_lo

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(0, 1.1))
    def test_idempotent(self, seed, n, threshold):
        rng = np.random.default_rng(seed)
        part = random_partition(rng, n)
        once = preclude(branch_decompose(StateVector(random_unit(rng, n)), part), threshold, renormalize=False)
        if once.state is None:
            return
        twice = preclude(branch_decompose(once.state, part), threshold, renormalize=False)
        np.testing.assert_allclose(twice.state.amps, once.state.amps, atol=1e-12)
        assert twice.report.kept_labels == once.report.kept_labels
