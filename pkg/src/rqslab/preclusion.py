"""Branch decomposition and minimum-norm preclusion.

A partition is an ordered list of labelled orthogonal projectors resolving
the identity. Decomposing a state yields one branch per projector; precluding
drops every branch whose norm is strictly below the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidPartition
from .hilbert import HermitianOperator, StateVector

PARTITION_TOL = 1e-10
BRANCH_NORM_TOL = 1e-12
RENORMALIZE_FLOOR = 1e-14


@dataclass(frozen=True)
class Branch:
    label: str
    component: StateVector
    norm: float

    def __post_init__(self):
        if abs(self.norm - self.component.norm()) > BRANCH_NORM_TOL:
            raise ValueError(f"branch {self.label!r}: norm {self.norm!r} != ||component||")


@dataclass(frozen=True)
class PartitionSpec:
    projectors: tuple[tuple[str, HermitianOperator], ...]

    def __post_init__(self):
        object.__setattr__(self, "projectors", tuple((str(k), p) for k, p in self.projectors))
        validate_partition(self)

    @property
    def dim(self) -> int:
        return self.projectors[0][1].dim

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.projectors]

    @classmethod
    def from_rays(cls, labelled_vectors, rest_label: str | None = "rest") -> PartitionSpec:
        """Rank-one projectors onto orthonormal vectors, plus the complement if non-empty."""
        items = []
        total = None
        for label, vec in labelled_vectors:
            v = np.asarray(vec.amps if isinstance(vec, StateVector) else vec, dtype=complex)
            p = np.outer(v, v.conj())
            items.append((label, HermitianOperator(p)))
            total = p if total is None else total + p
        if total is None:
            raise InvalidPartition("at least one ray is required")
        rest = np.eye(total.shape[0]) - total
        if rest_label is not None and np.linalg.norm(rest) > PARTITION_TOL:
            items.append((rest_label, HermitianOperator(0.5 * (rest + rest.conj().T))))
        return cls(tuple(items))


@dataclass(frozen=True)
class PreclusionReport:
    kept_labels: tuple[str, ...]
    removed_labels: tuple[str, ...]
    survived_norm: float
    all_precluded: bool


@dataclass(frozen=True)
class PreclusionResult:
    """Output of :func:`preclude`. ``state`` is None when every branch was removed."""

    state: StateVector | None
    report: PreclusionReport


def validate_partition(partition: PartitionSpec, tol: float = PARTITION_TOL) -> None:
    if not partition.projectors:
        raise InvalidPartition("partition is empty")
    labels = [label for label, _ in partition.projectors]
    if len(set(labels)) != len(labels):
        raise InvalidPartition(f"duplicate labels in {labels}")
    dims = {p.dim for _, p in partition.projectors}
    if len(dims) != 1:
        raise InvalidPartition(f"projectors have differing dims {sorted(dims)}")
    mats = [p.matrix for _, p in partition.projectors]
    for label, m in zip(labels, mats):
        if np.linalg.norm(m @ m - m) > tol:
            raise InvalidPartition(f"projector {label!r} is not idempotent")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if np.linalg.norm(mats[i] @ mats[j]) > tol:
                raise InvalidPartition(f"projectors {labels[i]!r} and {labels[j]!r} overlap")
    if np.linalg.norm(sum(mats) - np.eye(mats[0].shape[0])) > tol:
        raise InvalidPartition("projectors do not sum to the identity")


def branch_decompose(state: StateVector, partition: PartitionSpec) -> list[Branch]:
    if state.dim != partition.dim:
        raise DimensionMismatch(f"state dim {state.dim} vs partition dim {partition.dim}")
    branches = []
    for label, proj in partition.projectors:
        comp = StateVector(proj.apply(state), is_physical=False)
        branches.append(Branch(label, comp, comp.norm()))
    return branches


def preclude(branches: list[Branch], norm_min: float, renormalize: bool = True) -> PreclusionResult:
    """Remove branches with norm below ``norm_min`` and reassemble the rest.

    A branch whose norm equals the threshold survives. If nothing survives the
    result has ``state=None`` and ``report.all_precluded=True``.
    """
    if not norm_min >= 0:
        raise ValueError(f"norm_min must be >= 0, got {norm_min!r}")
    if not branches:
        raise ValueError("no branches given")
    kept = [b for b in branches if b.norm >= norm_min]
    removed = tuple(b.label for b in branches if b.norm < norm_min)
    if not kept:
        report = PreclusionReport((), removed, 0.0, True)
        return PreclusionResult(None, report)

    amps = np.sum([b.component.amps for b in kept], axis=0)
    survived = float(np.linalg.norm(amps))
    report = PreclusionReport(tuple(b.label for b in kept), removed, survived, False)
    if renormalize and survived > RENORMALIZE_FLOOR:
        return PreclusionResult(StateVector(amps / survived), report)
    return PreclusionResult(StateVector(amps, is_physical=False), report)
