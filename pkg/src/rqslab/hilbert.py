"""Dense complex linear algebra for small Hilbert spaces.

States and operators are thin immutable wrappers around numpy arrays. The
eigensolver is a cyclic complex Jacobi method, which is plenty for the
dimensions used here (up to a few dozen) and converges unconditionally for
Hermitian input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, NonFinite, NotHermitian, ZeroVector

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
ZERO_NORM = 1e-14
JACOBI_MAX_SWEEPS = 100
JACOBI_OFFDIAG_TOL = 1e-14


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude vector.

    ``is_physical`` marks unit-norm states. Difference vectors such as
    psi(dt) - psi(0) carry ``is_physical=False`` and are exempt from the
    norm check.
    """

    amps: np.ndarray
    is_physical: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise DimensionMismatch(f"state must be a non-empty 1-d array, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise NonFinite("state amplitudes must be finite")
        object.__setattr__(self, "amps", _frozen(amps))
        if self.is_physical and abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"physical state has norm {self.norm()!r}; use normalize()")

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __getitem__(self, i):
        return self.amps[i]

    def __len__(self):
        return self.dim

    @classmethod
    def basis(cls, dim: int, index: int) -> StateVector:
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix, checked on construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionMismatch(f"operator must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NonFinite("operator entries must be finite")
        skew = float(np.max(np.abs(m - m.conj().T)))
        if skew > HERMITIAN_TOL:
            raise NotHermitian(f"max |H - H^dagger| = {skew:.3e} exceeds {HERMITIAN_TOL:.0e}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def apply(self, v: StateVector) -> np.ndarray:
        if v.dim != self.dim:
            raise DimensionMismatch(f"operator dim {self.dim} vs state dim {v.dim}")
        return self.matrix @ v.amps

    @classmethod
    def identity(cls, dim: int) -> HermitianOperator:
        return cls(np.eye(dim))

    @classmethod
    def diagonal(cls, values) -> HermitianOperator:
        return cls(np.diag(np.asarray(values, dtype=float)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = field(default=0)

    def __post_init__(self):
        vals = np.array(self.eigenvalues, dtype=float, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def inner_product(a: StateVector, b: StateVector) -> complex:
    """Return <a|b>, conjugating the first argument."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def normalize(v: StateVector | np.ndarray) -> StateVector:
    amps = v.amps if isinstance(v, StateVector) else np.asarray(v, dtype=complex)
    n = float(np.linalg.norm(amps))
    if not n > ZERO_NORM:
        raise ZeroVector(f"cannot normalize vector of norm {n!r}")
    return StateVector(amps / n)


def tensor_product_state(a: StateVector, b: StateVector) -> StateVector:
    # np.kron is row-major with the first factor varying slowest
    amps = np.kron(a.amps, b.amps)
    return StateVector(amps, is_physical=a.is_physical and b.is_physical)


def tensor_product_operator(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    return HermitianOperator(np.kron(a.matrix, b.matrix))


def _offdiag_norm(a: np.ndarray) -> float:
    # direct sum; total-minus-diagonal cancels catastrophically near convergence
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def eigendecompose(
    h: HermitianOperator,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
    offdiag_tol: float = JACOBI_OFFDIAG_TOL,
) -> SpectralDecomposition:
    """Diagonalize a Hermitian operator with cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` so the
    2x2 block becomes real symmetric, then applies the classical real
    rotation that annihilates it. Sweeps continue until the off-diagonal
    Frobenius norm drops below ``offdiag_tol * ||H||_F``.

    Raises:
        NotHermitian: if ``h`` is not an operator that passed validation.
        ConvergenceFailure: if ``max_sweeps`` sweeps do not suffice.
    """
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(h)
    n = h.dim
    a = np.array(h.matrix, dtype=complex)
    v = np.eye(n, dtype=complex)
    scale = h.frobenius()
    threshold = offdiag_tol * scale

    sweeps = 0
    if scale > 0.0:
        while _offdiag_norm(a) > threshold:
            if sweeps >= max_sweeps:
                raise ConvergenceFailure(
                    f"Jacobi did not converge in {max_sweeps} sweeps "
                    f"(off-diagonal norm {_offdiag_norm(a):.3e}, target {threshold:.3e})"
                )
            sweeps += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    b = a[p, q]
                    mag = abs(b)
                    # tiny pivots: rotating would only churn roundoff
                    if mag <= 1e-300 or mag < 1e-18 * scale:
                        a[p, q] = a[q, p] = 0.0
                        continue
                    phase = b / mag
                    app, aqq = a[p, p].real, a[q, q].real
                    theta = (aqq - app) / (2.0 * mag)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                    c = 1.0 / math.hypot(t, 1.0)
                    s = t * c
                    g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                    idx = [p, q]
                    a[:, idx] = a[:, idx] @ g
                    a[idx, :] = g.conj().T @ a[idx, :]
                    v[:, idx] = v[:, idx] @ g
                    a[p, q] = a[q, p] = 0.0
                    a[p, p] = app - t * mag
                    a[q, q] = aqq + t * mag

    vals = np.real(np.diag(a))
    order = np.argsort(vals, kind="stable")
    return SpectralDecomposition(vals[order], v[:, order], sweeps=sweeps)
