"""Closed-form example systems and seeded random ensembles.

Two analytic models serve as oracles for the numerical pipeline:

* a two-level system prepared in a superposition of energy eigenstates;
* an ideal "detector": a two-state system S coupled to a two-state observer
  O through H = |S2><S2| (x) i*kappa(|O2><O1| - |O1><O2|), basis order
  |S1 O1>, |S1 O2>, |S2 O1>, |S2 O2>.

Random systems are index-addressable: sample ``i`` of an ensemble depends
only on ``(seed, i)`` through numpy's PCG64 bit generator fed by a
``SeedSequence(seed, spawn_key=(i,))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import EvolutionContext
from .errors import InvalidParameter, NonPositiveKappa
from .hilbert import (
    HermitianOperator,
    StateVector,
    normalize,
    tensor_product_operator,
    tensor_product_state,
)

COEFF_TOL = 1e-12


def _check_coefficients(c1: complex, c2: complex) -> None:
    total = abs(c1) ** 2 + abs(c2) ** 2
    if abs(total - 1.0) > COEFF_TOL:
        raise InvalidParameter(f"|c1|^2 + |c2|^2 = {total!r}, expected 1")


@dataclass(frozen=True)
class TwoStateModel:
    c1: complex
    c2: complex
    e1: float
    e2: float

    def __post_init__(self):
        _check_coefficients(self.c1, self.c2)

    @classmethod
    def normalized(cls, c1: complex, c2: complex, e1: float, e2: float) -> TwoStateModel:
        """Build from coefficients that are only approximately normalized."""
        norm = math.hypot(abs(c1), abs(c2))
        if norm == 0:
            raise InvalidParameter("c1 and c2 cannot both vanish")
        return cls(complex(c1) / norm, complex(c2) / norm, e1, e2)


@dataclass(frozen=True)
class DetectorModel:
    c1: complex
    c2: complex
    kappa: float

    def __post_init__(self):
        _check_coefficients(self.c1, self.c2)
        if not math.isfinite(self.kappa):
            raise InvalidParameter(f"kappa must be finite, got {self.kappa!r}")

    @classmethod
    def from_c2(cls, c2: complex, kappa: float) -> DetectorModel:
        """Detector with real non-negative c1 fixed by normalization."""
        if abs(c2) > 1:
            raise InvalidParameter(f"|c2| = {abs(c2)!r} exceeds 1")
        return cls(math.sqrt(1.0 - abs(c2) ** 2), complex(c2), kappa)


@dataclass(frozen=True)
class EnsembleSpec:
    dim: int
    seed: int
    count: int
    energy_scale: float = 1.0

    def __post_init__(self):
        if not 2 <= self.dim <= 16:
            raise InvalidParameter(f"dim must lie in [2, 16], got {self.dim!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.count < 1:
            raise InvalidParameter(f"count must be positive, got {self.count!r}")
        if not self.energy_scale > 0:
            raise InvalidParameter(f"energy_scale must be positive, got {self.energy_scale!r}")


# -- two-state model ---------------------------------------------------------


def two_state_context(m: TwoStateModel, hbar: float = 1.0) -> EvolutionContext:
    return EvolutionContext(
        HermitianOperator.diagonal([m.e1, m.e2]),
        StateVector([m.c1, m.c2]),
        hbar,
    )


def two_state_exact_state(m: TwoStateModel, hbar: float, t: float) -> StateVector:
    # each amplitude keeps its own coefficient; c2 rides on the E2 phase
    return StateVector([m.c1 * np.exp(-1j * m.e1 * t / hbar), m.c2 * np.exp(-1j * m.e2 * t / hbar)])


def two_state_exact_norm(m: TwoStateModel, hbar: float, dt: float) -> float:
    p1, p2 = abs(m.c1) ** 2, abs(m.c2) ** 2
    # 1 - cos(x) = 2 sin^2(x/2) keeps precision at small dt
    radicand = 4.0 * p1 * math.sin(m.e1 * dt / (2 * hbar)) ** 2 + 4.0 * p2 * math.sin(m.e2 * dt / (2 * hbar)) ** 2
    return math.sqrt(radicand)


def two_state_norm_limit(m: TwoStateModel, hbar: float, dt_min: float) -> float:
    p1, p2 = abs(m.c1) ** 2, abs(m.c2) ** 2
    # p1 E1^2 + p2 E2^2 - (p1 E1 + p2 E2)^2 == p1 p2 (E1 - E2)^2 when p1 + p2 = 1
    return math.sqrt(p1 * p2) * abs(m.e1 - m.e2) * dt_min / hbar


def two_state_characteristic_time(m: TwoStateModel, hbar: float = 1.0) -> float:
    emax = max(abs(m.e1), abs(m.e2))
    return math.inf if emax == 0 else 2 * math.pi * hbar / emax


# -- detector model ----------------------------------------------------------


def system_projector_s2() -> HermitianOperator:
    return HermitianOperator.diagonal([0.0, 1.0])


def observer_coupling(kappa: float) -> HermitianOperator:
    """i*kappa(|O2><O1| - |O1><O2|) in the (O1, O2) basis."""
    return HermitianOperator(np.array([[0.0, -1j * kappa], [1j * kappa, 0.0]]))


def detector_hamiltonian(kappa: float) -> HermitianOperator:
    return tensor_product_operator(system_projector_s2(), observer_coupling(kappa))


def detector_initial_state(m: DetectorModel) -> StateVector:
    return tensor_product_state(StateVector([m.c1, m.c2]), StateVector.basis(2, 0))


def detector_context(m: DetectorModel, hbar: float = 1.0) -> EvolutionContext:
    return EvolutionContext(detector_hamiltonian(m.kappa), detector_initial_state(m), hbar)


def detector_exact_state(m: DetectorModel, hbar: float, t: float) -> StateVector:
    """c1|S1 O1> + c2 cos(kt/hbar)|S2 O1> + c2 sin(kt/hbar)|S2 O2>."""
    x = m.kappa * t / hbar
    return StateVector([m.c1, 0.0, m.c2 * math.cos(x), m.c2 * math.sin(x)])


def detector_exact_norm(m: DetectorModel, hbar: float, t: float) -> float:
    # |c2| (2 - 2 cos x)^(1/2) == 2 |c2| |sin(x/2)|, without the cancellation
    return 2.0 * abs(m.c2) * abs(math.sin(m.kappa * t / (2 * hbar)))


def detector_norm_limit(m: DetectorModel, hbar: float, dt_min: float) -> float:
    # Delta H = |c2| |kappa|; identical to |c2| kappa dt/hbar for kappa > 0
    return abs(m.c2) * abs(m.kappa) * dt_min / hbar


def detector_characteristic_time(m: DetectorModel, hbar: float = 1.0) -> float:
    return math.inf if m.kappa == 0 else 2 * math.pi * hbar / abs(m.kappa)


def measurement_time(m: DetectorModel, hbar: float = 1.0) -> float:
    """Time pi*hbar/(2 kappa) at which system and observer are fully correlated."""
    if not m.kappa > 0:
        raise NonPositiveKappa(f"kappa must be positive for a measurement time, got {m.kappa!r}")
    return math.pi * hbar / (2 * m.kappa)


# -- random ensembles --------------------------------------------------------


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> HermitianOperator:
    """scale * (A + A^dagger) / 2 with A_ij standard complex Gaussian."""
    a = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    return HermitianOperator(0.5 * (a + a.conj().T) * scale)


def random_state(rng: np.random.Generator, dim: int) -> StateVector:
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_system(spec: EnsembleSpec, index: int, hbar: float = 1.0) -> EvolutionContext:
    rng = sample_rng(spec.seed, index)
    h = random_hermitian(rng, spec.dim, spec.energy_scale)
    psi = random_state(rng, spec.dim)
    return EvolutionContext(h, psi, hbar)


def ensemble(spec: EnsembleSpec, hbar: float = 1.0):
    for i in range(spec.count):
        yield random_system(spec, i, hbar)
