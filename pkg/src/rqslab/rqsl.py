"""Reference section, its length, the reverse speed limit and the norm bound.

The reference section is psi(t) rotated by the phase of its overlap with
psi(0), so that <chi(t)|psi(0)> is real and non-negative. Its length over
[0, T] bounds the evolution time from above: T <= hbar * length / Delta H.
Over a single short step the same bound turns into a lower limit on how
little a state can change, ||psi(dt) - psi(0)|| >= dt * Delta H / hbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    EvolutionContext,
    characteristic_time,
    delta_psi,
    energy_variance,
    overlap_diagnostics,
    propagate,
    second_moment_root,
)
from .errors import InvalidParameter, OrthogonalOverlap, ZeroVariance
from .hilbert import StateVector
from .quadrature import adaptive_simpson

OVERLAP_FLOOR = 1e-10
TOL_REPORT = 1e-6
REGIME_FRACTION = 1e-2
STRICT_REGIME_FRACTION = 1e-3
PROBE_POINTS = 65
ZERO_VARIANCE = 1e-14
HSU_SLACK = 1e-12


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-8
    max_depth: int = 40
    fd_step_fraction: float = 1e-6

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise InvalidParameter(f"abs_tol must be positive, got {self.abs_tol!r}")
        if not 0 < self.fd_step_fraction < 1e-2:
            raise InvalidParameter(f"fd_step_fraction must lie in (0, 1e-2), got {self.fd_step_fraction!r}")
        if self.max_depth < 1:
            raise InvalidParameter(f"max_depth must be >= 1, got {self.max_depth!r}")


@dataclass(frozen=True)
class BoundReport:
    T: float
    length: float
    delta_h: float
    rqsl_upper_bound: float
    satisfied: bool
    margin: float
    error_estimate: float = 0.0


@dataclass(frozen=True)
class NormLimitReport:
    dt_min: float
    delta_h: float
    norm_lim: float
    exact_norm: float
    hsu_estimate: float
    satisfied: bool
    regime_ok: bool


def _phase_aligned(coeffs: np.ndarray, ctx: EvolutionContext, t, floor: float) -> np.ndarray:
    # <psi(t)|psi(0)> computed in the eigenbasis; coeffs has times along axis 0
    overlap = coeffs.conj() @ ctx.eigen_coeffs
    mag = np.abs(overlap)
    if np.any(mag <= floor):
        bad = t[np.argmax(mag <= floor)]
        raise OrthogonalOverlap(f"|<psi(t)|psi(0)>| <= {floor:g} at t = {bad!r}")
    return (overlap / mag)[:, None] * coeffs


def _coeffs_at_times(ctx: EvolutionContext, times: np.ndarray) -> np.ndarray:
    return np.exp(-1j * np.outer(times, ctx.energies) / ctx.hbar) * ctx.eigen_coeffs


def _overlap_modulus(ctx: EvolutionContext, times: np.ndarray) -> np.ndarray:
    return np.abs(np.exp(1j * np.outer(times, ctx.energies) / ctx.hbar) @ ctx.populations)


def certify_overlap(ctx: EvolutionContext, T: float, floor: float = OVERLAP_FLOOR, max_splits: int = 60) -> None:
    """Prove that |<psi(t)|psi(0)>| stays above ``floor`` on [0, T].

    The overlap modulus is Lipschitz with constant L = (E_max - E_min) / (2 hbar),
    so on [a, b] it is at least (m_a + m_b - L (b - a)) / 2. Intervals of the
    probe grid where that lower bound is not above ``floor`` are bisected.

    Raises:
        OrthogonalOverlap: if an interval cannot be certified, i.e. the overlap
            gets within roughly ``floor`` of zero.
    """
    energies = ctx.energies
    lip = 0.5 * float(energies[-1] - energies[0]) / ctx.hbar
    grid = np.linspace(0.0, T, PROBE_POINTS)
    mods = _overlap_modulus(ctx, grid)
    if np.any(mods <= floor):
        bad = grid[np.argmax(mods <= floor)]
        raise OrthogonalOverlap(f"|<psi(t)|psi(0)>| <= {floor:g} at t = {bad!r}")
    stack = [(grid[i], grid[i + 1], mods[i], mods[i + 1], 0) for i in range(len(grid) - 1)]
    while stack:
        a, b, ma, mb, depth = stack.pop()
        if 0.5 * (ma + mb - lip * (b - a)) > floor:
            continue
        mid = 0.5 * (a + b)
        mm = float(_overlap_modulus(ctx, np.array([mid]))[0])
        if mm <= floor or depth >= max_splits or lip * (b - a) <= floor:
            raise OrthogonalOverlap(
                f"overlap with psi(0) drops to ~{min(ma, mb, mm):.3e} near t = {mid!r}; "
                "the reference section is undefined there"
            )
        stack.append((a, mid, ma, mm, depth + 1))
        stack.append((mid, b, mm, mb, depth + 1))


def reference_section(ctx: EvolutionContext, t: float, overlap_floor: float = OVERLAP_FLOOR) -> StateVector:
    """Return chi(t) = (<psi(t)|psi(0)> / |<psi(t)|psi(0)>|) psi(t).

    Raises:
        OrthogonalOverlap: if the overlap modulus is at or below ``overlap_floor``.
    """
    psi_t = propagate(ctx, t)
    overlap = complex(np.vdot(psi_t.amps, ctx.psi0.amps))
    if abs(overlap) <= overlap_floor:
        raise OrthogonalOverlap(f"|<psi(t)|psi(0)>| = {abs(overlap):.3e} at t = {t!r}")
    return StateVector(overlap / abs(overlap) * psi_t.amps)


def _fd_step(ctx: EvolutionContext, T: float, q: QuadratureConfig) -> float:
    t_char = characteristic_time(ctx)
    base = t_char if math.isfinite(t_char) else T
    return q.fd_step_fraction * base


def reference_speed(
    ctx: EvolutionContext, t: float, step: float, overlap_floor: float = OVERLAP_FLOOR
) -> float:
    """||d chi / dt|| at ``t`` by central differences with one Richardson step.

    Norms are taken in the energy eigenbasis, which is unitarily equivalent.
    """
    times = np.array([t - step, t + step, t - 0.5 * step, t + 0.5 * step])
    chi = _phase_aligned(_coeffs_at_times(ctx, times), ctx, times, overlap_floor)
    coarse = (chi[1] - chi[0]) / (2.0 * step)
    fine = (chi[3] - chi[2]) / step
    return float(np.linalg.norm((4.0 * fine - coarse) / 3.0))


def reference_section_length_with_error(
    ctx: EvolutionContext,
    T: float,
    q: QuadratureConfig | None = None,
    overlap_floor: float = OVERLAP_FLOOR,
) -> tuple[float, float]:
    """Length of chi over [0, T] and the quadrature error estimate."""
    q = q or QuadratureConfig()
    if T < 0 or not math.isfinite(T):
        raise InvalidParameter(f"T must be finite and non-negative, got {T!r}")
    if T == 0:
        return 0.0, 0.0
    certify_overlap(ctx, T, overlap_floor)
    step = _fd_step(ctx, T, q)
    return adaptive_simpson(
        lambda t: reference_speed(ctx, t, step, overlap_floor),
        0.0,
        T,
        abs_tol=q.abs_tol,
        max_depth=q.max_depth,
    )


def reference_section_length(
    ctx: EvolutionContext,
    T: float,
    q: QuadratureConfig | None = None,
    overlap_floor: float = OVERLAP_FLOOR,
) -> float:
    """Integral over [0, T] of ||d chi / dt||.

    Raises:
        OrthogonalOverlap: if the overlap with psi(0) vanishes on [0, T].
        DepthExceeded: if the quadrature cannot reach ``q.abs_tol``.
    """
    return reference_section_length_with_error(ctx, T, q, overlap_floor)[0]


def discrete_length(ctx: EvolutionContext, dt: float) -> float:
    """Single-step length (<psi(dt)|psi(dt)> - 2|<psi(dt)|psi(0)>| + 1)^(1/2)."""
    psi_dt = propagate(ctx, dt).amps
    radicand = float(np.vdot(psi_dt, psi_dt).real) - 2.0 * abs(np.vdot(psi_dt, ctx.psi0.amps)) + 1.0
    return math.sqrt(max(radicand, 0.0))


def rqsl_check(
    ctx: EvolutionContext,
    T: float,
    q: QuadratureConfig | None = None,
    tol_report: float = TOL_REPORT,
) -> BoundReport:
    """Evaluate T <= hbar * length / Delta H for one system and horizon.

    Raises:
        ZeroVariance: for stationary states, where the bound is vacuous.
    """
    dh = energy_variance(ctx)
    if dh <= ZERO_VARIANCE:
        raise ZeroVariance(f"Delta H = {dh:.3e}; the speed-limit bound is vacuous")
    length, err = reference_section_length_with_error(ctx, T, q)
    bound = ctx.hbar * length / dh
    margin = bound - T
    return BoundReport(
        T=T,
        length=length,
        delta_h=dh,
        rqsl_upper_bound=bound,
        satisfied=margin >= -tol_report,
        margin=margin,
        error_estimate=err,
    )


def norm_limit(delta_h: float, dt_min: float, hbar: float) -> float:
    """Minimum norm of the change over one step, dt_min * Delta H / hbar."""
    return dt_min * delta_h / hbar


def verify_norm_inequality(
    ctx: EvolutionContext,
    dt_min: float,
    regime_fraction: float = REGIME_FRACTION,
    tol_report: float = TOL_REPORT,
) -> NormLimitReport:
    if not dt_min > 0:
        raise InvalidParameter(f"dt_min must be positive, got {dt_min!r}")
    dh = energy_variance(ctx)
    lim = norm_limit(dh, dt_min, ctx.hbar)
    exact = delta_psi(ctx, dt_min).norm()
    return NormLimitReport(
        dt_min=dt_min,
        delta_h=dh,
        norm_lim=lim,
        exact_norm=exact,
        hsu_estimate=dt_min * second_moment_root(ctx) / ctx.hbar,
        satisfied=exact >= lim - tol_report,
        regime_ok=dt_min <= regime_fraction * characteristic_time(ctx),
    )


@dataclass(frozen=True)
class SystemVerdict:
    """Outcome of the full inequality suite on one system."""

    delta_h: float
    t_char: float
    rqsl_margins: tuple[float, ...]
    rqsl_ok: bool
    gap: float
    gap_ok: bool
    norm_exact: float
    norm_lim: float
    norm_ok: bool
    hsu_estimate: float
    hsu_ok: bool
    identity_residual: float
    identity_ok: bool
    status: str

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def verify_system(
    ctx: EvolutionContext,
    t_fractions=(0.05, 0.1, 0.3, 0.5),
    dt_fraction: float = STRICT_REGIME_FRACTION,
    q: QuadratureConfig | None = None,
    rqsl_slack: float = TOL_REPORT,
    norm_slack: float = 1e-12,
    gap_slack: float = 1e-12,
    identity_tol: float = 1e-10,
) -> SystemVerdict:
    """Run the speed-limit, gap, norm, Hsu-ordering and length-identity checks.

    ``status`` is ``"pass"``, ``"fail"``, ``"vacuous"`` (zero energy spread)
    or ``"undefined"`` (overlap with psi(0) vanishes inside a horizon).
    """
    t_char = characteristic_time(ctx)
    dh = energy_variance(ctx)
    if dh <= ZERO_VARIANCE or not math.isfinite(t_char):
        return SystemVerdict(dh, t_char, (), True, 0.0, True, 0.0, 0.0, True, 0.0, True, 0.0, True, "vacuous")

    status = "pass"
    margins = []
    for frac in t_fractions:
        T = frac * t_char
        try:
            rep = rqsl_check(ctx, T, q, tol_report=rqsl_slack)
        except OrthogonalOverlap:
            status = "undefined"
            margins.append(math.nan)
            continue
        margins.append(rep.margin)
    rqsl_ok = all(m >= -rqsl_slack for m in margins if not math.isnan(m))

    dt = dt_fraction * t_char
    diag = overlap_diagnostics(ctx, dt)
    gap_ok = diag.gap >= -gap_slack

    nrep = verify_norm_inequality(ctx, dt)
    norm_ok = nrep.exact_norm >= nrep.norm_lim - norm_slack
    hsu_ok = nrep.norm_lim <= nrep.hsu_estimate + HSU_SLACK

    dl = discrete_length(ctx, dt)
    residual = dl * dl - (nrep.exact_norm**2 + 2.0 * (diag.re_z - diag.abs_z))
    identity_ok = abs(residual) <= identity_tol

    if not (rqsl_ok and gap_ok and norm_ok and hsu_ok and identity_ok):
        status = "fail"
    return SystemVerdict(
        delta_h=dh,
        t_char=t_char,
        rqsl_margins=tuple(margins),
        rqsl_ok=rqsl_ok,
        gap=diag.gap,
        gap_ok=gap_ok,
        norm_exact=nrep.exact_norm,
        norm_lim=nrep.norm_lim,
        norm_ok=norm_ok,
        hsu_estimate=nrep.hsu_estimate,
        hsu_ok=hsu_ok,
        identity_residual=residual,
        identity_ok=identity_ok,
        status=status,
    )
