"""Steady states of the modulated machine.

All retained sub-bath channels push the populations toward a common
Boltzmann ratio at the effective inverse temperature beta_eff, fixed by
the coupling-weighted balance of absorption against emission:

    exp(-beta_eff*omega0) = sum_iq P(q) G_i(-w_q) / sum_iq P(q) G_i(+w_q).

For misaligned dipoles (any cross overlap below 1) the steady state is
unique, diagonal, and independent of the initial condition.  For fully
aligned dipoles the dark subspace decouples: its block of the initial
state is frozen, and only the ground/bright pair thermalizes at beta_eff.

Two independent routes are provided: closed forms (analytic_steady_state)
and linear-algebraic/relaxational solutions of the full generator
(numeric_steady_state), plus explicit time propagation.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .floquet import modulation_weights
from .generator import (
    BATH_IDS,
    _bath,
    build_total_generator,
    unvectorize,
    vectorize,
)
from .bath import coupling_spectrum
from .model import (
    AlignmentError,
    ConvergenceError,
    DensityMatrix,
    MachineConfig,
    _canonical_basis,
    resolve_initial_state,
)


def _sideband_rate_sums(cfg: MachineConfig, level_freq: float) -> tuple[float, float]:
    """(sum_iq P(q) G_i(+w), sum_iq P(q) G_i(-w)) at sidebands of `level_freq`."""
    table = modulation_weights(cfg.modulation)
    down = up = 0.0
    for q, weight in table.retained():
        w_q = level_freq + q * cfg.modulation.Omega
        if w_q <= 0.0:
            raise ValueError(f"sideband {level_freq} + q*Omega = {w_q} nonpositive for q={q}")
        for bath_id in BATH_IDS:
            bath = _bath(cfg, bath_id)
            down += weight * coupling_spectrum(bath, w_q)
            up += weight * coupling_spectrum(bath, -w_q)
    return down, up


def boltzmann_factor(cfg: MachineConfig) -> float:
    """x = exp(-beta_eff * omega0), computed directly from the rate sums."""
    down, up = _sideband_rate_sums(cfg, cfg.system.omega0)
    if down <= 0.0:
        raise ValueError("no bath couples to any retained sideband")
    return up / down


def effective_inverse_temperature(cfg: MachineConfig) -> float:
    """beta_eff of the machine, from the weighted emission/absorption balance.

    When every contributing sideband satisfies
    beta_h*omega0 <= beta_i*w_q <= beta_c*omega0 (in particular for the
    separated-band arrangement in its engine window), beta_eff is sandwiched
    between the bath values, beta_h <= beta_eff <= beta_c.  Modulation can
    push it outside that window - a bath coupled only above its own thermal
    scale cools the machine below T_c, which is how the refrigerator regime
    works - so the bound is a property of the spectra, not of this function.
    """
    return -math.log(boltzmann_factor(cfg)) / cfg.system.omega0


def per_level_boltzmann(cfg: MachineConfig) -> np.ndarray:
    """Steady population ratio rho_jj / rho_00 per excited level (misaligned).

    Every level balances its own emission against absorption summed over
    baths and harmonics; with detuned levels the ratios differ, in the
    degenerate case they all collapse to exp(-beta_eff*omega0).
    """
    ratios = []
    for j in range(1, cfg.system.n_levels):
        down, up = _sideband_rate_sums(cfg, cfg.system.level_frequency(j))
        if down <= 0.0:
            raise ValueError(f"no bath couples to level {j} at any retained sideband")
        ratios.append(up / down)
    return np.array(ratios)


def analytic_steady_state(
    cfg: MachineConfig, rho0: DensityMatrix | None = None
) -> DensityMatrix:
    """Closed-form steady state.

    Misaligned gram (every cross overlap below 1): diagonal state with
    rho_jj = r_j * rho_00, r_j the per-level Boltzmann ratio; independent
    of the initial state.  Fully aligned gram: the dark block of rho0 is
    conserved, the rest thermalizes on the ground/bright pair,

        rho_ss = Pi_d rho0 Pi_d + (1 - <Pi_d>) (|0><0| + x |b><b|) / (1 + x).

    A gram mixing aligned and misaligned pairs has no closed form here.
    """
    sys_ = cfg.system
    n = sys_.n_levels
    if n == 2 or sys_.gram.regime(cfg.numerics.aligned_tol) == "misaligned":
        r = per_level_boltzmann(cfg)
        rho00 = 1.0 / (1.0 + float(np.sum(r)))
        rho = np.zeros((n, n), dtype=complex)
        rho[0, 0] = rho00
        for j in range(1, n):
            rho[j, j] = r[j - 1] * rho00
        return DensityMatrix(rho)

    regime = sys_.gram.regime(cfg.numerics.aligned_tol)
    if regime == "mixed":
        raise AlignmentError(
            "no closed-form steady state for a gram mixing aligned and misaligned pairs"
        )
    if not sys_.is_degenerate():
        raise AlignmentError(
            "closed-form aligned steady state requires degenerate excited levels"
        )
    if rho0 is None:
        rho0 = resolve_initial_state(cfg)
    x = boltzmann_factor(cfg)
    basis = _canonical_basis(n)
    proj_d = basis.dark_projector
    dark_block = proj_d @ rho0.entries @ proj_d
    weight = 1.0 - float(np.real(np.trace(dark_block)))
    ground = np.outer(basis.ground, basis.ground.conj())
    bright = np.outer(basis.bright, basis.bright.conj())
    rho = dark_block + weight * (ground + x * bright) / (1.0 + x)
    return DensityMatrix(rho)


def numeric_steady_state(
    cfg: MachineConfig, rho0: DensityMatrix | None = None
) -> DensityMatrix:
    """Steady state from the assembled generator, with no use of closed forms.

    A one-dimensional kernel (relative singular-value threshold from the
    numerics spec) is solved directly as the null vector, normalized to
    unit trace.  A degenerate kernel - the aligned machine - instead
    relaxes rho0 under exp(L t) with doubling horizons until the residual
    ||L rho||_1 drops below the configured tolerance, which lands on the
    member of the steady family selected by the conserved dark block.
    """
    n = cfg.system.n_levels
    if rho0 is None:
        rho0 = resolve_initial_state(cfg)
    L = build_total_generator(cfg)
    s = np.linalg.svd(L, compute_uv=False)
    if s[0] == 0.0:
        return rho0  # no coupling at all: everything is stationary
    kernel_dim = int(np.sum(s / s[0] < cfg.numerics.kernel_threshold))
    if kernel_dim <= 1:
        _, _, vh = np.linalg.svd(L)
        v = vh[-1].conj()
        rho = unvectorize(v, n)
        rho = 0.5 * (rho + rho.conj().T)
        tr = np.trace(rho).real
        if abs(tr) < 1e-12:
            raise ConvergenceError("steady-state kernel vector is traceless")
        return DensityMatrix(rho / tr)
    return _relax_to_kernel(cfg, L, rho0)


def _relax_to_kernel(cfg: MachineConfig, L: np.ndarray, rho0: DensityMatrix) -> DensityMatrix:
    n = cfg.system.n_levels
    s = np.linalg.svd(L, compute_uv=False)
    gap = float(s[s / s[0] >= cfg.numerics.kernel_threshold].min())
    tol = cfg.numerics.residual_tol
    t_max = cfg.numerics.t_max_factor / gap
    v = vectorize(rho0.entries)

    def residual(vec: np.ndarray) -> float:
        return float(np.linalg.norm(unvectorize(L @ vec, n), "nuc"))

    if residual(v) < tol:
        return rho0
    t_step = 1.0 / s[0]
    stepper = expm(L * t_step)
    t = 0.0
    for _ in range(200):
        v = stepper @ v
        t += t_step
        if residual(v) < tol:
            break
        stepper = stepper @ stepper
        t_step *= 2.0
        if t > t_max:
            raise ConvergenceError(
                f"relaxation residual {residual(v):.3e} above {tol:.1e} at t = {t:.3e}"
            )
    else:
        raise ConvergenceError("relaxation did not converge")
    rho = unvectorize(v, n)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def propagate(
    cfg: MachineConfig,
    rho0: DensityMatrix | None = None,
    t_final: float = 10.0,
    dt_report: float = 0.1,
) -> tuple[np.ndarray, list[DensityMatrix]]:
    """Integrate rhodot = L rho and report the state on a regular time grid.

    Uses an adaptive explicit Runge-Kutta scheme (DOP853, eighth order
    with embedded error control) at the tolerances from the numerics spec.
    Reported states are trace-renormalized only when the drift stays below
    the configured bound; larger drift raises, it means the tolerances and
    the problem scale are mismatched.
    """
    if t_final <= 0.0 or dt_report <= 0.0:
        raise ValueError("t_final and dt_report must be positive")
    n = cfg.system.n_levels
    if rho0 is None:
        rho0 = resolve_initial_state(cfg)
    L = build_total_generator(cfg)
    times = np.arange(0.0, t_final + 0.5 * dt_report, dt_report)
    times[-1] = min(times[-1], t_final)

    sol = solve_ivp(
        lambda _t, v: L @ v,
        (0.0, float(times[-1])),
        vectorize(rho0.entries),
        method="DOP853",
        t_eval=times,
        rtol=cfg.numerics.rtol,
        atol=cfg.numerics.atol,
    )
    if not sol.success:
        raise ConvergenceError(f"propagation failed: {sol.message}")
    states = []
    for k in range(sol.y.shape[1]):
        rho = unvectorize(sol.y[:, k], n)
        drift = abs(np.trace(rho).real - 1.0)
        if drift > cfg.numerics.trace_drift_tol:
            raise ConvergenceError(
                f"trace drift {drift:.3e} at t = {sol.t[k]:.6g} exceeds tolerance"
            )
        states.append(DensityMatrix(rho / np.trace(rho).real))
    return sol.t.copy(), states
