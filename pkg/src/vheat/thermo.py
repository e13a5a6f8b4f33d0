"""Heat currents, output power, and enhancement ratios.

Each retained sub-bath channel (i, q) exchanges quanta of the sideband
energy w_q = omega0 + q*Omega with its bath.  Its heat current at the
working state rho is defined against the channel's own reference Gibbs
state rho_iq (the thermal state of H_q = w_q * sum_j |j><j| at beta_i):

    J_iq = -(1/beta_i) Tr[(L_iq rho) ln rho_iq]

which, because every L_iq annihilates the trace, equals the energy flux
Tr[(L_iq rho) H_q]; both routes are evaluated and must agree.  The sum of
all channel currents balances the power the modulation drive absorbs,

    W_dot = -(J_cold + J_hot),

so W_dot < 0 together with J_hot > 0 is the engine regime (work is
extracted at efficiency eta = -W_dot/J_hot <= 1 - T_c/T_h), and
J_cold > 0 with W_dot > 0 is the refrigerator.  Entropy production
sigma = -beta_c J_cold - beta_h J_hot is nonnegative in steady state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .generator import build_subbath_generator, subbath_generators, unvectorize, vectorize
from .model import (
    AlignmentError,
    ConsistencyError,
    DensityMatrix,
    MachineConfig,
    _canonical_basis,
    _dark_population,
    resolve_initial_state,
)
from .steady import boltzmann_factor, numeric_steady_state

MODE_ENGINE = "engine"
MODE_REFRIGERATOR = "refrigerator"
MODE_DISSIPATOR = "dissipator"

_ROUTE_TOL = 1e-10
_CARNOT_SLACK = 1e-9


def sideband_hamiltonian(n: int, sideband: float) -> np.ndarray:
    """H_q = w_q * sum_{j>=1} |j><j| with the ground state at zero energy."""
    h = np.full(n, sideband)
    h[0] = 0.0
    return np.diag(h)


def _bath_beta(cfg: MachineConfig, bath_id: str) -> float:
    bath = cfg.bath_cold if bath_id == "cold" else cfg.bath_hot
    return 1.0 / bath.temperature


def subbath_heat_current(
    cfg: MachineConfig, bath_id: str, q: int, rho_ss: DensityMatrix
) -> float:
    """Heat current of one (bath, harmonic) channel at the state rho_ss.

    Evaluates both the entropy-flux form -(1/beta) Tr[(L rho) ln rho_iq]
    and the energy-flux form Tr[(L rho) H_q] and insists they agree; a
    mismatch means the channel generator stopped annihilating the trace,
    i.e. a generator bug, and raises rather than returning either value.
    """
    gen = build_subbath_generator(cfg, bath_id, q)
    n = cfg.system.n_levels
    ldot = unvectorize(gen.matrix @ vectorize(rho_ss.entries), n)
    h_q = sideband_hamiltonian(n, gen.sideband)
    energy_route = float(np.real(np.trace(ldot @ h_q)))

    beta = _bath_beta(cfg, bath_id)
    log_z = logsumexp(-beta * np.diag(h_q))
    ln_rho_ref = -beta * h_q - log_z * np.eye(n)
    entropy_route = float(np.real(np.trace(ldot @ ln_rho_ref))) * (-1.0 / beta)

    if abs(entropy_route - energy_route) > _ROUTE_TOL * max(1.0, abs(energy_route)):
        raise ConsistencyError(
            f"heat-current routes disagree for ({bath_id}, q={q}): "
            f"{entropy_route!r} vs {energy_route!r}"
        )
    return energy_route


@dataclass(frozen=True, eq=False)
class ThermoReport:
    """Steady-state energetics of one machine configuration."""

    steady_state: DensityMatrix
    subbath_currents: dict[tuple[str, int], float]
    J_cold: float
    J_hot: float
    W_dot: float
    efficiency: float | None
    entropy_production: float
    mode: str


def thermo_report(cfg: MachineConfig, rho0: DensityMatrix | None = None) -> ThermoReport:
    """Solve for the steady state and do the bookkeeping of the first and
    second laws.  The first law W_dot = -(J_cold + J_hot) holds by
    construction; the Carnot bound is asserted in engine mode."""
    if rho0 is None:
        rho0 = resolve_initial_state(cfg)
    rho_ss = numeric_steady_state(cfg, rho0)
    currents: dict[tuple[str, int], float] = {}
    for gen in subbath_generators(cfg):
        currents[(gen.bath_id, gen.q)] = subbath_heat_current(cfg, gen.bath_id, gen.q, rho_ss)
    j_cold = sum(v for (b, _q), v in currents.items() if b == "cold")
    j_hot = sum(v for (b, _q), v in currents.items() if b == "hot")
    w_dot = -(j_cold + j_hot) + 0.0  # +0.0 folds -0.0 into 0.0
    eta = (-w_dot / j_hot) if j_hot > 0.0 else None
    if w_dot < 0.0 and j_hot > 0.0:
        mode = MODE_ENGINE
    elif j_cold > 0.0 and w_dot > 0.0:
        mode = MODE_REFRIGERATOR
    else:
        mode = MODE_DISSIPATOR
    t_c = cfg.bath_cold.temperature
    t_h = cfg.bath_hot.temperature
    sigma = -j_cold / t_c - j_hot / t_h
    if mode == MODE_ENGINE:
        carnot = 1.0 - t_c / t_h
        if eta > carnot + _CARNOT_SLACK:
            raise ConsistencyError(
                f"engine efficiency {eta} exceeds the Carnot bound {carnot}"
            )
    return ThermoReport(
        steady_state=rho_ss,
        subbath_currents=currents,
        J_cold=j_cold,
        J_hot=j_hot,
        W_dot=w_dot,
        efficiency=eta,
        entropy_production=sigma,
        mode=mode,
    )


def tls_reference_power(cfg: MachineConfig) -> float:
    """Closed-form output power of the two-level machine with the same
    baths and modulation:

        W_dot = sum_iq w_q P(q) G_i(w_q) (x - exp(-beta_i w_q)) / (x + 1)

    with x = exp(-beta_eff*omega0).  Serves as the reference the multilevel
    enhancement ratios are measured against.
    """
    from .floquet import modulation_weights
    from .bath import coupling_spectrum

    x = boltzmann_factor(cfg)
    table = modulation_weights(cfg.modulation)
    total = 0.0
    for q, weight in table.retained():
        w_q = cfg.system.omega0 + q * cfg.modulation.Omega
        if w_q <= 0.0:
            raise ValueError(f"sideband omega0 + q*Omega = {w_q} nonpositive for q={q}")
        for bath_id, bath in (("cold", cfg.bath_cold), ("hot", cfg.bath_hot)):
            g = coupling_spectrum(bath, w_q)
            if g <= 0.0:
                continue
            total += w_q * weight * g * (x - math.exp(-w_q / bath.temperature))
    return total / (x + 1.0)


def misaligned_power_ratio(x: float, n_levels: int = 3) -> float:
    """Power of the misaligned N-level machine over the two-level one,
    (N-1)(1+x) / (1+(N-1)x) with x = exp(-beta_eff*omega0); equals
    2(1+x)/(1+2x) for the three-level machine.  Between 1 and N-1, always
    above 1: misalignment never hurts."""
    m = n_levels - 1
    return m * (1.0 + x) / (1.0 + m * x)


@dataclass(frozen=True)
class EnhancementRatios:
    """Closed-form power enhancements over the two-level reference.

    misaligned_ratio       (N-1)(1+x)/(1+(N-1)x): 2(1+x)/(1+2x) for N = 3
    aligned_ratio          three-level aligned, 2*(rho_bb(0) + rho_00(0))
    aligned_vs_misaligned  ground-population ratio of the two regimes,
                           (1 - <Pi_d>)(1+(N-1)x)/(1+x)
    threshold_dark_overlap initial dark population below which alignment
                           wins, 1/(2 + exp(beta_eff*omega0))
    nlevel_ratio           N-level aligned, (N-1)*(1 - <Pi_d>)
    """

    misaligned_ratio: float
    threshold_dark_overlap: float
    aligned_ratio: float | None = None
    aligned_vs_misaligned: float | None = None
    nlevel_ratio: float | None = None


def enhancement_ratios(
    cfg: MachineConfig, rho0: DensityMatrix | None = None
) -> EnhancementRatios:
    """Evaluate the closed-form enhancement ratios at this machine's beta_eff.

    The misaligned ratio and the dark-overlap threshold depend only on the
    effective temperature and are always reported.  The aligned ratios
    need an initial state and are only meaningful for a fully aligned
    gram; passing rho0 with a misaligned or mixed gram raises.
    """
    x = boltzmann_factor(cfg)
    n = cfg.system.n_levels
    misaligned = misaligned_power_ratio(x, n)
    threshold = x / (1.0 + 2.0 * x)  # = 1 / (2 + exp(beta_eff*omega0))
    if rho0 is None:
        return EnhancementRatios(misaligned_ratio=misaligned, threshold_dark_overlap=threshold)
    if not cfg.system.gram.is_aligned(cfg.numerics.aligned_tol):
        raise AlignmentError("aligned enhancement ratios need a fully aligned gram")
    dark0 = _dark_population(rho0.entries, n)
    basis = _canonical_basis(n)
    bright0 = float(np.real(basis.bright.conj() @ rho0.entries @ basis.bright))
    ground0 = float(np.real(rho0.entries[0, 0]))
    aligned = 2.0 * (bright0 + ground0)
    aligned_vs_mis = (1.0 - dark0) * (1.0 + (n - 1) * x) / (1.0 + x)
    nlevel = (n - 1) * (1.0 - dark0)
    return EnhancementRatios(
        misaligned_ratio=misaligned,
        threshold_dark_overlap=threshold,
        aligned_ratio=aligned,
        aligned_vs_misaligned=aligned_vs_mis,
        nlevel_ratio=nlevel,
    )
