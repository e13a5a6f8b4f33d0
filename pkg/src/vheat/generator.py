"""Dissipative generators of the modulated V-system.

Working in the interaction picture, each bath i and harmonic q contributes
an independent, time-independent Lindblad piece

    L_iq rho = P(q) G_i(w_q)/2  * sum_j [ D(s-_j, s+_j)
                                          + sum_{j'!=j} p_jj' D(s-_j, s+_j') ]
             + P(q) G_i(-w_q)/2 * sum_j [ D(s+_j, s-_j)
                                          + sum_{j'!=j} p_jj' D(s+_j, s-_j') ]

with w_q = omega0 + q*Omega the sideband frequency, s+_j = |j><0|,
s-_j = |0><j|, and the two-operator dissipator

    D(a, b) rho = 2 a rho b - b a rho - rho b a.

The diagonal j = j' terms are ordinary emission/absorption on each arm;
the cross terms, weighted by the dipole overlaps p_jj', interfere the
arms and are what makes the aligned machine (p = 1) keep a dark state.

Superoperators act on column-stacked density matrices:
vec(rho) = rho.reshape(-1, order='F'), so vec(A rho B) = kron(B.T, A) vec(rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bath import coupling_spectrum
from .floquet import modulation_weights
from .model import MachineConfig, WEIGHT_EPS, _readonly

BATH_IDS = ("cold", "hot")


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvectorize(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((n, n), order="F")


def dissipator_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of rho -> 2 a rho b - b a rho - rho b a on column-stacked rho."""
    n = a.shape[0]
    ident = np.eye(n)
    ba = b @ a
    return 2.0 * np.kron(b.T, a) - np.kron(ident, ba) - np.kron(ba.T, ident)


def lowering_operators(n: int) -> list[np.ndarray]:
    """s-_j = |0><j| for each excited level j = 1..n-1."""
    ops = []
    for j in range(1, n):
        s = np.zeros((n, n))
        s[0, j] = 1.0
        ops.append(s)
    return ops


@dataclass(frozen=True, eq=False)
class SubbathGenerator:
    """One (bath, harmonic) Lindblad piece, as a dense superoperator."""

    bath_id: str
    q: int
    sideband: float       # omega0 + q*Omega
    weight: float         # P(q)
    matrix: np.ndarray    # (n^2, n^2), column-stacking convention

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(self.matrix))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        n = int(round(math.sqrt(self.matrix.shape[0])))
        return unvectorize(self.matrix @ vectorize(rho), n)


def _bath(cfg: MachineConfig, bath_id: str):
    if bath_id == "cold":
        return cfg.bath_cold
    if bath_id == "hot":
        return cfg.bath_hot
    raise ValueError(f"unknown bath id {bath_id!r}, expected one of {BATH_IDS}")


def build_subbath_generator(cfg: MachineConfig, bath_id: str, q: int) -> SubbathGenerator:
    """Assemble L_iq for bath `bath_id` and harmonic `q`.

    With detuned excited levels the same-arm rates are evaluated at the
    per-level sidebands omega_j + q*Omega; a cross term between arms j and
    j' then uses the geometric mean of the two arms' rates (it reduces to
    the common rate in the degenerate case).  All per-level sidebands must
    be positive.
    """
    sys_ = cfg.system
    n = sys_.n_levels
    bath = _bath(cfg, bath_id)
    table = modulation_weights(cfg.modulation)
    weight = table.probability(q)
    sideband = sys_.omega0 + q * cfg.modulation.Omega

    lower = lowering_operators(n)
    raise_ = [s.T.copy() for s in lower]
    gram = sys_.gram.matrix

    emit = np.zeros(n - 1)    # P(q) G_i(+w_jq) / 2 per arm
    absorb = np.zeros(n - 1)  # P(q) G_i(-w_jq) / 2 per arm
    if weight > 0.0:
        for j in range(1, n):
            w_jq = sys_.level_frequency(j) + q * cfg.modulation.Omega
            if w_jq <= 0.0:
                raise ValueError(
                    f"sideband omega_{j} + q*Omega = {w_jq} nonpositive for q={q}"
                )
            emit[j - 1] = 0.5 * weight * coupling_spectrum(bath, w_jq)
            absorb[j - 1] = 0.5 * weight * coupling_spectrum(bath, -w_jq)

    mat = np.zeros((n * n, n * n), dtype=complex)
    for j in range(n - 1):
        for jp in range(n - 1):
            p = 1.0 if j == jp else gram[j, jp]
            if p == 0.0:
                continue
            ce = p * math.sqrt(emit[j] * emit[jp])
            ca = p * math.sqrt(absorb[j] * absorb[jp])
            if ce > 0.0:
                mat += ce * dissipator_matrix(lower[j], raise_[jp])
            if ca > 0.0:
                mat += ca * dissipator_matrix(raise_[j], lower[jp])
    return SubbathGenerator(bath_id=bath_id, q=q, sideband=sideband, weight=weight, matrix=mat)


def subbath_generators(cfg: MachineConfig) -> list[SubbathGenerator]:
    """All retained (bath, harmonic) pieces.

    A piece is retained when its harmonic carries weight (P(q) > 1e-14)
    and the bath actually couples at the sideband
    (G_i(w_q) + G_i(-w_q) > 0); everything else contributes a zero
    superoperator and is dropped.
    """
    sys_ = cfg.system
    table = modulation_weights(cfg.modulation)
    out = []
    for q, weight in table.retained():
        for bath_id in BATH_IDS:
            bath = _bath(cfg, bath_id)
            keep = False
            for j in range(1, sys_.n_levels):
                w_jq = sys_.level_frequency(j) + q * cfg.modulation.Omega
                if w_jq <= 0.0:
                    raise ValueError(
                        f"sideband omega_{j} + q*Omega = {w_jq} nonpositive for q={q}"
                    )
                if coupling_spectrum(bath, w_jq) + coupling_spectrum(bath, -w_jq) > 0.0:
                    keep = True
            if keep:
                out.append(build_subbath_generator(cfg, bath_id, q))
    return out


def build_total_generator(cfg: MachineConfig) -> np.ndarray:
    """Sum of all retained sub-bath generators (dense (n^2, n^2) matrix)."""
    n = cfg.system.n_levels
    total = np.zeros((n * n, n * n), dtype=complex)
    for gen in subbath_generators(cfg):
        total = total + gen.matrix
    return total


# ---------------------------------------------------------------------------
# reduced 4-variable dynamics of the degenerate three-level machine
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReducedOde:
    """Closed linear system xdot = A x + b for x = (rho21, rho12, rho00, rho22).

    Valid for the degenerate (delta = 0) three-level machine with a uniform
    dipole overlap p.  rho11 has been eliminated through the unit trace,
    and the ground-state coherences rho10, rho20 decouple and decay.
    """

    A: np.ndarray            # 4x4 real
    b: np.ndarray            # length-4 real
    prefactor: float         # (1/2) sum_iq P(q) G_i(w_q)
    boltzmann: float         # x = exp(-beta_eff * omega0)
    p: float                 # uniform dipole overlap

    def __post_init__(self):
        object.__setattr__(self, "A", _readonly(self.A))
        object.__setattr__(self, "b", _readonly(self.b))


def _rate_sums(cfg: MachineConfig) -> tuple[float, float]:
    """(sum_iq P(q) G_i(+w_q), sum_iq P(q) G_i(-w_q)) over retained harmonics."""
    table = modulation_weights(cfg.modulation)
    down = up = 0.0
    for q, weight in table.retained():
        w_q = cfg.system.omega0 + q * cfg.modulation.Omega
        if w_q <= 0.0:
            raise ValueError(f"sideband omega0 + q*Omega = {w_q} nonpositive for q={q}")
        for bath_id in BATH_IDS:
            bath = _bath(cfg, bath_id)
            down += weight * coupling_spectrum(bath, w_q)
            up += weight * coupling_spectrum(bath, -w_q)
    return down, up


def reduced_ode_system(cfg: MachineConfig) -> ReducedOde:
    """Reduced ODE of the degenerate three-level machine.

    The coefficient matrix, in units of the prefactor
    k = (1/2) sum_iq P(q) G_i(w_q) and with x = exp(-beta_eff*omega0), is

        [ -2   0   p(1+2x)    0 ]        [ -p ]
        [  0  -2   p(1+2x)    0 ]   b = k[ -p ]
        [ 2p  2p  -2(1+2x)    0 ]        [  2 ]
        [ -p  -p    2x       -2 ]        [  0 ]

    which is the full generator restricted to (rho21, rho12, rho00, rho22)
    after eliminating rho11 = 1 - rho00 - rho22.
    """
    sys_ = cfg.system
    if sys_.n_levels != 3:
        raise ValueError(f"reduced ODE defined for 3 levels, got {sys_.n_levels}")
    if not sys_.is_degenerate():
        raise ValueError("reduced ODE defined for degenerate excited levels (delta = 0)")
    p = float(sys_.gram.matrix[0, 1])
    down, up = _rate_sums(cfg)
    if down <= 0.0:
        raise ValueError("no bath couples to any retained sideband")
    x = up / down
    k = 0.5 * down
    A = k * np.array(
        [
            [-2.0, 0.0, p * (1.0 + 2.0 * x), 0.0],
            [0.0, -2.0, p * (1.0 + 2.0 * x), 0.0],
            [2.0 * p, 2.0 * p, -2.0 * (1.0 + 2.0 * x), 0.0],
            [-p, -p, 2.0 * x, -2.0],
        ]
    )
    b = k * np.array([-p, -p, 2.0, 0.0])
    return ReducedOde(A=A, b=b, prefactor=k, boltzmann=x, p=p)


def coefficient_determinant(cfg: MachineConfig) -> float:
    """det(A) of the reduced system; vanishes exactly at full alignment.

    Analytically det(A) = prefactor^4 * 16 * (1 + 2x) * (1 - p^2), so the
    coefficient matrix is singular iff p = 1 (the dark state turns the
    steady state into a family selected by the initial condition).
    """
    return float(np.linalg.det(reduced_ode_system(cfg).A))
