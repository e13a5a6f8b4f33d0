"""Domain types for the modulated V-type multilevel heat machine.

The machine is an N-level system with a ground state |0> and N-1 excited
levels |1>, ..., |N-1> at frequencies omega0 + delta_j, all coupled to two
thermal baths through transitions that share the ground state (a V
configuration).  A periodic modulation of the level splitting spreads the
bath coupling over sidebands omega0 + q*Omega with harmonic weights P(q).

Units: hbar = k_B = 1.  All value types are frozen dataclasses; ndarray
fields are made read-only at construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Union

import numpy as np

from .bath import BathSpec

# tolerances for state and gram invariants
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
# off-diagonal gram entries within this of 1 count as fully aligned
ALIGNED_TOL = 1e-8
# harmonic weights at or below this are treated as absent
WEIGHT_EPS = 1e-14


class VheatError(Exception):
    """Base class for all package errors."""


class ConfigError(VheatError, ValueError):
    """Malformed or invalid machine configuration."""


class AlignmentError(VheatError, ValueError):
    """Operation requested for a dipole arrangement it does not apply to."""


class ConvergenceError(VheatError, RuntimeError):
    """A numerical routine failed to reach its tolerance."""


class ConsistencyError(VheatError, RuntimeError):
    """Two supposedly equivalent internal routes disagreed beyond tolerance."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DipoleGram:
    """Gram matrix of normalized dipole orientations of the excited levels.

    Entry (j, j') is the overlap p_jj' between the unit dipole vectors of
    transitions |0><j| and |0><j'|; 1 on the diagonal, symmetric, entries
    in [0, 1], positive semidefinite.  p = 1 everywhere means all dipoles
    parallel (interference fully constructive, a dark state exists);
    smaller values suppress the cross-damping terms.
    """

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _readonly(np.asarray(self.matrix, dtype=float)))

    @classmethod
    def uniform(cls, n_excited: int, p: float) -> "DipoleGram":
        m = np.full((n_excited, n_excited), float(p))
        np.fill_diagonal(m, 1.0)
        return cls(m)

    @classmethod
    def aligned(cls, n_excited: int) -> "DipoleGram":
        return cls.uniform(n_excited, 1.0)

    @property
    def n_excited(self) -> int:
        return self.matrix.shape[0]

    def violations(self) -> list[str]:
        m = self.matrix
        out = []
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            return [f"gram matrix must be square, got shape {m.shape}"]
        if not np.allclose(np.diag(m), 1.0, rtol=0.0, atol=1e-12):
            out.append("gram diagonal must be 1")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            out.append("gram matrix must be symmetric")
        if m.min() < 0.0 or m.max() > 1.0 + 1e-12:
            out.append("gram entries must lie in [0, 1]")
        if m.shape[0] > 0:
            w = np.linalg.eigvalsh(0.5 * (m + m.T))
            if w.min() < EIGENVALUE_FLOOR:
                out.append(f"gram matrix must be positive semidefinite, min eigenvalue {w.min():.3e}")
        return out

    def is_aligned(self, tol: float = ALIGNED_TOL) -> bool:
        """True when every cross overlap is within tol of 1 (vacuously true for N = 2)."""
        off = self._offdiag()
        return bool(off.size == 0 or off.min() >= 1.0 - tol)

    def regime(self, tol: float = ALIGNED_TOL) -> str:
        """'aligned', 'misaligned', or 'mixed' depending on the cross overlaps."""
        off = self._offdiag()
        if off.size == 0 or off.min() >= 1.0 - tol:
            return "aligned"
        if off.max() < 1.0 - tol:
            return "misaligned"
        return "mixed"

    def _offdiag(self) -> np.ndarray:
        n = self.matrix.shape[0]
        mask = ~np.eye(n, dtype=bool)
        return self.matrix[mask]


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """The bare V-system: level count, transition frequency, detunings, dipole gram."""

    n_levels: int
    omega0: float
    detunings: tuple[float, ...] = ()
    gram: DipoleGram | None = None

    def __post_init__(self):
        if not self.detunings:
            object.__setattr__(self, "detunings", (0.0,) * (self.n_levels - 1))
        else:
            object.__setattr__(self, "detunings", tuple(float(d) for d in self.detunings))
        if self.gram is None:
            object.__setattr__(self, "gram", DipoleGram.aligned(self.n_levels - 1))

    @property
    def n_excited(self) -> int:
        return self.n_levels - 1

    def level_frequency(self, j: int) -> float:
        """Frequency of excited level j (1-based), omega0 + delta_j."""
        return self.omega0 + self.detunings[j - 1]

    def is_degenerate(self) -> bool:
        return all(d == 0.0 for d in self.detunings)

    def violations(self) -> list[str]:
        out = []
        if self.n_levels < 2:
            out.append(f"need at least 2 levels, got {self.n_levels}")
            return out
        if self.omega0 <= 0:
            out.append(f"omega0 must be > 0, got {self.omega0}")
        if len(self.detunings) != self.n_excited:
            out.append(
                f"expected {self.n_excited} detunings, got {len(self.detunings)}"
            )
        else:
            for j, d in enumerate(self.detunings, start=1):
                if self.omega0 + d <= 0:
                    out.append(f"level {j} frequency omega0 + delta nonpositive ({self.omega0 + d})")
        if self.gram.n_excited != self.n_excited:
            out.append(
                f"gram size {self.gram.n_excited} does not match {self.n_excited} excited levels"
            )
        else:
            out.extend(self.gram.violations())
        return out


@dataclass(frozen=True)
class SinusoidalModulation:
    """Sinusoidal frequency modulation; harmonic weights are squared Bessel functions."""

    lam: float
    Omega: float
    q_max: int = 20


@dataclass(frozen=True)
class CustomModulation:
    """Explicit table of harmonic weights P(q), renormalized to unit sum."""

    weights: Mapping[int, float]
    Omega: float
    q_max: int = 20

    def __post_init__(self):
        object.__setattr__(
            self, "weights", {int(q): float(w) for q, w in dict(self.weights).items()}
        )


ModulationSpec = Union[SinusoidalModulation, CustomModulation]


def _modulation_violations(mod: ModulationSpec) -> list[str]:
    out = []
    if mod.Omega <= 0:
        out.append(f"modulation Omega must be > 0, got {mod.Omega}")
    if mod.q_max < 0:
        out.append(f"modulation q_max must be >= 0, got {mod.q_max}")
    if isinstance(mod, SinusoidalModulation):
        if mod.lam < 0:
            out.append(f"modulation depth lambda must be >= 0, got {mod.lam}")
        if mod.lam > 20:
            out.append(f"modulation depth lambda above supported range (20), got {mod.lam}")
        if mod.q_max > 50:
            out.append(f"modulation q_max above supported Bessel order (50), got {mod.q_max}")
    else:
        if not mod.weights:
            out.append("custom modulation needs at least one weight")
        for q, w in mod.weights.items():
            if w < 0:
                out.append(f"custom weight P({q}) must be >= 0, got {w}")
        if mod.weights and all(w <= 0 for w in mod.weights.values()):
            out.append("custom weights sum to zero")
    return out


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """An N x N density matrix.  Construction normalizes dtype, not content;
    use violations() / require_valid() to check the state invariants."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "entries", _readonly(np.asarray(self.entries, dtype=complex))
        )

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def population(self, k: int) -> float:
        return float(self.entries[k, k].real)

    def violations(self) -> list[str]:
        rho = self.entries
        out = []
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            return [f"density matrix must be square, got shape {rho.shape}"]
        herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
        if herm > HERMITICITY_TOL:
            out.append(f"density matrix not Hermitian, max |rho - rho^dag| = {herm:.3e}")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            out.append(f"density matrix trace must be 1, got {tr}")
        if not out:
            w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
            if w.min() < EIGENVALUE_FLOOR:
                out.append(f"density matrix has negative eigenvalue {w.min():.3e}")
        return out

    def require_valid(self) -> "DensityMatrix":
        bad = self.violations()
        if bad:
            raise ConfigError("; ".join(bad))
        return self


@dataclass(frozen=True)
class NumericsSpec:
    """Tolerances shared by the steady-state and propagation routines."""

    rtol: float = 1e-10
    atol: float = 1e-12
    kernel_threshold: float = 1e-10  # relative singular-value cut for kernel detection
    aligned_tol: float = ALIGNED_TOL
    residual_tol: float = 1e-12      # trace-norm target for the relaxation route
    trace_drift_tol: float = 1e-9
    t_max_factor: float = 1e3        # propagation horizon in units of the slowest decay


@dataclass(frozen=True, eq=False)
class MachineConfig:
    """Everything needed to run the machine: system, two baths, modulation,
    initial state (preset name or explicit matrix), and numerics knobs."""

    system: SystemSpec
    bath_cold: BathSpec
    bath_hot: BathSpec
    modulation: ModulationSpec
    initial_state: str | DensityMatrix = "ground"
    numerics: NumericsSpec = field(default_factory=NumericsSpec)

    def with_updates(self, **kwargs) -> "MachineConfig":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# bright/dark structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BrightDarkBasis:
    """Orthonormal ground/bright/dark vectors of the excited manifold."""

    ground: np.ndarray
    bright: np.ndarray
    darks: tuple[np.ndarray, ...]

    @property
    def dark_projector(self) -> np.ndarray:
        n = self.ground.shape[0]
        proj = np.zeros((n, n), dtype=complex)
        for d in self.darks:
            proj += np.outer(d, d.conj())
        return proj


def _canonical_basis(n_levels: int) -> BrightDarkBasis:
    """Ground |0>, bright = uniform excited superposition, darks = Helmert
    complement (d_k proportional to |1> + ... + |k> - k|k+1>)."""
    n = n_levels
    ground = np.zeros(n, dtype=complex)
    ground[0] = 1.0
    bright = np.zeros(n, dtype=complex)
    bright[1:] = 1.0 / math.sqrt(n - 1)
    darks = []
    for k in range(1, n - 1):
        d = np.zeros(n, dtype=complex)
        d[1 : k + 1] = 1.0
        d[k + 1] = -k
        darks.append(d / math.sqrt(k * (k + 1)))
    return BrightDarkBasis(_readonly(ground), _readonly(bright), tuple(_readonly(d) for d in darks))


def bright_dark_basis(spec: SystemSpec, tol: float = ALIGNED_TOL) -> BrightDarkBasis:
    """Bright/dark decomposition of the excited manifold.

    Only meaningful when all dipoles are parallel: the bright state is the
    uniform superposition (the one combination the collective jump operator
    connects to the ground state) and the N-2 dark states span its
    orthogonal complement.  For N = 3 the single dark state is
    (|1> - |2>)/sqrt(2).  Rejects a gram that is not fully aligned.
    """
    if not spec.gram.is_aligned(tol):
        raise AlignmentError(
            "bright/dark basis requires a fully aligned dipole gram (all cross overlaps 1)"
        )
    return _canonical_basis(spec.n_levels)


def dark_projection(rho: DensityMatrix, spec: SystemSpec, tol: float = ALIGNED_TOL) -> float:
    """Total population Tr(Pi_d rho) of the dark subspace (0 for N = 2)."""
    basis = bright_dark_basis(spec, tol)
    return _dark_population(rho.entries, spec.n_levels)


def _dark_population(entries: np.ndarray, n_levels: int) -> float:
    basis = _canonical_basis(n_levels)
    val = 0.0
    for d in basis.darks:
        val += float(np.real(d.conj() @ entries @ d))
    return val


# ---------------------------------------------------------------------------
# initial-state presets
# ---------------------------------------------------------------------------

_PRESET_WITH_ARG = re.compile(r"^(thermal|nondark-max):(.+)$")


def initial_state(spec: SystemSpec, name: str | DensityMatrix) -> DensityMatrix:
    """Resolve a named initial-state preset (or pass through an explicit matrix).

    Presets:
      ground          pure ground state |0><0|
      bright          pure bright state (uniform excited superposition)
      dark            maximally mixed state on the dark subspace (N >= 3)
      thermal:b       Gibbs state of the bare Hamiltonian at inverse temperature b
      nondark-max:r   zero dark overlap with ground population r: the mixture
                      r|0><0| + (1-r)|psi_b><psi_b|.  For N = 3 this gives
                      rho_11 = rho_22 = rho_21 = (1-r)/2 exactly.
    """
    if isinstance(name, DensityMatrix):
        return name
    n = spec.n_levels
    if name == "ground":
        rho = np.zeros((n, n), dtype=complex)
        rho[0, 0] = 1.0
        return DensityMatrix(rho)
    if name == "bright":
        rho = np.zeros((n, n), dtype=complex)
        rho[1:, 1:] = 1.0 / (n - 1)
        return DensityMatrix(rho)
    if name == "dark":
        if n < 3:
            raise ConfigError("preset 'dark' needs at least 3 levels")
        basis = _canonical_basis(n)
        rho = basis.dark_projector / (n - 2)
        return DensityMatrix(rho)
    m = _PRESET_WITH_ARG.match(name)
    if m:
        kind = m.group(1)
        try:
            arg = float(m.group(2))
        except ValueError as exc:
            raise ConfigError(f"preset {name!r}: argument must be a number") from exc
        if kind == "thermal":
            if arg < 0:
                raise ConfigError(f"thermal preset needs beta >= 0, got {arg}")
            energies = np.array([0.0] + [spec.level_frequency(j) for j in range(1, n)])
            w = np.exp(-arg * (energies - energies.min()))
            rho = np.diag(w / w.sum()).astype(complex)
            return DensityMatrix(rho)
        if kind == "nondark-max":
            r = arg
            if not 0.0 <= r <= 1.0:
                raise ConfigError(f"nondark-max preset needs rho00 in [0, 1], got {r}")
            rho = np.zeros((n, n), dtype=complex)
            rho[0, 0] = r
            rho[1:, 1:] = (1.0 - r) / (n - 1)
            return DensityMatrix(rho)
    raise ConfigError(f"unknown initial-state preset {name!r}")


def resolve_initial_state(cfg: MachineConfig) -> DensityMatrix:
    return initial_state(cfg.system, cfg.initial_state)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate_config(cfg: MachineConfig) -> list[str]:
    """Collect every violated invariant of `cfg` as a human-readable message.

    Returns an empty list for a valid configuration; never raises for
    content problems (only for structurally unusable input elsewhere).
    """
    out: list[str] = []
    out.extend(cfg.system.violations())
    for label, bath in (("cold", cfg.bath_cold), ("hot", cfg.bath_hot)):
        out.extend(f"bath_{label}: {msg}" for msg in bath.violations())
    if cfg.bath_cold.temperature > cfg.bath_hot.temperature:
        out.append(
            "cold bath hotter than hot bath "
            f"(T_c = {cfg.bath_cold.temperature}, T_h = {cfg.bath_hot.temperature})"
        )
    out.extend(_modulation_violations(cfg.modulation))

    # sideband positivity for every retained harmonic
    if not _modulation_violations(cfg.modulation):
        from .floquet import modulation_weights  # deferred: floquet depends on model

        table = modulation_weights(cfg.modulation)
        for q in sorted(table.entries, key=abs):
            if table.entries[q] > WEIGHT_EPS and cfg.system.omega0 + q * cfg.modulation.Omega <= 0:
                out.append(f"sideband omega0+q*Omega nonpositive for q={q}")

    try:
        rho0 = resolve_initial_state(cfg)
    except ConfigError as exc:
        out.append(str(exc))
    else:
        if rho0.n != cfg.system.n_levels:
            out.append(
                f"initial state is {rho0.n}x{rho0.n} but the system has {cfg.system.n_levels} levels"
            )
        else:
            out.extend(f"initial state: {msg}" for msg in rho0.violations())
    return out


# ---------------------------------------------------------------------------
# a ready-made machine
# ---------------------------------------------------------------------------

def two_band_machine(
    omega0: float = 1.0,
    Omega: float = 0.5,
    T_cold: float = 0.1,
    T_hot: float = 1.0,
    n_levels: int = 3,
    alignment: float = 1.0,
    gamma_cold: float = 1.0,
    gamma_hot: float = 1.0,
    lam: float | None = None,
    weights: Mapping[int, float] | None = None,
    initial_state: str | DensityMatrix = "ground",
    detunings: tuple[float, ...] = (),
) -> MachineConfig:
    """Machine with spectrally separated flat bands: the cold bath addresses
    the q = 0 harmonic, the hot bath the q = +1 harmonic.

    Modulation is sinusoidal with depth `lam` when given (truncated at
    |q| <= 1, so keep Omega < omega0), otherwise an explicit two-harmonic
    weight table (default P(0) = P(1) = 1/2).
    """
    from .bath import separated_band_baths

    cold, hot = separated_band_baths(omega0, Omega, T_cold, T_hot, gamma_cold, gamma_hot)
    if lam is not None:
        mod: ModulationSpec = SinusoidalModulation(lam=lam, Omega=Omega, q_max=1)
    else:
        mod = CustomModulation(weights=dict(weights or {0: 0.5, 1: 0.5}), Omega=Omega, q_max=2)
    system = SystemSpec(
        n_levels=n_levels,
        omega0=omega0,
        detunings=detunings,
        gram=DipoleGram.uniform(n_levels - 1, alignment),
    )
    return MachineConfig(
        system=system,
        bath_cold=cold,
        bath_hot=hot,
        modulation=mod,
        initial_state=initial_state,
    )
