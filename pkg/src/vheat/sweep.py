"""Parameter sweeps, power maximization, and figure datasets.

Every sweep row is one full steady-state solution plus its energetics,
written in a fixed column order so downstream tooling (including the plot
renderer, which never recomputes physics) can rely on the schema:

    <axis value(s)>, rho00, rho_bb, rho_dd, abs_rho21,
    J_cold, J_hot, W_dot, eta, entropy_production, mode

Grid points are independent, so they are evaluated concurrently (worker
count bounded by the VHEAT_THREADS environment variable) and merged back
in input order; reruns of the same invocation are byte-identical.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .model import (
    ConfigError,
    CustomModulation,
    DensityMatrix,
    DipoleGram,
    MachineConfig,
    SinusoidalModulation,
    SystemSpec,
    VheatError,
    _canonical_basis,
    _dark_population,
    initial_state,
    resolve_initial_state,
    two_band_machine,
    validate_config,
)
from .steady import boltzmann_factor
from .thermo import MODE_ENGINE, ThermoReport, thermo_report

REPORT_COLUMNS = (
    "rho00",
    "rho_bb",
    "rho_dd",
    "abs_rho21",
    "J_cold",
    "J_hot",
    "W_dot",
    "eta",
    "entropy_production",
    "mode",
)

SWEEP_AXES = ("Omega", "lambda", "T_h", "T_c", "p", "beta_eff-target", "dark_overlap")

_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)  # inverse golden ratio


def worker_count() -> int:
    """Worker bound for sweep evaluation, from VHEAT_THREADS when set."""
    raw = os.environ.get("VHEAT_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ConfigError(f"VHEAT_THREADS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ConfigError(f"VHEAT_THREADS must be >= 1, got {n}")
        return n
    return min(8, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# rows and tables
# ---------------------------------------------------------------------------

def state_coordinates(rho: DensityMatrix) -> dict[str, float]:
    """Ground/bright/dark populations and |rho21| of a state (nan where undefined)."""
    n = rho.n
    basis = _canonical_basis(n)
    bright = float(np.real(basis.bright.conj() @ rho.entries @ basis.bright))
    out = {
        "rho00": float(np.real(rho.entries[0, 0])),
        "rho_bb": bright,
        "rho_dd": _dark_population(rho.entries, n) if n >= 3 else 0.0,
        "abs_rho21": float(abs(rho.entries[2, 1])) if n >= 3 else float("nan"),
    }
    return out


def report_row(report: ThermoReport) -> dict[str, object]:
    row: dict[str, object] = dict(state_coordinates(report.steady_state))
    row.update(
        J_cold=report.J_cold,
        J_hot=report.J_hot,
        W_dot=report.W_dot,
        eta=report.efficiency,
        entropy_production=report.entropy_production,
        mode=report.mode,
    )
    return row


def _error_row(axis_names: Sequence[str], axis_values: Sequence[object]) -> dict[str, object]:
    row: dict[str, object] = dict(zip(axis_names, axis_values))
    for col in REPORT_COLUMNS:
        row[col] = float("nan")
    row["eta"] = None
    row["mode"] = "error"
    return row


@dataclass(eq=False)
class SweepTable:
    """Rows of sweep results plus the metadata echoed into the CSV header."""

    axis_names: tuple[str, ...]
    rows: list[dict[str, object]]
    metadata: list[str]

    @property
    def columns(self) -> tuple[str, ...]:
        return self.axis_names + REPORT_COLUMNS

    def column(self, name: str) -> list[object]:
        return [row[name] for row in self.rows]

    def to_csv_text(self) -> str:
        lines = [f"# {line}" if line else "#" for line in self.metadata]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_cell(row[c]) for c in self.columns))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv_text())


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


# ---------------------------------------------------------------------------
# axis application
# ---------------------------------------------------------------------------

def _with_axis(cfg: MachineConfig, axis: str, value: float) -> MachineConfig:
    if axis == "Omega":
        return cfg.with_updates(modulation=replace(cfg.modulation, Omega=float(value)))
    if axis == "lambda":
        if not isinstance(cfg.modulation, SinusoidalModulation):
            raise ConfigError("axis 'lambda' needs sinusoidal modulation")
        return cfg.with_updates(modulation=replace(cfg.modulation, lam=float(value)))
    if axis == "T_h":
        return cfg.with_updates(bath_hot=replace(cfg.bath_hot, temperature=float(value)))
    if axis == "T_c":
        return cfg.with_updates(bath_cold=replace(cfg.bath_cold, temperature=float(value)))
    if axis == "p":
        system = cfg.system
        gram = DipoleGram.uniform(system.n_excited, float(value))
        return cfg.with_updates(system=replace(system, gram=gram))
    if axis == "beta_eff-target":
        return rescale_to_beta_eff(cfg, float(value))
    if axis == "dark_overlap":
        return cfg.with_updates(initial_state=dark_overlap_state(cfg.system, float(value)))
    raise ConfigError(f"unknown sweep axis {axis!r}, expected one of {SWEEP_AXES}")


def dark_overlap_state(system: SystemSpec, overlap: float) -> DensityMatrix:
    """Initial state with a prescribed dark population: a mixture of the
    maximally mixed dark state and the ground state."""
    if not 0.0 <= overlap <= 1.0:
        raise ConfigError(f"dark overlap must lie in [0, 1], got {overlap}")
    if system.n_levels < 3:
        raise ConfigError("dark-overlap states need at least 3 levels")
    ground = initial_state(system, "ground").entries
    dark = initial_state(system, "dark").entries
    return DensityMatrix(overlap * dark + (1.0 - overlap) * ground)


def rescale_to_beta_eff(cfg: MachineConfig, target: float) -> MachineConfig:
    """Rescale both bath temperatures by a common factor so that
    beta_eff * omega0 hits `target`.

    The emission sum is temperature-independent for fixed spectra while the
    absorption sum grows monotonically with the common scale, so the target
    is bracketed and solved by brentq.
    """
    if target <= 0.0:
        raise ConfigError(f"beta_eff target must be > 0, got {target}")

    def beta_at(scale: float) -> float:
        scaled = cfg.with_updates(
            bath_cold=replace(cfg.bath_cold, temperature=scale * cfg.bath_cold.temperature),
            bath_hot=replace(cfg.bath_hot, temperature=scale * cfg.bath_hot.temperature),
        )
        x = boltzmann_factor(scaled)  # absorption sum underflows at extreme cold
        return -math.log(x) if x > 0.0 else math.inf

    # beta_eff falls as the common scale grows: small scales bracket from
    # above, large scales from below
    lo, hi = 1.0, 1.0
    for _ in range(200):
        if beta_at(lo) >= target:
            break
        lo *= 0.5
    for _ in range(200):
        if beta_at(hi) <= target:
            break
        hi *= 2.0
    if not beta_at(hi) <= target <= beta_at(lo):
        raise ConfigError(f"beta_eff target {target} not reachable by temperature scaling")
    if lo == hi:
        scale = lo
    else:
        scale = brentq(lambda s: beta_at(s) - target, lo, hi, xtol=1e-14, rtol=1e-14)
    return cfg.with_updates(
        bath_cold=replace(cfg.bath_cold, temperature=scale * cfg.bath_cold.temperature),
        bath_hot=replace(cfg.bath_hot, temperature=scale * cfg.bath_hot.temperature),
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def sweep_grid(
    cfg: MachineConfig,
    axis: str,
    values: Sequence[float],
    metadata: Iterable[str] = (),
) -> SweepTable:
    """Evaluate the machine over a one-dimensional grid.

    Invalid or failing points become rows with mode = 'error' (the message
    goes into the table metadata) instead of aborting the sweep.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}, expected one of {SWEEP_AXES}")
    meta = list(metadata)
    meta.append(f"axis: {axis}")

    def solve(value: float) -> tuple[dict[str, object], str | None]:
        try:
            point = _with_axis(cfg, axis, value)
            bad = validate_config(point)
            if bad:
                raise ConfigError("; ".join(bad))
            row: dict[str, object] = {axis: value}
            row.update(report_row(thermo_report(point)))
            return row, None
        except VheatError as exc:
            row = _error_row((axis,), (value,))
            return row, f"error at {axis}={value!r}: {exc}"

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(solve, values))
    rows = []
    for row, err in results:
        rows.append(row)
        if err:
            meta.append(err)
    return SweepTable(axis_names=(axis,), rows=rows, metadata=meta)


# ---------------------------------------------------------------------------
# power maximization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PowerOptimum:
    """Best engine-mode point found by maximize_power."""

    Omega: float
    lam: float | None
    W_dot: float           # signed; negative in engine mode
    report: ThermoReport
    certified: bool        # both neighbors checked and not better


def _engine_power(cfg: MachineConfig) -> tuple[float | None, ThermoReport | None]:
    """|W_dot| if the point runs as an engine, else None."""
    try:
        rep = thermo_report(cfg)
    except VheatError:
        return None, None
    if rep.mode != MODE_ENGINE:
        return None, rep
    return abs(rep.W_dot), rep


def maximize_power(
    cfg_template: MachineConfig | Callable[[float], MachineConfig],
    omega_bounds: tuple[float, float],
    lambda_bounds: tuple[float, float] | None = None,
    n_coarse: int = 64,
    xtol_rel: float = 1e-6,
) -> PowerOptimum | None:
    """Maximize |W_dot| over the modulation rate, engine-mode points only.

    A coarse grid (>= 64 points) locates the best engine-mode point; a
    golden-section refinement sharpens it, and the result is certified by
    checking that both neighbors at the final bracket width are no better.
    Non-engine points never win.  Returns None when the bounds contain no
    engine point at all.  `cfg_template` may be a config (only Omega is
    varied) or a callable building a config per candidate Omega, for
    machines whose spectra track the modulation rate.

    With `lambda_bounds` the same search runs on the modulation depth,
    nested around the Omega search.
    """
    if callable(cfg_template):
        base_factory = cfg_template
    else:
        base_factory = lambda om: _with_axis(cfg_template, "Omega", om)

    if lambda_bounds is not None:
        if callable(cfg_template):
            raise ConfigError("lambda refinement needs a config template, not a factory")

        def score_lambda(lam: float) -> tuple[float | None, PowerOptimum | None]:
            shifted = _with_axis(cfg_template, "lambda", lam)
            best = maximize_power(shifted, omega_bounds, None, n_coarse, xtol_rel)
            if best is None:
                return None, None
            return abs(best.W_dot), best

        lam_opt, inner = _golden_max(score_lambda, lambda_bounds, max(n_coarse // 4, 9), xtol_rel)
        if inner is None:
            return None
        return replace(inner, lam=lam_opt, certified=inner.certified)

    def score_omega(om: float) -> tuple[float | None, PowerOptimum | None]:
        cfg = base_factory(om)
        power, rep = _engine_power(cfg)
        if power is None:
            return None, None
        lam = cfg.modulation.lam if isinstance(cfg.modulation, SinusoidalModulation) else None
        return power, PowerOptimum(Omega=om, lam=lam, W_dot=rep.W_dot, report=rep, certified=False)

    om_opt, best = _golden_max(score_omega, omega_bounds, n_coarse, xtol_rel)
    if best is None:
        return None

    # neighbor certificate at the final resolution
    span = omega_bounds[1] - omega_bounds[0]
    h = max(xtol_rel * span, 1e-12 * max(1.0, abs(om_opt)))
    f_best = abs(best.W_dot)
    ftol = 1e-9 * max(1.0, f_best)
    certified = True
    for x in (om_opt - h, om_opt + h):
        if not omega_bounds[0] <= x <= omega_bounds[1]:
            continue
        f_x, _ = score_omega(x)
        if f_x is not None and f_x > f_best + ftol:
            certified = False
    return replace(best, certified=certified)


def _golden_max(score, bounds, n_coarse, xtol_rel):
    """Coarse grid + golden-section maximization of score()[0] (None = invalid)."""
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise ConfigError(f"bounds must satisfy lo < hi, got ({lo}, {hi})")
    n_coarse = max(int(n_coarse), 3)
    xs = np.linspace(lo, hi, n_coarse)
    best_x, best_f, best_payload = None, -math.inf, None

    def probe(x: float):
        nonlocal best_x, best_f, best_payload
        f, payload = score(float(x))
        if f is not None and f > best_f:
            best_x, best_f, best_payload = float(x), f, payload
        return -math.inf if f is None else f

    fs = [probe(x) for x in xs]
    if best_payload is None:
        return None, None
    i = int(np.argmax(fs))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n_coarse - 1)]

    xtol = xtol_rel * (hi - lo)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = probe(c), probe(d)
    while (b - a) > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = probe(d)
    return best_x, best_payload


# ---------------------------------------------------------------------------
# figure datasets
# ---------------------------------------------------------------------------

FIGURE_KINDS = ("fig2b", "fig2c", "fig3")


def figure_datasets(which: str, cfg: MachineConfig, metadata: Iterable[str] = ()) -> SweepTable:
    """Precomputed datasets behind the three standard plots.

    fig2b  maximized |W_dot| of the two-level, misaligned, and aligned
           machines against the hot-bath temperature at T_c = 0.1*T_h
    fig2c  steady |rho21| of the aligned machine against the initial dark
           population (its zero marks the enhancement threshold)
    fig3   ground populations and powers of the aligned-optimal and
           misaligned machines deep in the hot (beta_eff*omega0 = 0.01)
           and cold (= 10) regimes
    """
    if which == "fig2b":
        return _fig2b(cfg, metadata)
    if which == "fig2c":
        return _fig2c(cfg, metadata)
    if which == "fig3":
        return _fig3(cfg, metadata)
    raise ConfigError(f"unknown figure kind {which!r}, expected one of {FIGURE_KINDS}")


def _machine_variants(cfg: MachineConfig) -> dict[str, MachineConfig]:
    """tls / misaligned / aligned variants sharing baths and modulation."""
    base = cfg.system
    tls = replace(base, n_levels=2, detunings=(0.0,), gram=DipoleGram.aligned(1))
    mis = replace(base, gram=DipoleGram.uniform(base.n_excited, 0.0))
    ali = replace(base, gram=DipoleGram.aligned(base.n_excited))
    return {
        "tls": cfg.with_updates(system=tls, initial_state="ground"),
        "misaligned": cfg.with_updates(system=mis, initial_state="ground"),
        "aligned": cfg.with_updates(system=ali, initial_state="ground"),
    }


def _fig2b(cfg: MachineConfig, metadata: Iterable[str]) -> SweepTable:
    """Maximized power of the three machines vs hot-bath temperature.

    For each T_h (with T_c pinned to 0.1*T_h) the modulation rate is
    re-optimized per machine; the separated flat bands track each
    candidate Omega so both sidebands stay addressed.  The initial state
    of the aligned machine is the ground state (zero dark population, the
    optimal choice).
    """
    omega0 = cfg.system.omega0
    lam = cfg.modulation.lam if isinstance(cfg.modulation, SinusoidalModulation) else None
    t_grid = omega0 * np.geomspace(0.5, 10.0, 7)
    bounds = (0.2 * omega0, 0.9 * omega0)
    meta = list(metadata)
    meta.append("fig2b: T_c = 0.1*T_h; omega bounds "
                f"[{bounds[0]!r}, {bounds[1]!r}]; lambda = {lam!r}")

    n_levels = cfg.system.n_levels
    variants = ("tls", "misaligned", "aligned")

    def build(machine: str, t_hot: float, om: float) -> MachineConfig:
        alignment = {"tls": 1.0, "misaligned": 0.0, "aligned": 1.0}[machine]
        return two_band_machine(
            omega0=omega0,
            Omega=om,
            T_cold=0.1 * t_hot,
            T_hot=t_hot,
            n_levels=2 if machine == "tls" else n_levels,
            alignment=alignment,
            lam=lam,
            initial_state="ground",
        )

    def solve(point: tuple[float, str]) -> tuple[dict[str, object], str | None]:
        t_hot, machine = point
        try:
            best = maximize_power(lambda om: build(machine, t_hot, om), bounds)
            if best is None:
                raise ConfigError("no engine-mode point within omega bounds")
            row: dict[str, object] = {"T_hot": t_hot, "machine": machine}
            row.update(report_row(best.report))
            return row, None
        except VheatError as exc:
            return (
                _error_row(("T_hot", "machine"), (t_hot, machine)),
                f"error at T_hot={t_hot!r} machine={machine}: {exc}",
            )

    points = [(t, m) for t in t_grid for m in variants]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(solve, points))
    rows = []
    for row, err in results:
        rows.append(row)
        if err:
            meta.append(err)
    return SweepTable(axis_names=("T_hot", "machine"), rows=rows, metadata=meta)


def _fig2c(cfg: MachineConfig, metadata: Iterable[str]) -> SweepTable:
    """Steady coherence |rho21| against the initial dark population."""
    aligned = _machine_variants(cfg)["aligned"]
    x = boltzmann_factor(aligned)
    threshold = x / (1.0 + 2.0 * x)
    meta = list(metadata)
    meta.append(f"beta_eff_omega0 = {-math.log(x)!r}")
    meta.append(f"threshold_dark_overlap = {threshold!r}")
    overlaps = np.linspace(0.0, 1.0, 101)
    table = sweep_grid(aligned, "dark_overlap", list(overlaps), meta)
    return SweepTable(axis_names=("dark_overlap",), rows=table.rows, metadata=table.metadata)


def _fig3(cfg: MachineConfig, metadata: Iterable[str]) -> SweepTable:
    """Aligned-vs-misaligned comparison deep in the hot and cold regimes."""
    meta = list(metadata)
    meta.append("fig3: aligned machine starts in the ground state (zero dark population)")
    rows: list[dict[str, object]] = []
    for target in (0.01, 10.0):
        scaled = rescale_to_beta_eff(cfg, target)
        variants = _machine_variants(scaled)
        for machine in ("aligned", "misaligned"):
            point = variants[machine]
            try:
                row: dict[str, object] = {"beta_eff_omega0": target, "machine": machine}
                row.update(report_row(thermo_report(point)))
                rows.append(row)
            except VheatError as exc:
                rows.append(_error_row(("beta_eff_omega0", "machine"), (target, machine)))
                meta.append(f"error at beta_eff_omega0={target!r} machine={machine}: {exc}")
    return SweepTable(axis_names=("beta_eff_omega0", "machine"), rows=rows, metadata=meta)
