"""Heat currents, power, operating modes, and enhancement ratios.

Oracle: the two-level power closed form
W_dot = sum_iq w_q P(q) G_i(w_q) (x - exp(-beta_i w_q)) / (x + 1),
written out with plain math in `oracle_tls_power` for the separated-band
machine, then compared against both the library closed form and the full
two-level numerical machine.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from vheat import (
    AlignmentError,
    DensityMatrix,
    boltzmann_factor,
    bright_dark_basis,
    enhancement_ratios,
    initial_state,
    misaligned_power_ratio,
    subbath_heat_current,
    thermo_report,
    tls_reference_power,
    two_band_machine,
)
from vheat.sweep import rescale_to_beta_eff

from conftest import make_rng, random_engine_config

P0, P1 = 0.8823901284257036, 0.0588049357871482  # lambda = 0.5, q_max = 1


def oracle_tls_power(T_cold, T_hot, omega0, Omega, gamma_cold=1.0, gamma_hot=1.0):
    """Plain-math separated-band two-level power (cold at carrier, hot at
    first upper sideband)."""
    w0, w1 = omega0, omega0 + Omega
    nbar_c = 1.0 / math.expm1(w0 / T_cold)
    nbar_h = 1.0 / math.expm1(w1 / T_hot)
    up = P0 * gamma_cold * nbar_c + P1 * gamma_hot * nbar_h
    down = P0 * gamma_cold * (nbar_c + 1.0) + P1 * gamma_hot * (nbar_h + 1.0)
    x = up / down
    out = w0 * P0 * gamma_cold * (nbar_c + 1.0) * (x - math.exp(-w0 / T_cold))
    out += w1 * P1 * gamma_hot * (nbar_h + 1.0) * (x - math.exp(-w1 / T_hot))
    return out / (x + 1.0)


# --- two-level closed form ---

@pytest.mark.parametrize("seed", range(12))
def test_tls_power_closed_form_matches_oracle_and_numerics(seed):
    rng = make_rng(6000 + seed)
    kw = dict(
        Omega=float(rng.uniform(0.2, 0.8)),
        T_hot=float(rng.uniform(0.5, 5.0)),
        gamma_cold=float(rng.uniform(0.5, 2.0)),
        gamma_hot=float(rng.uniform(0.5, 2.0)),
    )
    kw["T_cold"] = kw["T_hot"] * float(rng.uniform(0.05, 0.5))
    cfg = two_band_machine(n_levels=2, lam=0.5, **kw)
    expected = oracle_tls_power(omega0=1.0, **kw)
    assert tls_reference_power(cfg) == pytest.approx(expected, rel=1e-12)
    assert thermo_report(cfg).W_dot == pytest.approx(expected, rel=1e-9)


# --- bookkeeping identities ---

@pytest.mark.parametrize("seed", range(20))
def test_first_and_second_laws(seed):
    rng = make_rng(6100 + seed)
    cfg = random_engine_config(rng)
    rep = thermo_report(cfg)
    # first law: the power is defined by closure and channel currents add up
    assert rep.W_dot + rep.J_cold + rep.J_hot == 0.0
    by_bath = {"cold": 0.0, "hot": 0.0}
    for (bath_id, _), current in rep.subbath_currents.items():
        by_bath[bath_id] += current
    assert by_bath["cold"] == pytest.approx(rep.J_cold, rel=1e-12, abs=1e-15)
    assert by_bath["hot"] == pytest.approx(rep.J_hot, rel=1e-12, abs=1e-15)
    # second law
    sigma = -rep.J_cold / cfg.bath_cold.temperature - rep.J_hot / cfg.bath_hot.temperature
    assert rep.entropy_production == pytest.approx(sigma, rel=1e-12, abs=1e-15)
    assert rep.entropy_production >= -1e-12


def test_subbath_current_matches_report():
    cfg = two_band_machine(lam=0.5)
    rep = thermo_report(cfg)
    for (bath_id, q), current in rep.subbath_currents.items():
        again = subbath_heat_current(cfg, bath_id, q, rep.steady_state)
        assert again == pytest.approx(current, rel=1e-14)


# --- operating modes ---

def test_engine_window_and_efficiency():
    cfg = two_band_machine(Omega=0.5, T_cold=0.1, T_hot=1.0, lam=0.5)
    rep = thermo_report(cfg)
    assert rep.mode == "engine"
    assert rep.W_dot < 0.0 and rep.J_hot > 0.0 and rep.J_cold < 0.0
    # two coupled sidebands: efficiency is exactly Omega / (omega0 + Omega)
    assert rep.efficiency == pytest.approx(0.5 / 1.5, rel=1e-9)
    carnot = 1.0 - 0.1 / 1.0
    assert rep.efficiency <= carnot + 1e-9


def test_refrigerator_window():
    # beta_h * (omega0 + Omega) > beta_c * omega0 flips both currents: heat
    # flows out of the cold bath while work is dissipated
    cfg = two_band_machine(Omega=0.5, T_cold=0.5, T_hot=0.55, lam=0.5)
    rep = thermo_report(cfg)
    assert rep.mode == "refrigerator"
    assert rep.J_cold > 0.0 and rep.J_hot < 0.0 and rep.W_dot > 0.0
    assert rep.efficiency is None
    assert rep.entropy_production >= -1e-12


def test_dark_state_gives_zero_currents():
    cfg = two_band_machine(alignment=1.0, lam=0.5, initial_state="dark")
    rep = thermo_report(cfg)
    assert abs(rep.W_dot) < 1e-10
    assert abs(rep.J_cold) < 1e-10 and abs(rep.J_hot) < 1e-10
    assert rep.mode == "dissipator"


@pytest.mark.parametrize("seed", range(10))
def test_multilevel_efficiency_equals_two_level_efficiency(seed):
    rng = make_rng(6200 + seed)
    cfg = random_engine_config(rng, n_levels=3, initial_state="ground")
    rep = thermo_report(cfg)
    if rep.mode != "engine":
        pytest.skip("drawn point is not an engine")
    tls = thermo_report(two_band_machine(
        omega0=1.0,
        Omega=cfg.modulation.Omega,
        T_cold=cfg.bath_cold.temperature,
        T_hot=cfg.bath_hot.temperature,
        n_levels=2,
        lam=cfg.modulation.lam,
        gamma_cold=cfg.bath_cold.shape.height,
        gamma_hot=cfg.bath_hot.shape.height,
    ))
    assert tls.mode == "engine"
    assert rep.efficiency == pytest.approx(tls.efficiency, abs=1e-9)


# --- enhancement ratios ---

@pytest.mark.parametrize("target", [0.05, 0.5, 2.0, 8.0])
def test_misaligned_power_ratio_formula(target):
    base = two_band_machine(alignment=0.0, lam=0.5)
    cfg = rescale_to_beta_eff(base, target)
    x = boltzmann_factor(cfg)
    w_mis = thermo_report(cfg).W_dot
    w_tls = tls_reference_power(cfg)
    assert w_mis / w_tls == pytest.approx(misaligned_power_ratio(x, 3), rel=1e-9)
    assert w_mis / w_tls == pytest.approx(2.0 * (1.0 + x) / (1.0 + 2.0 * x), rel=1e-9)


@pytest.mark.parametrize("n_levels", [4, 5])
def test_nlevel_misaligned_ratio(n_levels):
    cfg = two_band_machine(alignment=0.0, n_levels=n_levels, lam=0.5)
    x = boltzmann_factor(cfg)
    w = thermo_report(cfg).W_dot
    w_tls = tls_reference_power(cfg)
    m = n_levels - 1
    assert w / w_tls == pytest.approx(m * (1.0 + x) / (1.0 + m * x), rel=1e-9)


@pytest.mark.parametrize("dark_weight", [0.0, 0.2, 0.6, 1.0])
def test_aligned_ratio_tracks_initial_dark_population(dark_weight):
    cfg = two_band_machine(alignment=1.0, lam=0.5)
    basis = bright_dark_basis(cfg.system)
    dark = np.outer(basis.darks[0], basis.darks[0].conj())
    ground = np.zeros((3, 3), dtype=complex)
    ground[0, 0] = 1.0
    rho0 = DensityMatrix(dark_weight * dark + (1.0 - dark_weight) * ground)
    w = thermo_report(cfg, rho0=rho0).W_dot
    w_tls = tls_reference_power(cfg)
    assert w / w_tls == pytest.approx(2.0 * (1.0 - dark_weight), rel=1e-9, abs=1e-12)


def test_enhancement_ratio_struct():
    cfg = two_band_machine(alignment=1.0, lam=0.5)
    x = boltzmann_factor(cfg)
    bare = enhancement_ratios(cfg)
    assert bare.aligned_ratio is None and bare.nlevel_ratio is None
    assert bare.misaligned_ratio == pytest.approx(2.0 * (1.0 + x) / (1.0 + 2.0 * x))
    assert bare.threshold_dark_overlap == pytest.approx(x / (1.0 + 2.0 * x))
    assert bare.threshold_dark_overlap == pytest.approx(
        1.0 / (2.0 + math.exp(-math.log(x)))
    )

    rho0 = initial_state(cfg.system, "ground")
    full = enhancement_ratios(cfg, rho0)
    assert full.aligned_ratio == pytest.approx(2.0)
    assert full.nlevel_ratio == pytest.approx(2.0)
    assert full.aligned_vs_misaligned == pytest.approx((1.0 + 2.0 * x) / (1.0 + x))

    mis = two_band_machine(alignment=0.0, lam=0.5)
    with pytest.raises(AlignmentError):
        enhancement_ratios(mis, rho0)


def test_ratio_limits():
    # arithmetic limits of the misaligned enhancement
    assert misaligned_power_ratio(1.0, 3) == pytest.approx(4.0 / 3.0)
    assert misaligned_power_ratio(1e-12, 3) == pytest.approx(2.0, abs=1e-9)
    assert misaligned_power_ratio(1.0, 5) == pytest.approx(8.0 / 5.0)
