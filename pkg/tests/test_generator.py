"""Vectorized dissipation generators.

Two oracles, both written before the assertions and independent of the
implementation:

  * the double-commutator dissipator D(a, b) rho = 2 a rho b - b a rho
    - rho b a, applied directly with matrix products;
  * a from-scratch sub-bath generator for degenerate levels, assembled by
    applying that dissipator to every matrix unit and stacking columns.
"""

from __future__ import annotations

import numpy as np
import pytest

from vheat import (
    build_subbath_generator,
    build_total_generator,
    coefficient_determinant,
    coupling_spectrum,
    reduced_ode_system,
    subbath_generators,
    two_band_machine,
)
from vheat.floquet import modulation_weights
from vheat.generator import dissipator_matrix, lowering_operators, unvectorize, vectorize

from conftest import make_rng, random_density


def apply_dissipator(a: np.ndarray, b: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return 2.0 * a @ rho @ b - b @ a @ rho - rho @ b @ a


def reference_subbath_matrix(cfg, bath_id: str, q: int) -> np.ndarray:
    """Independent dense construction for degenerate levels."""
    n = cfg.system.n_levels
    bath = cfg.bath_cold if bath_id == "cold" else cfg.bath_hot
    weight = dict(modulation_weights(cfg.modulation).retained(eps=0.0)).get(q, 0.0)
    sideband = cfg.system.omega0 + q * cfg.modulation.Omega
    g_emit = 0.5 * weight * coupling_spectrum(bath, sideband)
    g_absorb = 0.5 * weight * coupling_spectrum(bath, -sideband)
    p = cfg.system.gram.matrix
    sm = lowering_operators(n)
    sp = [op.conj().T for op in sm]

    def superop(action) -> np.ndarray:
        cols = []
        for unit in range(n * n):
            e = np.zeros(n * n)
            e[unit] = 1.0
            cols.append(vectorize(action(unvectorize(e.astype(complex), n))))
        return np.column_stack(cols)

    def total(rho):
        out = np.zeros_like(rho)
        for j in range(n - 1):
            for jp in range(n - 1):
                out += p[j, jp] * (
                    g_emit * apply_dissipator(sm[j], sp[jp], rho)
                    + g_absorb * apply_dissipator(sp[j], sm[jp], rho)
                )
        return out

    return superop(total)


# --- vectorization and the dissipator matrix ---

@pytest.mark.parametrize("seed", range(5))
def test_vectorization_round_trip(seed):
    rng = make_rng(4000 + seed)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    np.testing.assert_array_equal(unvectorize(vectorize(m), 4), m)


@pytest.mark.parametrize("seed", range(8))
def test_dissipator_matrix_matches_direct_products(seed):
    rng = make_rng(4100 + seed)
    n = int(rng.integers(2, 6))
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    via_matrix = unvectorize(dissipator_matrix(a, b) @ vectorize(rho), n)
    np.testing.assert_allclose(via_matrix, apply_dissipator(a, b, rho), atol=1e-12)


# --- sub-bath generators against the from-scratch oracle ---

@pytest.mark.parametrize("seed", range(8))
def test_subbath_generator_matches_reference(seed):
    rng = make_rng(4200 + seed)
    cfg = two_band_machine(
        Omega=float(rng.uniform(0.2, 0.8)),
        T_cold=float(rng.uniform(0.05, 1.0)),
        T_hot=float(rng.uniform(1.0, 5.0)),
        n_levels=int(rng.integers(2, 5)),
        alignment=float(rng.uniform(0.0, 1.0)),
        lam=float(rng.uniform(0.1, 1.5)),
    )
    for gen in subbath_generators(cfg):
        ref = reference_subbath_matrix(cfg, gen.bath_id, gen.q)
        np.testing.assert_allclose(gen.matrix, ref, atol=1e-13, err_msg=f"{gen.bath_id} q={gen.q}")


def test_retained_channels_of_the_example_machine():
    # separated flat bands: only the carrier (cold) and the first upper
    # sideband (hot) couple; everything else is silent
    cfg = two_band_machine(lam=0.5)
    channels = {(g.bath_id, g.q) for g in subbath_generators(cfg)}
    assert channels == {("cold", 0), ("hot", 1)}


def test_nonpositive_sideband_raises():
    from vheat import SinusoidalModulation

    cfg = two_band_machine(omega0=1.0, Omega=0.5).with_updates(
        modulation=SinusoidalModulation(lam=0.5, Omega=0.5, q_max=2)
    )
    # q = -2 puts the sideband at exactly zero while carrying weight
    with pytest.raises(ValueError):
        build_subbath_generator(cfg, "cold", -2)


def test_weightless_harmonic_builds_a_zero_generator():
    # no weight means the spectrum is never evaluated, even at a bad sideband
    cfg = two_band_machine(omega0=1.0, Omega=0.5)  # custom weights on q in {0, 1}
    gen = build_subbath_generator(cfg, "cold", -2)
    assert gen.weight == 0.0
    assert np.count_nonzero(gen.matrix) == 0


# --- structural invariants of the total generator ---

@pytest.mark.parametrize("alignment", [0.0, 0.35, 1.0])
def test_generator_annihilates_trace(alignment):
    cfg = two_band_machine(alignment=alignment, lam=0.7)
    lop = build_total_generator(cfg)
    n = cfg.system.n_levels
    trace_row = vectorize(np.eye(n, dtype=complex))
    np.testing.assert_allclose(trace_row @ lop, np.zeros(n * n), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_generator_preserves_hermiticity(seed):
    rng = make_rng(4300 + seed)
    cfg = two_band_machine(alignment=float(rng.uniform(0, 1)), lam=0.5)
    lop = build_total_generator(cfg)
    n = cfg.system.n_levels
    rho = random_density(rng, n).entries
    drho = unvectorize(lop @ vectorize(rho), n)
    np.testing.assert_allclose(drho, drho.conj().T, atol=1e-12)


def test_dark_block_is_annihilated_when_aligned():
    cfg = two_band_machine(n_levels=4, alignment=1.0, lam=0.5)
    lop = build_total_generator(cfg)
    n = 4
    from vheat import bright_dark_basis

    darks = bright_dark_basis(cfg.system).darks
    for u in darks:
        for v in darks:
            rho = np.outer(u, v.conj())
            np.testing.assert_allclose(lop @ vectorize(rho), np.zeros(n * n), atol=1e-12)


def test_dark_ground_coherence_decays_but_population_does_not():
    # only the dark-dark block is conserved; dark-ground coherences damp out
    cfg = two_band_machine(n_levels=3, alignment=1.0, lam=0.5)
    lop = build_total_generator(cfg)
    from vheat import bright_dark_basis

    basis = bright_dark_basis(cfg.system)
    d = basis.darks[0]
    coh = np.outer(d, basis.ground.conj())
    assert np.linalg.norm(lop @ vectorize(coh)) > 1e-6
    pop = np.outer(d, d.conj())
    np.testing.assert_allclose(lop @ vectorize(pop), np.zeros(9), atol=1e-13)


@pytest.mark.parametrize("n_levels,alignment,expected", [
    (3, 0.0, 1),   # unique steady state
    (3, 0.6, 1),
    (3, 1.0, 2),   # dark population + active sector
    (4, 1.0, 5),   # (N-2)^2 + 1
    (5, 1.0, 10),
])
def test_kernel_dimension(n_levels, alignment, expected):
    cfg = two_band_machine(n_levels=n_levels, alignment=alignment, lam=0.5)
    lop = build_total_generator(cfg)
    s = np.linalg.svd(lop, compute_uv=False)
    assert int(np.sum(s < 1e-10 * s[0])) == expected


# --- reduced four-component dynamics ---

@pytest.mark.parametrize("seed", range(10))
def test_reduced_ode_matches_full_generator(seed):
    rng = make_rng(4400 + seed)
    cfg = two_band_machine(alignment=float(rng.uniform(0.0, 1.0)), lam=float(rng.uniform(0.2, 1.0)))
    ode = reduced_ode_system(cfg)
    lop = build_total_generator(cfg)
    rho = random_density(rng, 3).entries
    drho = unvectorize(lop @ vectorize(rho), 3)
    # component order: (rho_21, rho_12, rho_00, rho_22)
    x = np.array([rho[2, 1], rho[1, 2], rho[0, 0], rho[2, 2]], dtype=complex)
    dx_reduced = ode.A @ x + ode.b
    dx_full = np.array([drho[2, 1], drho[1, 2], drho[0, 0], drho[2, 2]], dtype=complex)
    np.testing.assert_allclose(dx_reduced, dx_full, atol=1e-12)


def test_reduced_ode_requires_three_degenerate_levels():
    with pytest.raises(ValueError):
        reduced_ode_system(two_band_machine(n_levels=4))
    with pytest.raises(ValueError):
        reduced_ode_system(two_band_machine(detunings=(0.0, 0.05)))


@pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 0.75])
def test_determinant_closed_form(p):
    cfg = two_band_machine(alignment=p, lam=0.5)
    ode = reduced_ode_system(cfg)
    expected = ode.prefactor**4 * 16.0 * (1.0 + 2.0 * ode.boltzmann) * (1.0 - p * p)
    assert coefficient_determinant(cfg) == pytest.approx(expected, rel=1e-10)


def test_determinant_unit_rate_hot_limit():
    # rescale both couplings so the prefactor is exactly 1, push both baths
    # to enormous temperature so x -> 1: det(A) -> 16 * 3 * 1 = 48
    raw = reduced_ode_system(two_band_machine(alignment=0.0, T_cold=1e12, T_hot=1e12))
    s = 1.0 / raw.prefactor
    cfg = two_band_machine(alignment=0.0, T_cold=1e12, T_hot=1e12,
                           gamma_cold=s, gamma_hot=s)
    assert coefficient_determinant(cfg) == pytest.approx(48.0, rel=1e-9)


def test_determinant_vanishes_when_aligned():
    cfg = two_band_machine(alignment=1.0, lam=0.5)
    ode = reduced_ode_system(cfg)
    s = np.linalg.svd(ode.A, compute_uv=False)
    assert s[-1] < 1e-12 * s[0]
