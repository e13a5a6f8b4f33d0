"""Shared fixtures: seeded RNGs, random states, and machine factories.

All randomness is seeded so failures reproduce; tests that need many
draws parametrize over seeds instead of sampling inside loops.
"""

from __future__ import annotations

import numpy as np
import pytest

from vheat import DensityMatrix, MachineConfig, two_band_machine


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_density(rng: np.random.Generator, n: int) -> DensityMatrix:
    """Random full-rank density matrix (Wishart-like)."""
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix(rho)


def random_engine_config(rng: np.random.Generator, **overrides) -> MachineConfig:
    """Random valid two-band machine; draws stay inside the engine window's
    usual neighborhood but the operating mode is not guaranteed."""
    params = dict(
        omega0=1.0,
        Omega=float(rng.uniform(0.2, 0.8)),
        T_hot=float(rng.uniform(0.5, 5.0)),
        n_levels=3,
        alignment=float(rng.uniform(0.0, 1.0)),
        gamma_cold=float(rng.uniform(0.5, 2.0)),
        gamma_hot=float(rng.uniform(0.5, 2.0)),
        lam=float(rng.uniform(0.1, 1.2)),
    )
    params["T_cold"] = params["T_hot"] * float(rng.uniform(0.05, 0.5))
    params.update(overrides)
    return two_band_machine(**params)


@pytest.fixture
def rng() -> np.random.Generator:
    return make_rng(20260825)
