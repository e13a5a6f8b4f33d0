"""Thermal baths and their coupling spectra.

A bath is a temperature plus a spectral-density profile gamma(omega),
defined for omega > 0.  The system sees the bath through the one-sided
coupling spectrum

    G(omega)  = gamma(omega) * (nbar(omega) + 1)     omega > 0  (emission)
    G(-omega) = exp(-beta*omega) * G(omega)                      (absorption)

where nbar is the Bose occupation at the bath temperature.  The second
line is the detailed-balance (KMS) condition; it implies the exact
identity G(omega) - G(-omega) = gamma(omega).

Units: hbar = k_B = 1 throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class FlatBand:
    """Constant spectral density on [lo, hi] with hard cutoffs, zero outside."""

    lo: float
    hi: float
    height: float = 1.0

    def rate(self, omega: float) -> float:
        return self.height if self.lo <= omega <= self.hi else 0.0

    def violations(self) -> list[str]:
        out = []
        if not self.lo < self.hi:
            out.append(f"flat band needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.lo <= 0:
            out.append(f"flat band must sit at positive frequencies, lo = {self.lo}")
        if self.height < 0:
            out.append(f"flat band height must be >= 0, got {self.height}")
        return out


@dataclass(frozen=True)
class Lorentzian:
    """Lorentzian spectral density, peak value `height` at `center`."""

    center: float
    width: float
    height: float = 1.0

    def rate(self, omega: float) -> float:
        hw = 0.5 * self.width
        return self.height * hw * hw / ((omega - self.center) ** 2 + hw * hw)

    def violations(self) -> list[str]:
        out = []
        if self.center <= 0:
            out.append(f"lorentzian center must be > 0, got {self.center}")
        if self.width <= 0:
            out.append(f"lorentzian width must be > 0, got {self.width}")
        if self.height < 0:
            out.append(f"lorentzian height must be >= 0, got {self.height}")
        return out


@dataclass(frozen=True)
class OhmicExp:
    """Ohmic spectral density with exponential cutoff: coupling * omega * exp(-omega/cutoff)."""

    coupling: float
    cutoff: float

    def rate(self, omega: float) -> float:
        return self.coupling * omega * math.exp(-omega / self.cutoff)

    def violations(self) -> list[str]:
        out = []
        if self.coupling < 0:
            out.append(f"ohmic coupling must be >= 0, got {self.coupling}")
        if self.cutoff <= 0:
            out.append(f"ohmic cutoff must be > 0, got {self.cutoff}")
        return out


SpectralShape = FlatBand | Lorentzian | OhmicExp


@dataclass(frozen=True)
class BathSpec:
    """A thermal bath: temperature (k_B = 1) and spectral-density profile."""

    temperature: float
    shape: SpectralShape

    def violations(self) -> list[str]:
        out = []
        if self.temperature <= 0:
            out.append(f"bath temperature must be > 0, got {self.temperature}")
        out.extend(self.shape.violations())
        return out


def coupling_spectrum(bath: BathSpec, omega: float) -> float:
    """One-sided coupling spectrum G(omega) of `bath`.

    Positive frequencies give the induced emission rate
    gamma(omega) * (nbar + 1), negative frequencies the absorption rate
    fixed by detailed balance, G(-omega) = exp(-beta*omega) * G(omega).
    omega = 0 is rejected: the machine has no zero-frequency transition.
    """
    if omega == 0.0:
        raise ValueError("coupling spectrum undefined at omega = 0")
    beta = 1.0 / bath.temperature
    mag = abs(omega)
    gamma = bath.shape.rate(mag)
    if gamma <= 0.0:
        return 0.0
    z = beta * mag
    # nbar + 1 = 1 / (1 - exp(-z)), stable for any z > 0
    emission = gamma / (-math.expm1(-z))
    if omega > 0.0:
        return emission
    return math.exp(-z) * emission


def separated_band_baths(
    omega0: float,
    Omega: float,
    T_cold: float,
    T_hot: float,
    gamma_cold: float = 1.0,
    gamma_hot: float = 1.0,
    rel_width: float = 0.5,
) -> tuple[BathSpec, BathSpec]:
    """Two flat bands engineered so each bath addresses a single sideband.

    The cold band is centered on the bare transition frequency omega0, the
    hot band on the first upper sideband omega0 + Omega.  The common full
    width rel_width * Omega (rel_width < 1) leaves a gap between the bands,
    so the cold bath couples only at the q = 0 harmonic and the hot bath
    only at q = +1; every other sideband falls in a spectral hole.

    Returns (cold, hot).
    """
    if not 0.0 < rel_width < 1.0:
        raise ValueError(f"rel_width must lie in (0, 1), got {rel_width}")
    if Omega <= 0.0:
        raise ValueError(f"Omega must be > 0, got {Omega}")
    half = 0.5 * rel_width * Omega
    if omega0 - half <= 0.0:
        raise ValueError(
            f"cold band [{omega0 - half}, {omega0 + half}] reaches nonpositive frequencies"
        )
    cold = BathSpec(T_cold, FlatBand(omega0 - half, omega0 + half, gamma_cold))
    hot = BathSpec(T_hot, FlatBand(omega0 + Omega - half, omega0 + Omega + half, gamma_hot))
    return cold, hot
