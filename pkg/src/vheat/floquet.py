"""Harmonic weights of the periodic modulation.

A sinusoidal modulation of the level splitting distributes the bath
coupling over sidebands omega0 + q*Omega with weights P(q) = J_q(lambda)^2,
J_q the Bessel function of the first kind and lambda the modulation depth
(frequency excursion over Omega).  The squared weights sum to 1, so P(q)
is a probability distribution over harmonics; an unmodulated machine has
P(0) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .model import CustomModulation, ModulationSpec, SinusoidalModulation, WEIGHT_EPS

_MAX_ORDER = 50
_MAX_ARG = 20.0
# smallest tail mass we bother keeping before renormalizing
_TAIL_EPS = 1e-12


def bessel_jq(q: int, x: float) -> float:
    """Bessel function of the first kind J_q(x) for |q| <= 50, 0 <= x <= 20.

    Small arguments use the ascending power series; elsewhere the value
    comes from Miller's downward recurrence normalized with the identity
    J_0 + 2*sum_k J_2k = 1.  Absolute accuracy is well below 1e-12 on the
    supported domain.
    """
    if abs(q) > _MAX_ORDER:
        raise ValueError(f"order |q| <= {_MAX_ORDER} supported, got {q}")
    if not 0.0 <= x <= _MAX_ARG:
        raise ValueError(f"argument must lie in [0, {_MAX_ARG}], got {x}")
    n = abs(q)
    sign = -1.0 if (q < 0 and n % 2 == 1) else 1.0  # J_{-n} = (-1)^n J_n
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x <= 1.0:
        return sign * _series(n, x)
    return sign * _miller(n, x)


def _series(n: int, x: float) -> float:
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    for k in range(1, 60):
        term *= -(half * half) / (k * (n + k))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def _miller(n: int, x: float) -> float:
    # start far enough above max(n, x) that the seeded error has decayed away
    m = max(n, int(math.ceil(x))) + 52
    if m % 2 == 1:
        m += 1
    vals = [0.0] * (m + 2)
    vals[m] = 1e-30
    for k in range(m, 0, -1):
        vals[k - 1] = (2.0 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e280:  # keep the unnormalized run in range
            scale = 1e-280
            for i in range(k - 1, m + 2):
                vals[i] *= scale
    norm = vals[0] + 2.0 * sum(vals[2::2])
    return vals[n] / norm


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Retained harmonic weights P(q), q in [-q_max, q_max], summing to 1."""

    entries: Mapping[int, float]
    q_max: int

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def probability(self, q: int) -> float:
        return self.entries.get(q, 0.0)

    def retained(self, eps: float = WEIGHT_EPS) -> list[tuple[int, float]]:
        """(q, P(q)) pairs with nonnegligible weight, ordered by q."""
        return [(q, w) for q, w in sorted(self.entries.items()) if w > eps]


def modulation_weights(mod: ModulationSpec) -> WeightTable:
    """Harmonic weight table of a modulation spec.

    Sinusoidal: P(q) = J_q(lambda)^2, truncated at the smaller of the
    user's q_max and the lowest order whose tail mass drops below 1e-12,
    then renormalized to unit sum (truncation keeps probability
    conservation exact).  Custom: weights are validated, truncated at
    q_max and renormalized.
    """
    if isinstance(mod, CustomModulation):
        entries = {q: w for q, w in mod.weights.items() if abs(q) <= mod.q_max}
        if not entries:
            raise ValueError("custom modulation keeps no weights within q_max")
        bad = [q for q, w in entries.items() if w < 0]
        if bad:
            raise ValueError(f"custom weights must be >= 0, negative at q = {sorted(bad)}")
        total = sum(entries.values())
        if total <= 0:
            raise ValueError("custom weights sum to zero")
        cut = max(abs(q) for q in entries)
        return WeightTable({q: w / total for q, w in entries.items()}, q_max=cut)

    if mod.lam == 0.0:
        return WeightTable({0: 1.0}, q_max=0)
    raw: dict[int, float] = {}
    total = 0.0
    cut = mod.q_max
    for q in range(0, mod.q_max + 1):
        w = bessel_jq(q, mod.lam) ** 2
        raw[q] = w
        if q > 0:
            raw[-q] = w
        total += w if q == 0 else 2.0 * w
        if 1.0 - total < _TAIL_EPS:
            cut = q
            break
    entries = {q: w / total for q, w in raw.items() if abs(q) <= cut}
    return WeightTable(entries, q_max=cut)
