"""Plain-text machine configuration files.

One `dotted.key = value` pair per line; blank lines and `#` comments are
ignored.  Keys are grouped by section:

    system.n_levels = 3
    system.omega0 = 1.0
    system.detunings = 0.0, 0.0       # optional, per excited level
    system.alignment = 1.0            # uniform dipole overlap p

    bath_cold.T = 0.1
    bath_cold.shape = flatband        # flatband | lorentzian | ohmic
    bath_cold.lo = 0.75               # flatband: lo, hi, height
    bath_cold.hi = 1.25
    bath_cold.height = 1.0
    bath_hot.T = 1.0
    bath_hot.shape = flatband
    bath_hot.lo = 1.25
    bath_hot.hi = 1.75
    bath_hot.height = 1.0

    modulation.kind = sinusoidal      # sinusoidal | custom
    modulation.lambda = 0.5           # sinusoidal only
    modulation.Omega = 0.5
    modulation.q_max = 1
    modulation.weights = 0:0.5, 1:0.5 # custom only, "q:weight" pairs

    initial.state = ground            # ground | bright | dark | thermal:<beta> | nondark-max:<r>

    numerics.rtol = 1e-10             # optional overrides

Unknown keys, duplicate keys, and malformed values raise ConfigError with
the offending line number.  The alternative shapes take
`center/width/height` (lorentzian) and `coupling/cutoff` (ohmic).
"""

from __future__ import annotations

from dataclasses import fields

from .bath import BathSpec, FlatBand, Lorentzian, OhmicExp
from .model import (
    ConfigError,
    CustomModulation,
    DipoleGram,
    MachineConfig,
    NumericsSpec,
    SinusoidalModulation,
    SystemSpec,
)

_BATH_KEYS = {
    "flatband": ("lo", "hi", "height"),
    "lorentzian": ("center", "width", "height"),
    "ohmic": ("coupling", "cutoff"),
}

_NUMERICS_KEYS = tuple(f.name for f in fields(NumericsSpec))

_INITIAL_PLAIN = ("ground", "bright", "dark")
_INITIAL_PREFIXES = ("thermal:", "nondark-max:")


def parse_config_text(text: str, source: str = "<config>") -> MachineConfig:
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or "." not in key:
            raise ConfigError(f"{source}:{lineno}: keys must look like 'section.name', got {key!r}")
        if key in pairs:
            first = pairs[key][1]
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {first})")
        pairs[key] = (value, lineno)
    return _assemble(pairs, source)


def load_config(path: str) -> MachineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=path)


def _assemble(pairs: dict[str, tuple[str, int]], source: str) -> MachineConfig:
    taken: set[str] = set()

    def take(key: str, default: str | None = None) -> str | None:
        taken.add(key)
        if key in pairs:
            return pairs[key][0]
        return default

    def need(key: str) -> str:
        value = take(key)
        if value is None:
            raise ConfigError(f"{source}: missing required key {key!r}")
        return value

    def where(key: str) -> str:
        return f"{source}:{pairs[key][1]}" if key in pairs else source

    def as_float(key: str, raw: str) -> float:
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{where(key)}: {key} must be a number, got {raw!r}") from exc

    def as_int(key: str, raw: str) -> int:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{where(key)}: {key} must be an integer, got {raw!r}") from exc

    # --- system ---
    n_levels = as_int("system.n_levels", take("system.n_levels", "3"))
    omega0 = as_float("system.omega0", need("system.omega0"))
    detunings: tuple[float, ...] = ()
    raw_det = take("system.detunings")
    if raw_det is not None:
        detunings = tuple(
            as_float("system.detunings", item.strip())
            for item in raw_det.split(",")
            if item.strip()
        )
    alignment = as_float("system.alignment", take("system.alignment", "1.0"))
    if n_levels < 2:
        raise ConfigError(f"{where('system.n_levels')}: system.n_levels must be >= 2, got {n_levels}")
    if not 0.0 <= alignment <= 1.0:
        raise ConfigError(
            f"{where('system.alignment')}: system.alignment must lie in [0, 1], got {alignment}"
        )
    gram = DipoleGram.uniform(n_levels - 1, alignment)
    system = SystemSpec(n_levels=n_levels, omega0=omega0, detunings=detunings, gram=gram)

    # --- baths ---
    def bath(prefix: str) -> BathSpec:
        temperature = as_float(f"{prefix}.T", need(f"{prefix}.T"))
        kind = need(f"{prefix}.shape").lower()
        if kind not in _BATH_KEYS:
            raise ConfigError(
                f"{where(prefix + '.shape')}: {prefix}.shape must be one of "
                f"{sorted(_BATH_KEYS)}, got {kind!r}"
            )
        params = {
            name: as_float(f"{prefix}.{name}", need(f"{prefix}.{name}"))
            for name in _BATH_KEYS[kind]
        }
        if kind == "flatband":
            shape = FlatBand(lo=params["lo"], hi=params["hi"], height=params["height"])
        elif kind == "lorentzian":
            shape = Lorentzian(center=params["center"], width=params["width"], height=params["height"])
        else:
            shape = OhmicExp(coupling=params["coupling"], cutoff=params["cutoff"])
        return BathSpec(temperature=temperature, shape=shape)

    bath_cold = bath("bath_cold")
    bath_hot = bath("bath_hot")

    # --- modulation ---
    kind = take("modulation.kind", "sinusoidal").lower()
    big_omega = as_float("modulation.Omega", need("modulation.Omega"))
    q_max = as_int("modulation.q_max", take("modulation.q_max", "20"))
    if kind == "sinusoidal":
        lam = as_float("modulation.lambda", take("modulation.lambda", "0.5"))
        if take("modulation.weights") is not None:
            raise ConfigError(
                f"{where('modulation.weights')}: modulation.weights is for kind = custom"
            )
        modulation = SinusoidalModulation(lam=lam, Omega=big_omega, q_max=q_max)
    elif kind == "custom":
        raw_weights = need("modulation.weights")
        if take("modulation.lambda") is not None:
            raise ConfigError(
                f"{where('modulation.lambda')}: modulation.lambda is for kind = sinusoidal"
            )
        weights: dict[int, float] = {}
        for item in raw_weights.split(","):
            item = item.strip()
            if not item:
                continue
            if ":" not in item:
                raise ConfigError(
                    f"{where('modulation.weights')}: weights entries look like 'q:weight', got {item!r}"
                )
            q_raw, w_raw = (part.strip() for part in item.split(":", 1))
            q = as_int("modulation.weights", q_raw)
            if q in weights:
                raise ConfigError(
                    f"{where('modulation.weights')}: duplicate harmonic q={q} in modulation.weights"
                )
            weights[q] = as_float("modulation.weights", w_raw)
        modulation = CustomModulation(weights=weights, Omega=big_omega, q_max=q_max)
    else:
        raise ConfigError(
            f"{where('modulation.kind')}: modulation.kind must be sinusoidal or custom, got {kind!r}"
        )

    # --- initial state ---
    initial = take("initial.state", "ground")
    if initial not in _INITIAL_PLAIN and not any(initial.startswith(p) for p in _INITIAL_PREFIXES):
        raise ConfigError(
            f"{where('initial.state')}: initial.state must be one of {_INITIAL_PLAIN} "
            f"or start with {_INITIAL_PREFIXES}, got {initial!r}"
        )

    # --- numerics ---
    overrides = {}
    for name in _NUMERICS_KEYS:
        raw = take(f"numerics.{name}")
        if raw is not None:
            overrides[name] = as_float(f"numerics.{name}", raw)
    numerics = NumericsSpec(**overrides) if overrides else NumericsSpec()

    unknown = sorted(set(pairs) - taken)
    if unknown:
        spots = ", ".join(f"{k} (line {pairs[k][1]})" for k in unknown)
        raise ConfigError(f"{source}: unknown keys: {spots}")

    return MachineConfig(
        system=system,
        bath_cold=bath_cold,
        bath_hot=bath_hot,
        modulation=modulation,
        initial_state=initial,
        numerics=numerics,
    )


def config_summary_lines(cfg: MachineConfig) -> list[str]:
    """Echo of the resolved configuration, for CSV/report headers."""
    sys_ = cfg.system
    lines = [
        f"system: n_levels={sys_.n_levels} omega0={sys_.omega0!r} "
        f"detunings={tuple(sys_.detunings)!r} regime={sys_.gram.regime()}",
        f"bath_cold: T={cfg.bath_cold.temperature!r} {cfg.bath_cold.shape}",
        f"bath_hot: T={cfg.bath_hot.temperature!r} {cfg.bath_hot.shape}",
    ]
    mod = cfg.modulation
    if isinstance(mod, SinusoidalModulation):
        lines.append(f"modulation: sinusoidal lambda={mod.lam!r} Omega={mod.Omega!r} q_max={mod.q_max}")
    else:
        pairs = " ".join(f"{q}:{w!r}" for q, w in sorted(mod.weights.items()))
        lines.append(f"modulation: custom Omega={mod.Omega!r} q_max={mod.q_max} weights={pairs}")
    if isinstance(cfg.initial_state, str):
        lines.append(f"initial: {cfg.initial_state}")
    else:
        lines.append("initial: <explicit density matrix>")
    return lines
