"""Validated configuration types and the key = value config file format.

Everything is stored in SI units (J, W, m, s) with linear power ratios.
The file loader accepts a few unit-suffixed keys and converts them:

    ``<field>_db``   decibels  -> linear ratio   (theta, eta_l, eta_n)
    ``<field>_wh``   watt-hours -> joules        (b_max, e_l)
    ``<field>_min``  minutes   -> seconds        (t_ch)

Rotor blade-model parameters are optional and use ``rotor.<name>`` keys.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised for unparseable config files and invariant violations."""

    def __init__(self, message: str, *, field_name: str | None = None, line: int | None = None):
        self.field_name = field_name
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{field_name}: {message}", field_name=field_name)


def _positive(obj: Any, *names: str) -> None:
    for name in names:
        value = getattr(obj, name)
        _require(math.isfinite(value) and value > 0, name, f"must be > 0, got {value!r}")


@dataclass(frozen=True)
class RotorParams:
    """Rotary-wing blade model constants (all strictly positive)."""

    p_0: float
    p_i: float
    u_tip: float
    v_0: float
    d_0: float
    rho_air: float
    rotor_solidity_s: float
    rotor_area_A: float

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            _require(math.isfinite(value) and value >= 0, f"rotor.{f.name}",
                     f"must be >= 0, got {value!r}")


@dataclass(frozen=True)
class NetworkConfig:
    """Densities, capacity and geometry of the UAV / charging-station network."""

    lambda_c: float = 5e-7
    ratio: float = 10.0
    capacity_c: int = 3
    pv_fit_a: float = 3.5
    pv_fit_b: float = 3.5
    r_c: float = 120.0
    h: float = 60.0

    def __post_init__(self) -> None:
        _positive(self, "lambda_c", "ratio", "pv_fit_a", "pv_fit_b", "r_c", "h")
        _require(isinstance(self.capacity_c, int) and not isinstance(self.capacity_c, bool)
                 and self.capacity_c >= 1, "capacity_c",
                 f"must be an integer >= 1, got {self.capacity_c!r}")

    @property
    def lambda_u(self) -> float:
        return self.ratio * self.lambda_c


@dataclass(frozen=True)
class EnergyConfig:
    """Battery, power draw and timing constants."""

    b_max: float = 88.8 * 3600.0
    p_m: float = 161.8
    p_s: float = 177.5
    e_l: float = 2184.0
    v: float = 18.46
    a_ave: float = 3.24
    t_ch: float = 300.0
    rotor_params: RotorParams | None = None

    def __post_init__(self) -> None:
        _positive(self, "b_max", "p_m", "p_s", "v", "a_ave", "t_ch")
        _require(math.isfinite(self.e_l) and self.e_l >= 0, "e_l", f"must be >= 0, got {self.e_l!r}")
        _require(self.b_max > 2 * self.e_l, "b_max",
                 f"must exceed 2*e_l={2 * self.e_l!r} so that some service time exists")


@dataclass(frozen=True)
class ChannelConfig:
    """Air-to-ground and terrestrial link parameters."""

    env_A: float = 25.27
    env_B: float = 0.5
    eta_l: float = 1.0
    eta_n: float = 100.0
    alpha_l: float = 2.1
    alpha_n: float = 4.0
    alpha_t: float = 4.0
    m_l: int = 3
    m_n: int = 1
    rho_u: float = 0.2
    theta: float = 1.0
    sigma2: float = 1e-9

    def __post_init__(self) -> None:
        _positive(self, "env_A", "env_B", "eta_l", "eta_n", "rho_u", "theta")
        for name in ("alpha_l", "alpha_n", "alpha_t"):
            value = getattr(self, name)
            _require(math.isfinite(value) and value > 2, name, f"must be > 2, got {value!r}")
        for name in ("m_l", "m_n"):
            value = getattr(self, name)
            _require(isinstance(value, int) and not isinstance(value, bool) and value >= 1, name,
                     f"must be a positive integer, got {value!r}")
        _require(math.isfinite(self.sigma2) and self.sigma2 >= 0, "sigma2",
                 f"must be >= 0, got {self.sigma2!r}")


@dataclass(frozen=True)
class SystemConfig:
    """The three configuration groups bundled together.

    Attribute access falls through to the groups, so ``cfg.e_l`` and
    ``cfg.energy.e_l`` are the same value.
    """

    net: NetworkConfig = field(default_factory=NetworkConfig)
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)

    def __getattr__(self, name: str) -> Any:
        if name.startswith("_"):
            raise AttributeError(name)
        for group in ("net", "energy", "channel"):
            obj = object.__getattribute__(self, group)
            if hasattr(obj, name):
                return getattr(obj, name)
        raise AttributeError(f"no configuration field named {name!r}")

    def with_overrides(self, **overrides: Any) -> "SystemConfig":
        """Return a copy with flat field overrides, e.g. ``ratio=20, capacity_c=2``."""
        groups: dict[str, dict[str, Any]] = {"net": {}, "energy": {}, "channel": {}}
        for key, value in overrides.items():
            target = _FIELD_GROUP.get(key)
            if target is None:
                raise ConfigError(f"unknown field {key!r}", field_name=key)
            groups[target][key] = value
        return SystemConfig(
            net=dataclasses.replace(self.net, **groups["net"]),
            energy=dataclasses.replace(self.energy, **groups["energy"]),
            channel=dataclasses.replace(self.channel, **groups["channel"]),
        )

    def as_flat_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for group in (self.net, self.energy, self.channel):
            for f in fields(group):
                value = getattr(group, f.name)
                if isinstance(value, RotorParams):
                    for rf in fields(value):
                        out[f"rotor.{rf.name}"] = getattr(value, rf.name)
                elif value is not None:
                    out[f.name] = value
        return out


_GROUP_TYPES = {"net": NetworkConfig, "energy": EnergyConfig, "channel": ChannelConfig}
_FIELD_GROUP = {f.name: g for g, cls in _GROUP_TYPES.items() for f in fields(cls)}
_INT_FIELDS = {"capacity_c", "m_l", "m_n"}
_ROTOR_FIELDS = [f.name for f in fields(RotorParams)]
_SUFFIXES = {
    "_db": lambda x: 10.0 ** (x / 10.0),
    "_wh": lambda x: x * 3600.0,
    "_min": lambda x: x * 60.0,
}


def default_config() -> SystemConfig:
    """Table of reference parameters; ratio=10 and c=3 sit mid-range of the swept axes."""
    return SystemConfig()


def _parse_value(key: str, raw: str, line: int) -> float | int:
    try:
        if key in _INT_FIELDS:
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r} for {key}", field_name=key, line=line) from None


def parse_config(text: str) -> SystemConfig:
    """Parse config text (see module docstring) on top of the defaults."""
    values: dict[str, Any] = {}
    rotor: dict[str, float] = {}
    seen: dict[str, int] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        content = raw_line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"expected 'key = value', got {content!r}", line=lineno)
        key, raw = (part.strip() for part in content.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"expected 'key = value', got {content!r}", line=lineno)

        if key.startswith("rotor."):
            name = key[len("rotor."):]
            if name not in _ROTOR_FIELDS:
                raise ConfigError(f"unknown key {key!r}", field_name=key, line=lineno)
            target, value = key, _parse_value(key, raw, lineno)
            rotor[name] = float(value)
        else:
            base, convert = key, None
            if key not in _FIELD_GROUP:
                for suffix, fn in _SUFFIXES.items():
                    if key.endswith(suffix) and key[: -len(suffix)] in _FIELD_GROUP:
                        base, convert = key[: -len(suffix)], fn
                        break
                else:
                    raise ConfigError(f"unknown key {key!r}", field_name=key, line=lineno)
            if base in _INT_FIELDS and convert is not None:
                raise ConfigError(f"{base} does not take a unit suffix", field_name=key, line=lineno)
            value = _parse_value(base, raw, lineno)
            if convert is not None:
                value = convert(value)
            target = base
            values[base] = value

        if target in seen:
            raise ConfigError(f"{target} already set on line {seen[target]}", field_name=target, line=lineno)
        seen[target] = lineno

    if rotor:
        missing = [n for n in _ROTOR_FIELDS if n not in rotor]
        if missing:
            raise ConfigError(f"incomplete rotor parameters, missing {missing}", field_name="rotor_params")
        values["rotor_params"] = RotorParams(**rotor)
    return default_config().with_overrides(**values) if values else default_config()


def load_config(path: str | Path) -> SystemConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())


def format_config(cfg: SystemConfig) -> str:
    lines = ["# SI units: J, W, m, s; linear power ratios"]
    for key, value in cfg.as_flat_dict().items():
        lines.append(f"{key} = {value!r}")
    return "\n".join(lines) + "\n"


def save_config(cfg: SystemConfig, path: str | Path) -> None:
    Path(path).write_text(format_config(cfg))
