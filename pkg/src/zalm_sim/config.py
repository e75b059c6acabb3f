"""Simulation configuration: defaults, dotted-key overrides, validation."""

from __future__ import annotations

import dataclasses
import functools
import hashlib
import json
import typing
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

import yaml

from .detection_heralding import DetectorConfig, DetectorType
from .feed_forward import FiberConfig, NoiseConfig
from .interferometer import BsConfig, PbsConfig
from .photon_source import SeparationMode, SpdcConfig
from .spectral_filtering import BAND_EDGES_THZ, DwdmConfig, FilterModel


class SimMode(str, Enum):
    IDEAL = "IDEAL"
    REALISTIC = "REALISTIC"


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class SimConfig:
    sim_mode: SimMode = SimMode.REALISTIC
    spdc: SpdcConfig = field(default_factory=SpdcConfig)
    bs: BsConfig = field(default_factory=BsConfig)
    pbs: PbsConfig = field(default_factory=PbsConfig)
    dwdm: DwdmConfig = field(default_factory=DwdmConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    fiber: FiberConfig = field(default_factory=FiberConfig)
    n_trials: int = 10_000
    seed: int = 0


SECTIONS = ("spdc", "bs", "pbs", "dwdm", "detector", "noise", "fiber")

# Upper-case parameter names from the published configuration tables.
PARAMETER_ALIASES = {
    "SIM_MODE": "sim_mode",
    "SPDC_PUMP_WAVELENGTH_NM": "spdc.pump_wavelength_nm",
    "SPDC_DEGENERACY_BANDWIDTH_FWHM_NM": "spdc.degeneracy_bandwidth_fwhm_nm",
    "TEMPORAL_JITTER_STDEV_PS": "spdc.temporal_jitter_stdev_ps",
    "EMISSION_SUCCESS_PROBABILITY": "spdc.emission_success_probability",
    "PHOTON_FWHM_GHZ": "spdc.photon_fwhm_GHz",
    "SPDC_MODE": "spdc.separation_mode",
    "DM_INSERTION_LOSS_DB": "spdc.dm_insertion_loss_db",
    "DM_CROSSTALK_PROBABILITY": "spdc.dm_crosstalk_probability",
    "BEAMSPLITTER_HOM_THRESHOLD": "bs.hom_threshold",
    "BEAMSPLITTER_INSERTION_LOSS_DB": "bs.insertion_loss_db",
    "PBS_EXTINCTION_RATIO": "pbs.extinction_ratio",
    "PBS_INSERTION_LOSS_DB": "pbs.insertion_loss_db",
    "ENABLED_BAND": "dwdm.enabled_bands",
    "GRID_GRANULARITY_GHZ": "dwdm.grid_granularity_GHz",
    "FILTER_PASSBAND_FRACTION": "dwdm.filter_passband_fraction",
    "EFFECTIVE_FILTER_BANDWIDTH_GHZ": "dwdm.effective_filter_bandwidth_GHz",
    "DWDM_FILTER_INSERTION_LOSS_DB": "dwdm.insertion_loss_db",
    "FILTER_MODEL": "dwdm.filter_model",
    "DETECTOR_EFFICIENCY": "detector.efficiency",
    "DETECTOR_TYPE": "detector.detector_type",
    "GATE_ERROR_PROB_SINGLE_QUBIT": "noise.gate_error_prob_single",
    "GATE_ERROR_PROB_TWO_QUBIT": "noise.gate_error_prob_two",
    "MEASUREMENT_DEPHASE_PROB": "noise.measurement_dephase_prob",
    "MEMORY_DEPOLAR_RATE": "noise.memory_depolar_rate_hz",
    "INTERNODE_LENGTH": "fiber.internode_length_km",
}

_PROBABILITIES = {
    "spdc.emission_success_probability", "spdc.dm_crosstalk_probability",
    "bs.hom_threshold", "pbs.extinction_ratio", "detector.efficiency",
    "noise.gate_error_prob_single", "noise.gate_error_prob_two",
    "noise.measurement_dephase_prob", "fiber.depolar_prob_per_km",
}
_POSITIVE = {
    "spdc.pump_wavelength_nm", "spdc.degeneracy_bandwidth_fwhm_nm", "spdc.photon_fwhm_GHz",
    "dwdm.grid_granularity_GHz", "dwdm.effective_filter_bandwidth_GHz", "fiber.refractive_index",
}
_NON_NEGATIVE = {
    "spdc.temporal_jitter_stdev_ps", "spdc.dm_insertion_loss_db", "bs.insertion_loss_db",
    "pbs.insertion_loss_db", "dwdm.insertion_loss_db", "noise.memory_depolar_rate_hz",
    "noise.delay_line_ns", "fiber.internode_length_km", "fiber.attenuation_db_per_km",
}


@functools.lru_cache(maxsize=None)
def _hints(cls) -> dict:
    return typing.get_type_hints(cls)


def _section_cls(section: str):
    return _hints(SimConfig)[section]


def field_type(key: str):
    parts = key.split(".")
    if len(parts) == 1:
        hints = _hints(SimConfig)
        if parts[0] not in hints or parts[0] in SECTIONS:
            raise ConfigError(key, "unknown configuration key")
        return hints[parts[0]]
    if len(parts) == 2 and parts[0] in SECTIONS:
        hints = _hints(_section_cls(parts[0]))
        if parts[1] in hints:
            return hints[parts[1]]
    raise ConfigError(key, "unknown configuration key")


def canonical_key(key: str) -> str:
    key = key.strip()
    key = PARAMETER_ALIASES.get(key, key)
    field_type(key)
    return key


def coerce(key: str, value: Any):
    """Convert a raw (often string) value to the declared type of ``key``."""
    typ = field_type(key)
    try:
        if isinstance(typ, type) and issubclass(typ, Enum):
            return typ(value.upper() if isinstance(value, str) else value)
        if typ is bool:
            if isinstance(value, str):
                low = value.strip().lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            if not isinstance(value, (bool, int)):
                raise ValueError(value)
            return bool(value)
        if typ is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            if isinstance(value, bool):
                raise ValueError(value)
            return int(value)
        if typ is float:
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        if typ is tuple:
            if isinstance(value, str):
                value = value.strip().strip("[]()").split(",")
            items = tuple(str(v).strip().strip("'\"").upper() for v in value)
            return tuple(v for v in items if v)
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot interpret {value!r} as {getattr(typ, '__name__', typ)}") from None
    raise ConfigError(key, f"unsupported field type {typ}")


def to_flat(cfg: SimConfig) -> dict:
    """Dotted-key dictionary of plain JSON values."""
    out = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if f.name in SECTIONS:
            for g in dataclasses.fields(value):
                out[f"{f.name}.{g.name}"] = _plain(getattr(value, g.name))
        else:
            out[f.name] = _plain(value)
    return out


def _plain(v):
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, tuple):
        return list(v)
    return v


def with_overrides(cfg: SimConfig, overrides: Mapping[str, Any]) -> SimConfig:
    """Return ``cfg`` with dotted-key overrides applied (not validated)."""
    sections = {s: {} for s in SECTIONS}
    top = {}
    for raw_key, raw_value in overrides.items():
        key = canonical_key(raw_key)
        value = coerce(key, raw_value)
        if "." in key:
            sec, name = key.split(".")
            sections[sec][name] = value
        else:
            top[key] = value
    for sec, vals in sections.items():
        if vals:
            top[sec] = replace(getattr(cfg, sec), **vals)
    return replace(cfg, **top)


def validate(cfg: SimConfig) -> SimConfig:
    flat = to_flat(cfg)
    for key in _PROBABILITIES:
        if not 0.0 <= flat[key] <= 1.0:
            raise ConfigError(key, f"must lie in [0, 1], got {flat[key]}")
    for key in _POSITIVE:
        if not flat[key] > 0:
            raise ConfigError(key, f"must be positive, got {flat[key]}")
    for key in _NON_NEGATIVE:
        if not flat[key] >= 0:
            raise ConfigError(key, f"must be non-negative, got {flat[key]}")
    frac = flat["dwdm.filter_passband_fraction"]
    if not 0.0 < frac <= 1.0:
        raise ConfigError("dwdm.filter_passband_fraction", f"must lie in (0, 1], got {frac}")
    bands = flat["dwdm.enabled_bands"]
    if not bands:
        raise ConfigError("dwdm.enabled_bands", "at least one band must be enabled")
    bad = [b for b in bands if b not in BAND_EDGES_THZ]
    if bad:
        raise ConfigError("dwdm.enabled_bands", f"unknown band(s) {bad}")
    if flat["n_trials"] < 1:
        raise ConfigError("n_trials", f"must be at least 1, got {flat['n_trials']}")
    if flat["seed"] < 0:
        raise ConfigError("seed", f"must be non-negative, got {flat['seed']}")
    expected = frac * flat["dwdm.grid_granularity_GHz"]
    if abs(flat["dwdm.effective_filter_bandwidth_GHz"] - expected) > 1e-9 * max(1.0, expected):
        warnings.warn(
            f"dwdm.effective_filter_bandwidth_GHz={flat['dwdm.effective_filter_bandwidth_GHz']} "
            f"differs from passband_fraction x granularity = {expected}",
            stacklevel=2,
        )
    return cfg


_IDEAL = {
    "spdc.emission_success_probability": 1.0,
    "spdc.temporal_jitter_stdev_ps": 0.0,
    "spdc.dm_insertion_loss_db": 0.0,
    "spdc.dm_crosstalk_probability": 0.0,
    "bs.insertion_loss_db": 0.0,
    "pbs.extinction_ratio": 0.0,
    "pbs.insertion_loss_db": 0.0,
    "dwdm.insertion_loss_db": 0.0,
    "detector.efficiency": 1.0,
    "noise.gate_error_prob_single": 0.0,
    "noise.gate_error_prob_two": 0.0,
    "noise.measurement_dephase_prob": 0.0,
    "noise.memory_depolar_rate_hz": 0.0,
    "fiber.depolar_prob_per_km": 0.0,
}


@functools.lru_cache(maxsize=64)
def apply_mode(cfg: SimConfig) -> SimConfig:
    """IDEAL mode zeroes every loss and noise source except fibre attenuation."""
    if SimMode(cfg.sim_mode) is SimMode.IDEAL:
        return with_overrides(cfg, _IDEAL)
    return cfg


def _read_file(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
    else:
        data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError(str(path), "config file must hold a key-value mapping")
    return data


def parse_assignment(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(item, "override must look like key=value")
    key, value = item.split("=", 1)
    return key.strip(), value.strip()


def load_config(file_path: Optional[str | Path] = None, overrides: Iterable[str] | Mapping = ()) -> SimConfig:
    """Defaults, then the file (flat dotted keys, JSON or YAML), then overrides."""
    cfg = SimConfig()
    if file_path is not None:
        cfg = with_overrides(cfg, _read_file(Path(file_path)))
    if not isinstance(overrides, Mapping):
        overrides = dict(parse_assignment(o) for o in overrides)
    cfg = with_overrides(cfg, overrides)
    return apply_mode(validate(cfg))


def dump_config(cfg: SimConfig) -> str:
    return json.dumps(to_flat(cfg), indent=2, sort_keys=True)


def config_hash(cfg: SimConfig) -> str:
    blob = json.dumps(to_flat(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
