from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar

import yaml

from .errors import ConfigurationError
from .models import (
    AppConfig,
    DistributionSettings,
    LoggingSettings,
    MultigridSettings,
    OracleSettings,
    OutputSettings,
    QuadratureSettings,
    VerifySettings,
)

T = TypeVar("T")

SECTIONS = {
    "logging": LoggingSettings,
    "oracle": OracleSettings,
    "verify": VerifySettings,
    "quadrature": QuadratureSettings,
    "distribution": DistributionSettings,
    "multigrid": MultigridSettings,
    "output": OutputSettings,
}

POSITIVE = {
    "oracle": ("tolerance", "max_sweeps", "max_dim"),
    "verify": ("max_n", "closed_form_max_n", "seeds_per_case", "tolerance", "identity_tolerance", "workers"),
    "quadrature": ("initial_points", "max_points", "tolerance", "max_total_points", "initial_points_per_level"),
    "distribution": ("threshold",),
    "multigrid": ("psd_tolerance", "structure_tolerance", "alternative_alpha"),
}


def default_config_path() -> Path:
    return Path(__file__).resolve().parent.parent / "config" / "default_config.yaml"


def _coerce(section: str, cls: Type[T], raw: Any) -> T:
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config section '{section}' must be a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigurationError(f"unknown keys in '{section}': {', '.join(sorted(unknown))}")
    defaults = cls()
    values: Dict[str, Any] = {}
    for name in known:
        default = getattr(defaults, name)
        value = raw.get(name, default)
        try:
            if isinstance(default, bool):
                value = bool(value)
            elif isinstance(default, int):
                value = int(value)
            elif isinstance(default, float):
                value = float(value)
            elif isinstance(default, str):
                value = str(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{section}.{name}: cannot read {value!r}") from None
        values[name] = value
    return cls(**values)


def _validate(config: AppConfig) -> None:
    for section, names in POSITIVE.items():
        settings = getattr(config, section)
        for name in names:
            if getattr(settings, name) <= 0:
                raise ConfigurationError(f"{section}.{name} must be positive, got {getattr(settings, name)}")
    if config.oracle.method not in ("jacobi", "lapack"):
        raise ConfigurationError(f"oracle.method must be jacobi or lapack, got {config.oracle.method!r}")
    if config.distribution.oracle_method not in ("jacobi", "lapack"):
        raise ConfigurationError(
            f"distribution.oracle_method must be jacobi or lapack, got {config.distribution.oracle_method!r}"
        )
    if config.verify.max_n < 2 or config.verify.max_alpha < 0:
        raise ConfigurationError("verify.max_n must be >= 2 and verify.max_alpha >= 0")
    if config.quadrature.max_points < config.quadrature.initial_points:
        raise ConfigurationError("quadrature.max_points must be at least quadrature.initial_points")
    if not isinstance(config.distribution.test_functions, list):
        raise ConfigurationError("distribution.test_functions must be a list of mappings")
    try:
        format(1.0, config.output.float_format)
    except ValueError:
        raise ConfigurationError(f"output.float_format {config.output.float_format!r} is not a float format") from None


def load_config(path: Optional[Path] = None) -> AppConfig:
    path = Path(path) if path is not None else default_config_path()
    try:
        with path.open("r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid YAML in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} must be a mapping at the top level")

    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown config sections: {', '.join(sorted(unknown))}")
    config = AppConfig(**{name: _coerce(name, cls, raw.get(name)) for name, cls in SECTIONS.items()})
    _validate(config)
    return config
