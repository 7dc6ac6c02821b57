"""Flat ``key = value`` run configuration.

Example::

    # both couplings on, moderate drive
    scenario = nonlinear_dicke
    F = 0.5
    g1 = 0.1
    g2 = 0.1
    bath.beta = 1.0
    integrator.t_end = 100

    sweep.observable = steady_ergotropy
    sweep.g2 = 0:0.1:0.01        # start:stop:step, inclusive
    sweep.F = 0.5, 1.0, 1.5      # or an explicit list

Blank lines and ``#`` comments are ignored. Keys are case sensitive.
Sweep axes keep the order in which they appear.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Tuple

from .dynamics import IntegratorConfig
from .experiments import (
    STEADY_CFG,
    SWEEP_AXES,
    SWEEP_OBSERVABLES,
    SteadyCriteria,
    SweepSpec,
    inclusive_grid,
)
from .model import BathSpec, DriveConvention, ModelError, ModelParams, RateMode, Scenario


class ConfigError(ValueError):
    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _opt_float(text: str) -> Optional[float]:
    return None if text.lower() in ("none", "default") else float(text)


def _enum(cls):
    def parse(text):
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"expected one of {[m.value for m in cls]}, got {text!r}") from None
    return parse


_MODEL_KEYS = {
    "scenario": _enum(Scenario),
    "omega0": float,
    "F": float,
    "g1": float,
    "g2": float,
    "n_cavity": int,
    "omega_tilde0": float,
    "omega_tilde1": float,
    "rate_mode": _enum(RateMode),
    "rate_prefactor": _opt_float,
    "drive_convention": _enum(DriveConvention),
    "merge_degenerate": _bool,
}
_BATH_KEYS = {"bath.alpha": float, "bath.omega_max": float, "bath.beta": float}
_INTEGRATOR_KEYS = {
    "integrator.dt": float,
    "integrator.t_end": float,
    "integrator.record_stride": int,
    "integrator.hermitize_every": int,
}
_STEADY_KEYS = {"steady.tol_residual": float, "steady.tol_obs": float, "steady.window": float}
_OTHER_KEYS = {"output.path": str, "parallelism": int, "sweep.observable": str}


def parse_grid(text: str) -> Tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ValueError("range grids are written start:stop:step")
        return inclusive_grid(*parts)
    vals = tuple(float(p) for p in text.split(",") if p.strip())
    if not vals:
        raise ValueError("grid is empty")
    return vals


@dataclass
class RunConfig:
    params: ModelParams
    integrator: IntegratorConfig
    steady: SteadyCriteria = SteadyCriteria()
    sweep: Optional[SweepSpec] = None
    output_path: Optional[str] = None
    parallelism: Optional[int] = None
    # keys the user wrote; everything else in the header is a default
    explicit: Tuple[str, ...] = field(default_factory=tuple)


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration, filling defaults.

    Raises :class:`ConfigError` naming the offending key and line.
    """
    raw: Dict[str, Tuple[str, int]] = {}
    axes: List[Tuple[str, Tuple[float, ...]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(line).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError("missing key", line=lineno)
        if key in raw or any(key == f"sweep.{n}" for n, _ in axes):
            raise ConfigError("duplicate key", key, lineno)
        if key.startswith("sweep.") and key != "sweep.observable":
            axis = key[len("sweep."):]
            if axis not in SWEEP_AXES:
                raise ConfigError(f"unknown sweep axis; choose from {SWEEP_AXES}", key, lineno)
            try:
                axes.append((axis, parse_grid(value)))
            except ValueError as exc:
                raise ConfigError(str(exc), key, lineno) from None
            continue
        known = {**_MODEL_KEYS, **_BATH_KEYS, **_INTEGRATOR_KEYS, **_STEADY_KEYS, **_OTHER_KEYS}
        if key not in known:
            raise ConfigError("unknown key", key, lineno)
        raw[key] = (value, lineno)

    def get(table, key):
        value, lineno = raw[key]
        if value == "":
            raise ConfigError("empty value", key, lineno)
        try:
            return table[key](value)
        except ValueError as exc:
            raise ConfigError(str(exc), key, lineno) from None

    if "scenario" not in raw:
        raise ConfigError("scenario is required", "scenario")

    model_kw = {k: get(_MODEL_KEYS, k) for k in _MODEL_KEYS if k in raw}
    bath_kw = {k.split(".", 1)[1]: get(_BATH_KEYS, k) for k in _BATH_KEYS if k in raw}
    integ_kw = {k.split(".", 1)[1]: get(_INTEGRATOR_KEYS, k) for k in _INTEGRATOR_KEYS if k in raw}
    steady_kw = {k.split(".", 1)[1]: get(_STEADY_KEYS, k) for k in _STEADY_KEYS if k in raw}

    def build(cls, kw, prefix, **extra):
        try:
            return cls(**kw, **extra)
        except (ModelError, ValueError) as exc:
            key = _guess_key(str(exc), kw, prefix)
            raise ConfigError(str(exc), key, raw[key][1] if key in raw else None) from None

    bath = build(BathSpec, bath_kw, "bath.")
    params = build(ModelParams, model_kw, "", bath=bath)
    defaults = STEADY_CFG if axes else IntegratorConfig()
    integ_defaults = {f.name: getattr(defaults, f.name) for f in fields(IntegratorConfig)}
    integrator = build(IntegratorConfig, {**integ_defaults, **integ_kw}, "integrator.")
    steady = build(SteadyCriteria, steady_kw, "steady.")

    sweep = None
    if axes:
        observable = get(_OTHER_KEYS, "sweep.observable") if "sweep.observable" in raw else "steady_ergotropy"
        if observable not in SWEEP_OBSERVABLES:
            raise ConfigError(f"choose from {SWEEP_OBSERVABLES}", "sweep.observable",
                              raw["sweep.observable"][1])
        try:
            sweep = SweepSpec(params, tuple(axes), observable, integrator, steady)
            for _, point in sweep.points():
                params.with_(**point)
        except (ModelError, ValueError) as exc:
            raise ConfigError(str(exc), "sweep") from None
    elif "sweep.observable" in raw:
        raise ConfigError("sweep.observable given without any sweep axis", "sweep.observable",
                          raw["sweep.observable"][1])

    return RunConfig(
        params=params,
        integrator=integrator,
        steady=steady,
        sweep=sweep,
        output_path=get(_OTHER_KEYS, "output.path") if "output.path" in raw else None,
        parallelism=get(_OTHER_KEYS, "parallelism") if "parallelism" in raw else None,
        explicit=tuple(raw) + tuple(f"sweep.{n}" for n, _ in axes),
    )


def _guess_key(message: str, kw: dict, prefix: str) -> Optional[str]:
    for name in kw:
        if f"{name} " in message or f"{prefix}{name}" in message:
            return f"{prefix}{name}"
    return None
