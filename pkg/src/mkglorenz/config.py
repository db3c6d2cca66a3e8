"""Scenario configuration: a flat ``key = value`` text format.

Example::

    # moving lump, one unit of time
    grid.n = 32
    physics.m = 1.0
    time.dt = 0.001
    time.T = 1.0
    time.cadence = 10
    data.preset = gaussian_pulse
    data.amplitude = 4
    data.momentum = 1, 0, 0
    solver.regauge_at = 0.5
    output.csv = run.csv

Keys are dotted section names; there is no nesting. ``#`` starts a
comment. Every key has a typed default, unknown keys are errors, and the
first malformed line is reported by number.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

from .dynamics import FORMS
from .errors import ConfigParseError, ConfigurationError
from .grid import make_grid

__all__ = ["ScenarioConfig", "parse_config", "load_config", "PRESET_PARAMETERS", "SNAPSHOT_PRESET"]

SNAPSHOT_PRESET = "from_snapshot"


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _float_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.replace(",", " ").split())


def _triple(cast: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        parts = text.replace(",", " ").split()
        if len(parts) != 3:
            raise ValueError(f"expected three components, got {len(parts)}")
        return tuple(cast(p) for p in parts)

    return parse


def _optional_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none", "default") else float(text)


# Preset parameters: name -> (parser, validity check, description of the range)
PRESET_PARAMETERS: dict[str, tuple[Callable[[str], Any], Callable[[Any], bool], str]] = {
    "amplitude": (float, lambda v: math.isfinite(v) and v >= 0, "amplitude >= 0"),
    "kappa": (float, lambda v: math.isfinite(v) and v > 0, "kappa > 0"),
    "kcut": (_int, lambda v: v >= 0, "kcut >= 0"),
    "momentum": (_triple(_int), lambda v: True, "three integers"),
    "velocity": (_triple(float), lambda v: all(map(math.isfinite, v)), "three finite numbers"),
    "speed": (float, lambda v: math.isfinite(v), "finite number"),
    "omega": (float, lambda v: math.isfinite(v), "finite number"),
    "field_amplitude": (float, lambda v: math.isfinite(v), "finite number"),
    "separation": (_optional_float, lambda v: v is None or v > 0, "separation > 0"),
    "imbalance": (float, lambda v: math.isfinite(v), "finite number"),
}

# Parameters accepted by each preset (the config key ``data.speed`` maps to
# the scalar ``velocity`` argument of ``decoupled_real``).
_PRESET_KEYS = {
    "decoupled_real": ("amplitude", "kappa", "kcut", "speed"),
    "gaussian_pulse": ("amplitude", "kappa", "kcut", "momentum", "velocity", "omega", "field_amplitude"),
    "neutral_pair": ("amplitude", "kappa", "kcut", "momentum", "omega", "separation", "imbalance"),
    SNAPSHOT_PRESET: (),
}


@dataclass
class ScenarioConfig:
    """Complete description of one run.

    Attributes
    ----------
    n, L : grid size and box period (``grid.n``, ``grid.L``).
    m : mass (``physics.m``), ``m > 0``.
    dt, T, cadence : step size, final time and diagnostics cadence in steps
        (``time.*``).
    preset : initial data (``data.preset``): ``decoupled_real``,
        ``gaussian_pulse``, ``neutral_pair`` or ``from_snapshot``.
    preset_params : preset parameters (``data.<name>``).
    snapshot_in : snapshot to resume from (``data.path``).
    nonlinearity_form, regauge_at : solver options (``solver.*``).
    csv : diagnostics CSV path (``output.csv``).
    snapshot_cadence : steps between snapshots, 0 for final only
        (``output.snapshot_cadence``).
    snapshot_out : snapshot path, may contain ``{step}`` (``output.snapshot``).
    plots : render PNG figures beside the CSV (``output.plots``).
    seed : seed recorded with the run (``seed``).
    """

    n: int = 16
    L: float = 2 * math.pi
    m: float = 1.0
    dt: float = 0.01
    T: float = 1.0
    cadence: int = 1
    preset: str = "gaussian_pulse"
    preset_params: dict = field(default_factory=dict)
    snapshot_in: str | None = None
    nonlinearity_form: str = "decomposed"
    regauge_at: tuple = ()
    csv: str = "diagnostics.csv"
    snapshot_cadence: int = 0
    snapshot_out: str | None = None
    plots: bool = True
    seed: int = 0

    def validate(self) -> None:
        """Check ranges and paths.

        Raises
        ------
        ConfigurationError
            Naming the offending field.
        """
        make_grid(self.n, self.L)
        if not (math.isfinite(self.m) and self.m > 0):
            raise ConfigurationError("physics.m must be positive")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError("time.dt must be positive")
        if not (math.isfinite(self.T) and self.T >= 0):
            raise ConfigurationError("time.T must be non-negative")
        if self.T > 0 and self.dt > self.T:
            raise ConfigurationError("time.dt must not exceed time.T")
        if self.cadence < 1:
            raise ConfigurationError("time.cadence must be a positive integer")
        if self.snapshot_cadence < 0:
            raise ConfigurationError("output.snapshot_cadence must be non-negative")
        if self.preset not in _PRESET_KEYS:
            raise ConfigurationError(f"data.preset must be one of {sorted(_PRESET_KEYS)}, got {self.preset!r}")
        if self.preset == SNAPSHOT_PRESET and not self.snapshot_in:
            raise ConfigurationError("data.path is required with data.preset = from_snapshot")
        allowed = _PRESET_KEYS[self.preset]
        for key, value in self.preset_params.items():
            if key not in allowed:
                raise ConfigurationError(f"data.{key} is not a parameter of preset {self.preset!r}")
            _, ok, description = PRESET_PARAMETERS[key]
            if not ok(value):
                raise ConfigurationError(f"data.{key} out of range ({description})")
        if self.nonlinearity_form not in FORMS:
            raise ConfigurationError(f"solver.nonlinearity_form must be one of {FORMS}")
        if any(not (0 < t) for t in self.regauge_at):
            raise ConfigurationError("solver.regauge_at times must be positive")
        outputs = [self.csv] + ([self.snapshot_out] if self.snapshot_out else [])
        for path in outputs:
            parent = Path(path).resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ConfigurationError(f"output directory not writable: {parent}")

    def preset_kwargs(self) -> dict:
        """Keyword arguments for the preset factory."""
        kwargs = dict(self.preset_params)
        if "speed" in kwargs:
            kwargs["velocity"] = kwargs.pop("speed")
        return kwargs

    def to_text(self) -> str:
        """Serialize back to the ``key = value`` format."""
        lines = [
            f"grid.n = {self.n}",
            f"grid.L = {self.L!r}",
            f"physics.m = {self.m!r}",
            f"time.dt = {self.dt!r}",
            f"time.T = {self.T!r}",
            f"time.cadence = {self.cadence}",
            f"data.preset = {self.preset}",
        ]
        if self.snapshot_in:
            lines.append(f"data.path = {self.snapshot_in}")
        for key, value in self.preset_params.items():
            text = ", ".join(str(v) for v in value) if isinstance(value, tuple) else str(value)
            lines.append(f"data.{key} = {text}")
        lines += [
            f"solver.nonlinearity_form = {self.nonlinearity_form}",
            f"solver.regauge_at = {', '.join(repr(t) for t in self.regauge_at)}",
            f"output.csv = {self.csv}",
            f"output.snapshot_cadence = {self.snapshot_cadence}",
            f"output.plots = {str(self.plots).lower()}",
            f"seed = {self.seed}",
        ]
        if self.snapshot_out:
            lines.append(f"output.snapshot = {self.snapshot_out}")
        return "\n".join(lines) + "\n"


_FIELDS: dict[str, tuple[str, Callable[[str], Any]]] = {
    "grid.n": ("n", _int),
    "grid.L": ("L", float),
    "physics.m": ("m", float),
    "time.dt": ("dt", float),
    "time.T": ("T", float),
    "time.cadence": ("cadence", _int),
    "data.preset": ("preset", str.strip),
    "data.path": ("snapshot_in", str.strip),
    "solver.nonlinearity_form": ("nonlinearity_form", str.strip),
    "solver.regauge_at": ("regauge_at", _float_list),
    "output.csv": ("csv", str.strip),
    "output.snapshot_cadence": ("snapshot_cadence", _int),
    "output.snapshot": ("snapshot_out", str.strip),
    "output.plots": ("plots", _bool),
    "seed": ("seed", _int),
}


def parse_config(text: str, base_dir: str | Path | None = None, validate: bool = True) -> ScenarioConfig:
    """Parse configuration text.

    Parameters
    ----------
    text : str
        ``key = value`` lines.
    base_dir : path, optional
        Relative paths (``output.*``, ``data.path``) are resolved against it.
    validate : bool
        Run :meth:`ScenarioConfig.validate` after parsing.

    Raises
    ------
    ConfigParseError
        Malformed line, unknown key, duplicate key or unparsable value.
    ConfigurationError
        Values out of range (when ``validate``).
    """
    cfg = ScenarioConfig()
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError("expected 'key = value'", lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ConfigParseError("missing key", lineno)
        if key in seen:
            raise ConfigParseError("duplicate key", lineno, key)
        seen.add(key)
        if key in _FIELDS:
            attr, cast = _FIELDS[key]
        elif key.startswith("data.") and key[5:] in PRESET_PARAMETERS:
            attr, cast = None, PRESET_PARAMETERS[key[5:]][0]
        else:
            raise ConfigParseError("unknown key", lineno, key)
        try:
            parsed = cast(value)
        except (ValueError, TypeError) as exc:
            raise ConfigParseError(f"bad value {value!r} ({exc})", lineno, key) from None
        if attr is None:
            cfg.preset_params[key[5:]] = parsed
        else:
            setattr(cfg, attr, parsed)
    if base_dir is not None:
        base = Path(base_dir)
        for attr in ("csv", "snapshot_out", "snapshot_in"):
            value = getattr(cfg, attr)
            if value and not Path(value).is_absolute():
                setattr(cfg, attr, str(base / value))
    if validate:
        cfg.validate()
    return cfg


def load_config(path: str | Path, validate: bool = True) -> ScenarioConfig:
    """Read a configuration file; relative paths resolve beside it."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent, validate=validate)


def config_fields() -> list[str]:
    """Names of all dataclass fields (for documentation and tests)."""
    return [f.name for f in fields(ScenarioConfig)]
