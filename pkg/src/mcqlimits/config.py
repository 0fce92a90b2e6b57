"""Scenario configuration files (JSON) with strict validation.

Unknown keys are rejected.  Squeezing is given as the natural-log
magnitude ``r``; a level of ``D`` dB corresponds to
``r = D * ln(10) / 20``.
"""

from __future__ import annotations

import difflib
import json
import math
from importlib import resources
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .sensor import C, HBAR

SWEEPABLE_FORMULAS = (
    "qcrb_general",
    "crb_homodyne_general",
    "crb_signal_quadrature",
    "qcrb_equal_squeezing",
    "crb_signal_equal_squeezing",
    "crb_signal_optimal_squeeze_angle",
    "qcrb_unsqueezed",
    "crb_signal_unsqueezed",
    "qcrb_lossless",
)

FormulaName = Literal[SWEEPABLE_FORMULAS]  # type: ignore[valid-type]

# common wrong spellings of a squeezing level
_HINTS = {
    "squeeze_db": "r",
    "squeezing_db": "r",
    "db": "r",
    "sqz_db": "r",
}


class ConfigError(ValueError):
    """A scenario file failed to parse or validate."""


def db_to_r(db: float) -> float:
    """Squeezing magnitude ``r`` for a noise reduction of ``db`` decibels."""
    return db * math.log(10) / 20


def r_to_db(r: float) -> float:
    return 10 * math.log10(math.exp(2 * r))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SensorSection(_Strict):
    m: float = Field(gt=0, description="test mass (kg)")
    L: float = Field(gt=0, description="arm length (m)")
    eta: float = Field(gt=0, le=1, description="detection transmittivity")
    resonance: Optional[float] = Field(default=None, gt=0, description="mechanical resonance (rad/s)")
    hbar: float = Field(default=HBAR, gt=0)
    c: float = Field(default=C, gt=0)


class CarrierSection(_Strict):
    I: float = Field(ge=0, description="circulating arm power (W)")
    omega: float = Field(gt=0, description="carrier angular frequency (rad/s)")
    gamma: float = Field(gt=0, description="cavity half-bandwidth (rad/s)")
    beta: float = 0.0
    r: float = Field(default=0.0, ge=0, description="squeezing magnitude (natural-log units)")
    phi: float = Field(default=0.0, description="squeezing angle (rad)")
    theta: float = Field(default=0.0, description="homodyne angle (rad)")


class SweepSection(_Strict):
    omega_min: float = Field(gt=0, description="rad/s")
    omega_max: float = Field(gt=0, description="rad/s")
    n_points: int = Field(ge=2)
    spacing: Literal["log", "linear"] = "log"

    @model_validator(mode="after")
    def _ordered(self):
        if not self.omega_min < self.omega_max:
            raise ValueError(f"omega_min ({self.omega_min}) must be below omega_max ({self.omega_max})")
        return self


class BoundSpec(_Strict):
    """One output column.  ``eta``, ``r`` and ``phi`` override the scenario for this column only."""

    formula: FormulaName
    name: Optional[str] = None
    eta: Optional[float] = Field(default=None, gt=0, le=1)
    r: Optional[float] = Field(default=None, ge=0)
    phi: Optional[float] = None

    @property
    def column(self) -> str:
        return self.name or self.formula


class OutputSection(_Strict):
    path: Optional[str] = None
    format: Literal["csv", "json-lines"] = "csv"
    convention: Literal["variance", "psd", "amplitude"] = "variance"


class ScenarioConfig(_Strict):
    sensor: SensorSection
    carriers: List[CarrierSection] = Field(min_length=1)
    coupling_model: Literal["tuned", "resonant"] = "tuned"
    sweep: SweepSection
    bounds: List[Union[BoundSpec, FormulaName]] = Field(min_length=1)  # type: ignore[valid-type]
    output: OutputSection = OutputSection()
    omega: Optional[float] = Field(default=None, gt=0, description="designated frequency for optimum reports (rad/s)")

    @field_validator("bounds", mode="after")
    @classmethod
    def _normalise_bounds(cls, value):
        specs = [BoundSpec(formula=v) if isinstance(v, str) else v for v in value]
        names = [s.column for s in specs]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValueError(f"duplicate output column(s) {dupes}; give each a distinct 'name'")
        if set(names) & {"omega", "kappa_tot", "h_sql", "diagnostic"}:
            raise ValueError("bound names may not reuse the reserved columns omega/kappa_tot/h_sql/diagnostic")
        return specs

    @model_validator(mode="after")
    def _resonance_needs_model(self):
        if self.coupling_model == "tuned" and self.sensor.resonance is not None:
            raise ValueError("sensor.resonance is only used by coupling_model 'resonant'")
        return self

    def bound_specs(self) -> List[BoundSpec]:
        return list(self.bounds)  # normalised by the validator


def _model_for(loc) -> Optional[type]:
    model: type = ScenarioConfig
    for part in loc[:-1]:
        if isinstance(part, int):
            continue
        field = model.model_fields.get(part)
        if field is None:
            return None
        ann = field.annotation
        candidates = [ann, *getattr(ann, "__args__", ())]
        for inner in list(candidates):
            candidates.extend(getattr(inner, "__args__", ()))
        nxt = next((c for c in candidates if isinstance(c, type) and issubclass(c, BaseModel)), None)
        if nxt is None:
            return None
        model = nxt
    return model


def _describe(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = tuple(p for p in err["loc"] if not (isinstance(p, str) and (p.startswith("function-") or p in SWEEPABLE_FORMULAS or p == "BoundSpec")))
        path = ".".join(str(p) for p in loc) or "<root>"
        msg = err["msg"]
        if err["type"] == "extra_forbidden":
            key = str(loc[-1])
            model = _model_for(loc)
            known = list(model.model_fields) if model else []
            hint = _HINTS.get(key.lower())
            if hint:
                msg += f"; did you mean {hint!r}? (squeezing is the natural-log magnitude r = dB * ln(10) / 20)"
            else:
                close = difflib.get_close_matches(key, known, n=1)
                if close:
                    msg += f"; did you mean {close[0]!r}?"
        lines.append(f"{path}: {msg}")
    return "\n".join(dict.fromkeys(lines))


def parse_config(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from None


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno}, column {exc.colno})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return parse_config(data)


def preset_path(name: str) -> Path:
    ref = resources.files("mcqlimits") / "presets" / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"no preset named {name!r}")
    return Path(str(ref))


def load_preset(name: str) -> ScenarioConfig:
    return load_config(preset_path(name))


def json_schema() -> dict:
    return ScenarioConfig.model_json_schema()
