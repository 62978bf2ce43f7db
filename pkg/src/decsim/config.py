"""Flat key-value configuration: parsing, validation, serialization.

Format: one ``section.key = value`` per line, SI units, ``#`` comments and
blank lines ignored. The loader rejects unknown keys. Serializing uses
``repr`` for floats so a round-trip reproduces the values bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    JOINT_NAMES,
    SEGMENT_NAMES,
    BodyModel,
    JointParams,
    SegmentParams,
    default_body_model,
)

MODES = ("original", "distributed")

_SEGMENT_KEYS = ("mass", "length", "com_offset", "inertia")
_JOINT_KEYS = (
    "Kp",
    "Kd",
    "Ki",
    "passive_stiffness",
    "passive_damping",
    "G_servo",
    "G_g",
    "lumped_delay",
)
_SCENARIO_KEYS = (
    "mode",
    "duration",
    "dt",
    "log_rate",
    "T_e",
    "q0_ankle",
    "q0_knee",
    "q0_hip",
    "ref_ankle",
    "ref_knee",
    "ref_hip",
    "settling_band_deg",
    "energy_signed",
)


class ConfigError(ValueError):
    """Malformed configuration file, unknown key, or invalid value."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one simulation scenario."""

    body: BodyModel = field(default_factory=default_body_model)
    mode: str = "distributed"
    duration: float = 10.0
    dt: float = 1e-3
    log_rate: float = 100.0
    T_e: float = 0.05
    q0: tuple[float, float, float] = (0.1, -0.2, 0.15)
    references: tuple[float, float, float] = (0.0, 0.0, 0.0)  # ankle, knee, hip
    settling_band_deg: float = 0.5
    energy_signed: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.duration <= 0:
            raise ConfigError("duration must be > 0")
        if self.dt <= 0:
            raise ConfigError("dt must be > 0")
        if self.log_rate <= 0 or self.log_rate > 1.0 / self.dt + 1e-12:
            raise ConfigError("log_rate must be in (0, 1/dt]")
        if self.T_e <= self.dt:
            raise ConfigError("T_e must exceed dt")
        if len(self.q0) != 3 or len(self.references) != 3:
            raise ConfigError("q0 and references must have 3 entries")


def _valid_keys() -> set[str]:
    keys = {f"scenario.{k}" for k in _SCENARIO_KEYS}
    keys.add("world.gravity")
    for s in SEGMENT_NAMES:
        keys.update(f"{s}.{k}" for k in _SEGMENT_KEYS)
    for j in JOINT_NAMES:
        keys.update(f"{j}.{k}" for k in _JOINT_KEYS)
    return keys


VALID_KEYS = _valid_keys()


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat key-value lines into a dict; unknown keys are rejected."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in VALID_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value
    return out


def apply_overrides(raw: dict[str, str], overrides: list[str]) -> dict[str, str]:
    """Apply command-line ``section.key=value`` overrides on top of file values."""
    out = dict(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected section.key=value")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in VALID_KEYS:
            raise ConfigError(f"override: unknown key {key!r}")
        out[key] = value.strip()
    return out


def _get_float(raw: dict[str, str], key: str, default: float) -> float:
    if key not in raw:
        return default
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw[key]!r}") from None


def _get_bool(raw: dict[str, str], key: str, default: bool) -> bool:
    if key not in raw:
        return default
    v = raw[key].lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: not a boolean: {raw[key]!r}")


def build_scenario(raw: dict[str, str]) -> ScenarioConfig:
    """Materialize a ScenarioConfig from parsed keys over built-in defaults."""
    d = default_body_model()
    try:
        segments = tuple(
            SegmentParams(
                name=s.name,
                mass=_get_float(raw, f"{s.name}.mass", s.mass),
                length=_get_float(raw, f"{s.name}.length", s.length),
                com_offset=_get_float(raw, f"{s.name}.com_offset", s.com_offset),
                inertia=_get_float(raw, f"{s.name}.inertia", s.inertia),
            )
            for s in d.segments
        )
        joints = tuple(
            JointParams(
                name=j.name,
                **{k: _get_float(raw, f"{j.name}.{k}", getattr(j, k)) for k in _JOINT_KEYS},
            )
            for j in d.joints
        )
        body = BodyModel(
            segments=segments,
            joints=joints,
            gravity=_get_float(raw, "world.gravity", d.gravity),
        )
        defaults = ScenarioConfig.__dataclass_fields__
        return ScenarioConfig(
            body=body,
            mode=raw.get("scenario.mode", defaults["mode"].default),
            duration=_get_float(raw, "scenario.duration", defaults["duration"].default),
            dt=_get_float(raw, "scenario.dt", defaults["dt"].default),
            log_rate=_get_float(raw, "scenario.log_rate", defaults["log_rate"].default),
            T_e=_get_float(raw, "scenario.T_e", defaults["T_e"].default),
            q0=(
                _get_float(raw, "scenario.q0_ankle", 0.1),
                _get_float(raw, "scenario.q0_knee", -0.2),
                _get_float(raw, "scenario.q0_hip", 0.15),
            ),
            references=(
                _get_float(raw, "scenario.ref_ankle", 0.0),
                _get_float(raw, "scenario.ref_knee", 0.0),
                _get_float(raw, "scenario.ref_hip", 0.0),
            ),
            settling_band_deg=_get_float(
                raw, "scenario.settling_band_deg", defaults["settling_band_deg"].default
            ),
            energy_signed=_get_bool(raw, "scenario.energy_signed", False),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path=None, overrides: list[str] | None = None) -> ScenarioConfig:
    raw: dict[str, str] = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            raw = parse_config_text(fh.read())
    raw = apply_overrides(raw, overrides or [])
    return build_scenario(raw)


def serialize_config(cfg: ScenarioConfig) -> str:
    """Emit the full effective configuration, round-trippable bit-exactly."""
    lines = []
    lines.append(f"world.gravity = {cfg.body.gravity!r}")
    for s in cfg.body.segments:
        for k in _SEGMENT_KEYS:
            lines.append(f"{s.name}.{k} = {getattr(s, k)!r}")
    for j in cfg.body.joints:
        for k in _JOINT_KEYS:
            lines.append(f"{j.name}.{k} = {getattr(j, k)!r}")
    lines.append(f"scenario.mode = {cfg.mode}")
    for k in ("duration", "dt", "log_rate", "T_e"):
        lines.append(f"scenario.{k} = {getattr(cfg, k)!r}")
    for name, v in zip(("ankle", "knee", "hip"), cfg.q0):
        lines.append(f"scenario.q0_{name} = {v!r}")
    for name, v in zip(("ankle", "knee", "hip"), cfg.references):
        lines.append(f"scenario.ref_{name} = {v!r}")
    lines.append(f"scenario.settling_band_deg = {cfg.settling_band_deg!r}")
    lines.append(f"scenario.energy_signed = {str(cfg.energy_signed).lower()}")
    return "\n".join(lines) + "\n"
