"""Experiment configuration: a flat ``key = value`` file format with dotted keys.

Unknown keys are rejected and every diagnostic names the offending key.
All keys have defaults, so an empty file is a valid configuration. The
resolved configuration hashes to a stable digest recorded in every CSV.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from goc.noise import TRUNCATED_GAUSSIAN, UNIFORM, HonestNoiseModel, Scenario
from goc.utility import AD_PRODUCT, DC_LINEAR, LipschitzProfile, UtilitySpec


class ConfigError(ValueError):
    """Configuration problem; the message starts with the offending key."""


def _parse_bool(key: str, raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


# key -> (parser tag, default); None default means "unset"
_SCHEMA: dict[str, tuple[str, object]] = {
    "noise.kind": ("str", UNIFORM),
    "noise.sigma": ("float", None),
    "scenario.delta": ("float", 1.0),
    "scenario.big_m": ("float", 1e4),
    "utility.dc.kind": ("str", DC_LINEAR),
    "utility.dc.gamma": ("float", 0.3),
    "utility.ad.kind": ("str", AD_PRODUCT),
    "utility.ad.w_mse": ("float", 1.0),
    "utility.ad.w_pa": ("float", 1.0),
    "utility.ad.theta": ("float", 1.0),
    "learner.a": ("float", 2.0),
    "learner.b": ("float", 6.0),
    "learner.delta": ("float", 0.05),
    "learner.lambda": ("float", 0.1),
    "lipschitz.ell": ("float", None),
    "lipschitz.L": ("float", None),
    "lipschitz.d": ("float", None),
    "envelope.grid": ("int", 2001),
    "envelope.alpha_min": ("float", 1e-3),
    "estimator.resolution": ("int", 801),
    "env.mode": ("str", "bernoulli"),
    "env.samples_per_round": ("int", 1),
    "experiment.trials": ("int", 200),
    "experiment.base_seed": ("int", 42),
    "experiment.budget_scale": ("float", 1.0),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, fully resolved experiment configuration."""

    values: dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def scenario(self) -> Scenario:
        kind = self.values["noise.kind"]
        delta = self.values["scenario.delta"]
        sigma = self.values["noise.sigma"]
        noise = HonestNoiseModel(kind, delta, sigma if kind == TRUNCATED_GAUSSIAN else None)
        return Scenario(delta, self.values["scenario.big_m"], noise)

    def utility_spec(self) -> UtilitySpec:
        return UtilitySpec(
            dc_kind=self.values["utility.dc.kind"],
            dc_gamma=self.values["utility.dc.gamma"],
            ad_kind=self.values["utility.ad.kind"],
            ad_w_mse=self.values["utility.ad.w_mse"],
            ad_w_pa=self.values["utility.ad.w_pa"],
            ad_theta=self.values["utility.ad.theta"],
        )

    def lipschitz_override(self) -> LipschitzProfile | None:
        ell = self.values["lipschitz.ell"]
        big_l = self.values["lipschitz.L"]
        d = self.values["lipschitz.d"]
        if ell is None and big_l is None and d is None:
            return None
        if ell is None or big_l is None or d is None:
            raise ConfigError("lipschitz.ell: override requires all of ell, L, d")
        return LipschitzProfile(ell=ell, big_l=big_l, d=d)

    def with_overrides(self, **pairs) -> "ExperimentConfig":
        updated = dict(self.values)
        for key, value in pairs.items():
            if key not in _SCHEMA:
                raise ConfigError(f"{key}: unknown configuration key")
            updated[key] = value
        return validate_config(updated)

    def canonical_text(self) -> str:
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if value is None:
                continue
            lines.append(f"{key} = {value!r}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:12]


def parse_config_text(text: str) -> dict[str, str]:
    """Raw ``key = value`` pairs; '#' starts a comment, blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"{key}: duplicate key (line {lineno})")
        out[key] = raw
    return out


def validate_config(values: dict[str, object]) -> ExperimentConfig:
    """Check every invariant; diagnostics name the first offending key."""
    resolved: dict[str, object] = {}
    for key, (_, default) in _SCHEMA.items():
        resolved[key] = values.get(key, default)
    for key in values:
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown configuration key")

    kind = resolved["noise.kind"]
    if kind not in (UNIFORM, TRUNCATED_GAUSSIAN):
        raise ConfigError(f"noise.kind: unknown kind {kind!r}")
    if kind == TRUNCATED_GAUSSIAN:
        if resolved["noise.sigma"] is None or resolved["noise.sigma"] <= 0.0:
            raise ConfigError("noise.sigma: truncated_gaussian requires sigma > 0")
    elif resolved["noise.sigma"] is not None:
        raise ConfigError("noise.sigma: only meaningful for truncated_gaussian")
    if resolved["scenario.delta"] <= 0.0:
        raise ConfigError("scenario.delta: must be positive")
    if resolved["scenario.big_m"] <= 0.0:
        raise ConfigError("scenario.big_m: must be positive")

    cfg = ExperimentConfig(values=resolved)
    try:
        cfg.scenario()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        cfg.utility_spec()
    except ValueError as exc:
        first = "utility.dc.kind" if "collector" in str(exc) else "utility.ad.kind"
        raise ConfigError(f"{first}: {exc}") from None
    cfg.lipschitz_override()

    a, b = resolved["learner.a"], resolved["learner.b"]
    if not 2.0 <= a:
        raise ConfigError("learner.a: must be >= 2")
    if not a < b:
        raise ConfigError("learner.b: must exceed learner.a")
    if not 0.0 < resolved["learner.delta"] < 1.0:
        raise ConfigError("learner.delta: must lie in (0, 1)")
    if resolved["learner.lambda"] <= 0.0:
        raise ConfigError("learner.lambda: must be positive")
    if resolved["envelope.grid"] < 101:
        raise ConfigError("envelope.grid: must be >= 101")
    if not 0.0 < resolved["envelope.alpha_min"] < 1.0:
        raise ConfigError("envelope.alpha_min: must lie in (0, 1)")
    if resolved["estimator.resolution"] < 51:
        raise ConfigError("estimator.resolution: must be >= 51")
    if resolved["env.mode"] not in ("bernoulli", "physical"):
        raise ConfigError(f"env.mode: unknown mode {resolved['env.mode']!r}")
    if resolved["env.samples_per_round"] < 1:
        raise ConfigError("env.samples_per_round: must be >= 1")
    if resolved["experiment.trials"] < 1:
        raise ConfigError("experiment.trials: must be >= 1")
    if not 0.0 < resolved["experiment.budget_scale"] <= 1.0:
        raise ConfigError("experiment.budget_scale: must lie in (0, 1]")
    return cfg


def load_config_text(text: str) -> ExperimentConfig:
    raw = parse_config_text(text)
    typed: dict[str, object] = {}
    for key, value in raw.items():
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown configuration key")
        tag = _SCHEMA[key][0]
        if tag == "float":
            typed[key] = _parse_float(key, value)
        elif tag == "int":
            typed[key] = _parse_int(key, value)
        elif tag == "bool":
            typed[key] = _parse_bool(key, value)
        else:
            typed[key] = value
    return validate_config(typed)


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Load and validate a configuration file; ``None`` yields pure defaults."""
    if path is None:
        return validate_config({})
    return load_config_text(Path(path).read_text())


def default_config() -> ExperimentConfig:
    return validate_config({})
