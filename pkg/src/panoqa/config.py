"""Run configuration: every tunable, canonical text, fingerprints.

PipelineConfig holds the parameters that change extracted features;
its fingerprint keys the on-disk feature cache. RunConfig adds the
training/evaluation knobs on top. The canonical text form doubles as
the config-file format the CLI reads (one "key = value" per line) and
as the sidecar the CLI writes next to every artifact.
"""

import hashlib
from dataclasses import dataclass, fields, replace

from .errors import ValidationError
from .nss import MscnConfig, ZcaConfig
from .regression import SvrParams
from .viewport import ViewportSamplingConfig


def _format_value(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse_value(field_type, text, key):
    text = text.strip()
    if field_type is bool:
        if text in ("true", "false"):
            return text == "true"
        raise ValidationError(f"config key {key}: expected true/false, got {text!r}")
    if text == "none":
        return None
    try:
        if field_type is int:
            return int(text)
        return float(text)
    except ValueError:
        raise ValidationError(f"config key {key}: invalid value {text!r}") from None


def _canonical_text(obj):
    lines = []
    for f in fields(obj):
        lines.append(f"{f.name} = {_format_value(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PipelineConfig:
    """Everything that affects the feature values of one image."""

    levels: int = 1
    equator_count: int = 8
    fov: float = 90.0
    viewport_size: int = 256
    zca_enabled: bool = True
    zca_patch: int = 5
    zca_epsilon: float = 1e-4
    mscn_radius: int = 3
    mscn_sigma: float = 7.0 / 6.0
    mscn_c: float = 1.0

    def __post_init__(self):
        # delegate range checks to the component configs
        self.zca_config_unconditional()
        self.mscn_config()
        self.sampling_config()
        if self.levels not in (1, 2, 3):
            raise ValidationError(f"levels must be 1, 2, or 3, got {self.levels}")

    @property
    def feature_dim(self):
        return 4 * self.levels + 72

    def zca_config_unconditional(self):
        return ZcaConfig(patch_size=self.zca_patch, epsilon=self.zca_epsilon)

    def zca_config(self):
        return self.zca_config_unconditional() if self.zca_enabled else None

    def mscn_config(self):
        return MscnConfig(window_radius=self.mscn_radius, sigma=self.mscn_sigma,
                          c=self.mscn_c)

    def sampling_config(self):
        return ViewportSamplingConfig(equator_count=self.equator_count,
                                      fov=self.fov, size=self.viewport_size)

    def canonical_text(self):
        return _canonical_text(self)

    def fingerprint(self):
        """Hex digest keying the feature cache."""
        return hashlib.sha256(self.canonical_text().encode("ascii")).hexdigest()


@dataclass(frozen=True)
class RunConfig:
    """Pipeline settings plus training and trial-protocol settings."""

    levels: int = 1
    equator_count: int = 8
    fov: float = 90.0
    viewport_size: int = 256
    zca_enabled: bool = True
    zca_patch: int = 5
    zca_epsilon: float = 1e-4
    mscn_radius: int = 3
    mscn_sigma: float = 7.0 / 6.0
    mscn_c: float = 1.0
    svr_cost: float = 1024.0
    svr_gamma: float | None = None
    svr_epsilon: float = 0.1
    grid_search: bool = False
    trials: int = 1000
    train_fraction: float = 0.8
    seed: int = 0
    jobs: int = 1
    strict: bool = False

    def __post_init__(self):
        self.pipeline()
        self.svr_params()
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(
                f"train fraction must lie in (0, 1), got {self.train_fraction}")
        if self.jobs < 1:
            raise ValidationError(f"jobs must be >= 1, got {self.jobs}")

    def pipeline(self):
        return PipelineConfig(
            levels=self.levels, equator_count=self.equator_count, fov=self.fov,
            viewport_size=self.viewport_size, zca_enabled=self.zca_enabled,
            zca_patch=self.zca_patch, zca_epsilon=self.zca_epsilon,
            mscn_radius=self.mscn_radius, mscn_sigma=self.mscn_sigma,
            mscn_c=self.mscn_c)

    def svr_params(self):
        return SvrParams(cost=self.svr_cost, gamma=self.svr_gamma,
                         epsilon=self.svr_epsilon)

    def canonical_text(self):
        return _canonical_text(self)


_RUN_FIELD_TYPES = {
    "levels": int, "equator_count": int, "fov": float, "viewport_size": int,
    "zca_enabled": bool, "zca_patch": int, "zca_epsilon": float,
    "mscn_radius": int, "mscn_sigma": float, "mscn_c": float,
    "svr_cost": float, "svr_gamma": float, "svr_epsilon": float,
    "grid_search": bool, "trials": int, "train_fraction": float,
    "seed": int, "jobs": int, "strict": bool,
}


def parse_config_text(text):
    """Parse canonical "key = value" lines into {key: raw string}."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, raw = stripped.partition("=")
        if not sep:
            raise ValidationError(f"config line {lineno}: expected 'key = value', got {line!r}")
        values[key.strip()] = raw.strip()
    return values


def run_config_from(overrides, base=None):
    """Build a RunConfig from {key: raw-or-typed value} over a base config.

    Raw strings (from config files) are coerced to the field's type;
    already-typed values (from CLI flags) pass through. Unknown keys
    are rejected by name.
    """
    cfg = base if base is not None else RunConfig()
    typed = {}
    for key, value in overrides.items():
        if key not in _RUN_FIELD_TYPES:
            raise ValidationError(f"unknown config key {key!r}")
        if isinstance(value, str):
            value = _parse_value(_RUN_FIELD_TYPES[key], value, key)
        typed[key] = value
    return replace(cfg, **typed)
