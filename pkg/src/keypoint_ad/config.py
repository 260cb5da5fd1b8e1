"""Pipeline configuration: dataclass, INI-style config files, CLI overrides.

Config files are flat ``key = value`` lines under section headers; any flag
given on the command line wins over the file value.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace

from .classifiers import MODEL_KINDS, ModelConfig
from .detector import DETECTOR_KINDS, DetectorConfig, default_config


class ConfigError(ValueError):
    """Invalid or inconsistent pipeline configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    # detector
    detector: str = "fast_hessian"
    octaves: int = 4
    scales_per_octave: int = 3
    base_sigma: float = 1.6
    contrast_threshold: float | None = None   # None picks the detector's default
    edge_ratio_threshold: float = 10.0
    border_margin: int = 5
    # descriptor
    k: int = 5
    # preprocessing
    crop: bool = False
    invert_foreground: bool = False
    # model
    model: str = "ocsvm"
    nu: float = 0.05
    gamma: float | None = None
    c_pos: float | None = None
    c_neg: float = 1.0
    c: float = 1.0
    l2_lambda: float = 1e-4
    max_splits: int = 4
    solver_tol: float = 1e-6
    solver_max_iter: int = 100_000
    normalize: str = "all"
    # evaluation
    threshold_source: str = "test"
    # pipeline
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.detector not in DETECTOR_KINDS:
            raise ConfigError(f"detector must be one of {DETECTOR_KINDS}, got {self.detector!r}")
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"model must be one of {MODEL_KINDS}, got {self.model!r}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.normalize not in ("all", "occ_only", "none"):
            raise ConfigError(f"normalize must be all|occ_only|none, got {self.normalize!r}")
        if self.threshold_source not in ("test", "validation"):
            raise ConfigError(f"threshold_source must be test|validation, got {self.threshold_source!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    def detector_config(self) -> DetectorConfig:
        cfg = default_config(self.detector)
        overrides = dict(
            octaves=self.octaves,
            scales_per_octave=self.scales_per_octave,
            base_sigma=self.base_sigma,
            edge_ratio_threshold=self.edge_ratio_threshold,
            border_margin=self.border_margin,
        )
        if self.contrast_threshold is not None:
            overrides["contrast_threshold"] = self.contrast_threshold
        try:
            return replace(cfg, **overrides).validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def model_config(self) -> ModelConfig:
        try:
            return ModelConfig(
                kind=self.model,
                nu=self.nu,
                gamma=self.gamma,
                c_pos=self.c_pos,
                c_neg=self.c_neg,
                c=self.c,
                l2_lambda=self.l2_lambda,
                max_splits=self.max_splits,
                tol=self.solver_tol,
                max_iter=self.solver_max_iter,
                normalize=self.normalize,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def canonical(self) -> str:
        """Stable text form, hashed into model files for provenance."""
        parts = [f"{f.name}={getattr(self, f.name)!r}" for f in fields(self)]
        return "PipelineConfig(" + ", ".join(parts) + ")"


_SECTIONS = {
    "detector": {
        "kind": ("detector", str),
        "octaves": ("octaves", int),
        "scales_per_octave": ("scales_per_octave", int),
        "base_sigma": ("base_sigma", float),
        "contrast_threshold": ("contrast_threshold", float),
        "edge_ratio_threshold": ("edge_ratio_threshold", float),
        "border_margin": ("border_margin", int),
    },
    "descriptor": {"k": ("k", int)},
    "preprocess": {
        "crop": ("crop", "bool"),
        "invert_foreground": ("invert_foreground", "bool"),
    },
    "model": {
        "kind": ("model", str),
        "nu": ("nu", float),
        "gamma": ("gamma", float),
        "c_pos": ("c_pos", float),
        "c_neg": ("c_neg", float),
        "c": ("c", float),
        "l2_lambda": ("l2_lambda", float),
        "max_splits": ("max_splits", int),
        "solver_tol": ("solver_tol", float),
        "solver_max_iter": ("solver_max_iter", int),
        "normalize": ("normalize", str),
    },
    "evaluation": {"threshold_source": ("threshold_source", str)},
    "pipeline": {
        "seed": ("seed", int),
        "jobs": ("jobs", int),
    },
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def load_config_file(path) -> dict:
    """Parse an INI config file into PipelineConfig keyword overrides."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise OSError(f"cannot read config file {path}")
    overrides: dict = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        known = _SECTIONS[section]
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"unknown config key {key!r} in section [{section}]")
            field_name, typ = known[key]
            try:
                if typ == "bool":
                    low = raw.strip().lower()
                    if low in _TRUE:
                        value = True
                    elif low in _FALSE:
                        value = False
                    else:
                        raise ValueError(f"not a boolean: {raw!r}")
                else:
                    value = typ(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from exc
            overrides[field_name] = value
    return overrides


def build_pipeline_config(config_path=None, **flag_overrides) -> PipelineConfig:
    """File values first, then command-line flags (flag wins)."""
    values = load_config_file(config_path) if config_path else {}
    values.update({k: v for k, v in flag_overrides.items() if v is not None})
    try:
        return PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
