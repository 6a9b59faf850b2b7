"""
Experiment configuration.

A YAML file with the sections experiment, channel, simulation, output and
engine is flattened into one ExperimentConfig; CLI flags override file
values. Validation failures raise ConfigError listing every violated field.
"""

import logging
import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.schema.errors import ConfigError
from src.waveforms.schemes import SchemeName, get_scheme

logger = logging.getLogger(__name__)

SECTIONS = ("experiment", "channel", "simulation", "output", "engine")

FULL_FRAMES = 10_000
FULL_FRAME_LEN = 1_000


class DetectorKind(str, Enum):
    MLSD_COHERENT = "MLSD_COHERENT"
    MLSD_PHASE_DEVIATION = "MLSD_PHASE_DEVIATION"
    PROPOSED = "PROPOSED"
    MSD = "MSD"


_LABEL = re.compile(r"^\s*([A-Z_]+)\s*(?:\(\s*(\d+)\s*\))?\s*$")


class DetectorSpec(BaseModel):
    """A detector and its parameter: survivors for PROPOSED, window for MSD."""

    model_config = ConfigDict(frozen=True)

    kind: DetectorKind
    n_survivors: int = Field(1, ge=1, le=4)
    window: int = Field(5, ge=1)

    @field_validator("window")
    @classmethod
    def window_is_odd(cls, v: int) -> int:
        if v % 2 == 0:
            raise ValueError(f"MSD window must be odd, got {v}")
        return v

    @property
    def label(self) -> str:
        if self.kind == DetectorKind.PROPOSED:
            return f"PROPOSED({self.n_survivors})"
        if self.kind == DetectorKind.MSD:
            return f"MSD({self.window})"
        return self.kind.value

    @property
    def coherent(self) -> bool:
        return self.kind in (DetectorKind.MLSD_COHERENT, DetectorKind.MLSD_PHASE_DEVIATION)


def parse_detector(label: str, n_survivors: Optional[int] = None, window: Optional[int] = None) -> DetectorSpec:
    """Parse 'PROPOSED(2)', 'MSD(5)', 'MLSD_COHERENT', ... into a DetectorSpec."""
    match = _LABEL.match(str(label).upper())
    if not match:
        raise ConfigError(f"detector: cannot parse {label!r}")
    name, param = match.group(1), match.group(2)
    try:
        kind = DetectorKind(name)
    except ValueError:
        raise ConfigError(f"detector: unknown detector {name!r}; expected one of {[d.value for d in DetectorKind]}")
    values: Dict[str, Any] = {"kind": kind}
    if kind == DetectorKind.PROPOSED:
        values["n_survivors"] = int(param) if param else (n_survivors or 1)
    elif kind == DetectorKind.MSD:
        values["window"] = int(param) if param else (window or 5)
    elif param:
        raise ConfigError(f"detector: {name} takes no parameter")
    try:
        return DetectorSpec(**values)
    except ValidationError as exc:
        raise ConfigError(_describe(exc))


class ExperimentConfig(BaseModel):
    """One BER sweep: a scheme, its detectors and the Eb/N0 grid."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    scheme: SchemeName = SchemeName.PCMFM
    detectors: List[DetectorSpec] = Field(default_factory=lambda: [DetectorSpec(kind=DetectorKind.PROPOSED)])
    ebn0_grid: List[float] = Field(default_factory=lambda: [6.0, 7.0, 8.0, 9.0, 10.0])
    noiseless: bool = False
    n_frames: int = Field(FULL_FRAMES, ge=1)
    frame_len: int = Field(FULL_FRAME_LEN, ge=1)
    k: int = Field(4, ge=2)
    master_seed: int = Field(0, ge=0)
    min_errors: Optional[int] = Field(200, ge=1)
    max_bits: Optional[int] = Field(2_000_000, ge=1)
    batch_frames: int = Field(8, ge=1)
    output_path: str = "output/results"
    master: Optional[str] = None

    @field_validator("detectors", mode="before")
    @classmethod
    def parse_labels(cls, v):
        if isinstance(v, (str, dict)):
            v = [v]
        return [parse_detector(d) if isinstance(d, str) else d for d in v]

    @field_validator("detectors")
    @classmethod
    def detectors_nonempty(cls, v):
        if not v:
            raise ValueError("at least one detector is required")
        return v

    @field_validator("ebn0_grid", mode="before")
    @classmethod
    def grid_list(cls, v):
        return [v] if isinstance(v, (int, float)) else v

    @field_validator("ebn0_grid")
    @classmethod
    def grid_nonempty(cls, v):
        if not v:
            raise ValueError("ebn0_grid must not be empty")
        return v

    @model_validator(mode="after")
    def frame_fits_memory(self):
        L = get_scheme(self.scheme).L
        if self.frame_len < L + 1:
            raise ValueError(f"frame_len must be >= L+1 = {L + 1}, got {self.frame_len}")
        return self

    @model_validator(mode="after")
    def msd_is_pcmfm_only(self):
        if self.scheme != SchemeName.PCMFM and any(d.kind == DetectorKind.MSD for d in self.detectors):
            raise ValueError(f"MSD is only defined for PCMFM, not {self.scheme.value}")
        return self

    @property
    def early_stop(self) -> bool:
        return self.min_errors is not None


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        where = ".".join(str(x) for x in err["loc"]) or "config"
        parts.append(f"{where}: {err['msg']}")
    return "; ".join(parts)


def flatten_sections(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Merge the YAML sections into one flat mapping; duplicate keys are an error."""
    flat: Dict[str, Any] = {}
    for key, value in (raw or {}).items():
        if key in SECTIONS:
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: section must be a mapping")
            for inner, inner_value in value.items():
                if inner in flat:
                    raise ConfigError(f"{key}.{inner}: defined in more than one section")
                flat[inner] = inner_value
        else:
            flat[key] = value
    return flat


def build_config(values: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        raise ConfigError(_describe(exc))


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Load a YAML experiment file and apply overrides.

    Args:
        path: YAML file, or None for defaults
        overrides: flat field values taking precedence over the file; None values are ignored

    Returns:
        Validated ExperimentConfig
    """
    values: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = yaml.safe_load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}")
        values = flatten_sections(raw)
        logger.info(f"Loaded experiment config from {Path(path)}")
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return build_config(values)


def full_scale(config: ExperimentConfig) -> ExperimentConfig:
    """Full-size frames and counts with early stop and the bit cap disabled."""
    return config.model_copy(update={
        "n_frames": FULL_FRAMES, "frame_len": FULL_FRAME_LEN, "min_errors": None, "max_bits": None,
    })
