"""Run configuration: defaults, key = value config files, flag overrides.

Config files are flat `key = value` lines with # comments.  Keys must be
Config field names; unknown keys are rejected so typos fail loudly.
Values on the command line override the file, which overrides defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .conv_metrics import DDUR_MODES
from .errors import InvalidParamsError


@dataclass
class Config:
    lld_frame_ms: float = 25.0
    lld_hop_ms: float = 10.0
    pitch_frame_ms: float = 40.0
    pitch_hop_ms: float = 10.0
    pitch_fmin: float = 60.0
    pitch_fmax: float = 400.0
    voicing_threshold: float = 0.45
    silence_rms: float = 0.001
    energy_frame_ms: float = 25.0
    energy_hop_ms: float = 10.0
    mel_bands: int = 80
    mel_frame_ms: float = 50.0
    mel_hop_ms: float = 12.5
    ranker_c: float = 1.0
    n_similar: int = 0  # 0 means half the ordered-pair count
    seed: int = 0
    mcep_order: int = 24
    ddur_mode: str = "voiced"
    jobs: int = 0  # 0 means one worker per CPU
    out_dir: str = "."

    def validate(self) -> None:
        positive = ("lld_frame_ms", "lld_hop_ms", "pitch_frame_ms", "pitch_hop_ms",
                    "energy_frame_ms", "energy_hop_ms", "mel_frame_ms", "mel_hop_ms",
                    "ranker_c")
        for name in positive:
            if getattr(self, name) <= 0:
                raise InvalidParamsError(f"{name} must be positive")
        if not 0.0 < self.pitch_fmin < self.pitch_fmax:
            raise InvalidParamsError("need 0 < pitch_fmin < pitch_fmax")
        if not 0.0 <= self.voicing_threshold <= 1.0:
            raise InvalidParamsError("voicing_threshold must be in [0, 1]")
        if self.silence_rms < 0.0:
            raise InvalidParamsError("silence_rms must be >= 0")
        if self.mel_bands < 1:
            raise InvalidParamsError("mel_bands must be >= 1")
        if self.mcep_order < 1:
            raise InvalidParamsError("mcep_order must be >= 1")
        if self.n_similar < 0 or self.jobs < 0:
            raise InvalidParamsError("n_similar and jobs must be >= 0")
        if self.ddur_mode not in DDUR_MODES:
            raise InvalidParamsError(f"ddur_mode must be one of {DDUR_MODES}")

    def lld_kwargs(self) -> dict:
        return {
            "frame_ms": self.lld_frame_ms,
            "hop_ms": self.lld_hop_ms,
            "fmin": self.pitch_fmin,
            "fmax": self.pitch_fmax,
            "voicing_threshold": self.voicing_threshold,
            "silence_rms": self.silence_rms,
        }

    def pitch_kwargs(self) -> dict:
        return {
            "frame_ms": self.pitch_frame_ms,
            "hop_ms": self.pitch_hop_ms,
            "fmin": self.pitch_fmin,
            "fmax": self.pitch_fmax,
            "voicing_threshold": self.voicing_threshold,
            "silence_rms": self.silence_rms,
        }


_FIELD_TYPES = {f.name: type(f.default) for f in fields(Config)}


def parse_config_file(path) -> dict:
    """Read `key = value` lines into a dict of typed values."""
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParamsError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise InvalidParamsError(f"{path}:{lineno}: unknown config key {key!r}")
        kind = _FIELD_TYPES[key]
        try:
            if kind is str:
                values[key] = value.strip("\"'")
            else:
                values[key] = kind(value)
        except ValueError as exc:
            raise InvalidParamsError(
                f"{path}:{lineno}: cannot parse {value!r} as {kind.__name__}"
            ) from exc
    return values


def load_config(file_path=None, **overrides) -> Config:
    """Merge defaults, an optional config file, and non-None overrides."""
    values = {}
    if file_path is not None:
        values.update(parse_config_file(file_path))
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            raise InvalidParamsError(f"unknown config override {key!r}")
        values[key] = value
    config = Config(**values)
    config.validate()
    return config
