"""Flat key=value run configuration with dotted section prefixes.

Example file:

    data.manifest=synth/manifest.txt
    train.t0=0.1
    train.variant=full
    select.mode=auto
    enc.hidden_dim=64
    seeds=0,1,2,3,4

Command-line --set key=value pairs override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .model import EncoderConfig
from .selection import SelectionConfig
from .trainer import TrainConfig


@dataclass
class RunConfig:
    manifest: str = ""
    out_dir: str = "runs/out"
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    train: dict = field(default_factory=dict)    # TrainConfig overrides
    select: dict = field(default_factory=dict)   # SelectionConfig overrides
    enc: dict = field(default_factory=dict)      # EncoderConfig overrides

    def train_cfg(self, seed: int) -> TrainConfig:
        return TrainConfig(**{**self.train, "seed": seed})

    def select_cfg(self) -> SelectionConfig:
        return SelectionConfig(**self.select)

    def encoder_cfg(self, text_dim: int, video_dim: int, audio_dim: int) -> EncoderConfig:
        return EncoderConfig(text_dim=text_dim, video_dim=video_dim,
                             audio_dim=audio_dim, **self.enc)

    def as_flat_dict(self) -> dict[str, object]:
        out: dict[str, object] = {
            "data.manifest": self.manifest,
            "out_dir": self.out_dir,
            "seeds": ",".join(str(s) for s in self.seeds),
        }
        for section, overrides in (("train", self.train), ("select", self.select),
                                   ("enc", self.enc)):
            for k, v in overrides.items():
                out[f"{section}.{k}"] = v
        return out


_FIELD_TYPES = {}
for cls, section in ((TrainConfig, "train"), (SelectionConfig, "select"),
                     (EncoderConfig, "enc")):
    for f in fields(cls):
        _FIELD_TYPES[f"{section}.{f.name}"] = f.type


def _coerce(key: str, value: str):
    ftype = _FIELD_TYPES.get(key, "str")
    if "bool" in ftype:
        return value.lower() in ("1", "true", "yes")
    if "int" in ftype:
        return int(value)
    if "float" in ftype:
        return float(value)
    return value


def parse_entries(entries: dict[str, str]) -> RunConfig:
    cfg = RunConfig()
    for key, value in entries.items():
        if key == "data.manifest" or key == "manifest":
            cfg.manifest = value
        elif key == "out_dir":
            cfg.out_dir = value
        elif key == "seeds":
            cfg.seeds = [int(s) for s in value.split(",") if s.strip()]
        elif key.startswith(("train.", "select.", "enc.")):
            section, _, name = key.partition(".")
            getattr(cfg, section)[name] = _coerce(key, value)
        else:
            raise KeyError(f"unknown config key {key!r}")
    return cfg


def load_config(path: str | Path, overrides: dict[str, str] | None = None) -> RunConfig:
    entries: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    if overrides:
        entries.update(overrides)
    return parse_entries(entries)
