"""Dataset loading, the UMCF feature container format, and synthetic
multimodal data generation with planted cluster structure.

UMCF container (binary, little-endian):
    magic "UMCF" | version u32=1 | modality u8 (0=text,1=audio,2=video,3=fused)
    | sample count u32 | seq_len u32 (1 for text/fused) | dim u32
    then per sample: true_len u32 followed by seq_len*dim float32.

Labels file: UTF-8 text, one integer per line.
Manifest: flat key=value lines with keys text=, audio=, video=, labels=,
num_classes=.  Paths are resolved relative to the manifest.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadContainer,
    CorruptData,
    CountMismatch,
    LabelOutOfRange,
    SpecTooSmall,
)
from .numerics import rng_stream

MAGIC = b"UMCF"
VERSION = 1
MODALITY_CODES = {"text": 0, "audio": 1, "video": 2, "fused": 3}


@dataclass
class FeatureRecord:
    """One sample's per-modality features (video/audio are zero-padded
    sequences with their true lengths kept for attention masking)."""
    id: int
    text: np.ndarray          # (D_T,)
    video: np.ndarray         # (L_V, D_V)
    audio: np.ndarray         # (L_A, D_A)
    video_len: int
    audio_len: int


@dataclass
class Dataset:
    records: list[FeatureRecord]
    num_classes: int
    labels: np.ndarray | None = None  # evaluation only; hidden from training

    def __len__(self) -> int:
        return len(self.records)

    def training_view(self) -> "Dataset":
        """The dataset with labels stripped, as handed to the trainer."""
        return Dataset(records=self.records, num_classes=self.num_classes, labels=None)

    def stacked(self) -> dict[str, np.ndarray]:
        """Batch all records into dense arrays for vectorized encoding."""
        return {
            "text": np.stack([r.text for r in self.records]),
            "video": np.stack([r.video for r in self.records]),
            "audio": np.stack([r.audio for r in self.records]),
            "video_len": np.array([r.video_len for r in self.records], dtype=np.int64),
            "audio_len": np.array([r.audio_len for r in self.records], dtype=np.int64),
        }


# --- container IO ------------------------------------------------------------

def write_container(path: str | Path, modality: str, feats: np.ndarray,
                    true_lens: np.ndarray | None = None) -> None:
    """Write features of shape (N, seq_len, dim) (or (N, dim) for text) to a
    UMCF container."""
    feats = np.asarray(feats, dtype=np.float32)
    if feats.ndim == 2:
        feats = feats[:, None, :]
    n, seq_len, dim = feats.shape
    if true_lens is None:
        true_lens = np.full(n, seq_len, dtype=np.uint32)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IBIII", VERSION, MODALITY_CODES[modality], n, seq_len, dim))
        for i in range(n):
            f.write(struct.pack("<I", int(true_lens[i])))
            f.write(feats[i].astype("<f4").tobytes())


def read_container(path: str | Path) -> tuple[np.ndarray, np.ndarray, int]:
    """Read a UMCF container; returns (feats (N,seq_len,dim), true_lens, modality code)."""
    with open(path, "rb") as f:
        head = f.read(4)
        if head != MAGIC:
            raise BadContainer(f"{path}: bad magic {head!r}")
        try:
            version, modality, n, seq_len, dim = struct.unpack("<IBIII", f.read(17))
        except struct.error as e:
            raise BadContainer(f"{path}: truncated header") from e
        if version != VERSION:
            raise BadContainer(f"{path}: unsupported version {version}")
        feats = np.empty((n, seq_len, dim), dtype=np.float32)
        true_lens = np.empty(n, dtype=np.int64)
        sample_bytes = seq_len * dim * 4
        for i in range(n):
            raw_len = f.read(4)
            payload = f.read(sample_bytes)
            if len(raw_len) < 4 or len(payload) < sample_bytes:
                raise BadContainer(f"{path}: truncated payload at sample {i}")
            true_lens[i] = struct.unpack("<I", raw_len)[0]
            feats[i] = np.frombuffer(payload, dtype="<f4").reshape(seq_len, dim)
    if not np.isfinite(feats).all():
        raise CorruptData(f"{path}: non-finite feature values")
    return feats, true_lens, modality


def read_labels(path: str | Path, num_classes: int) -> np.ndarray:
    labels = np.array(
        [int(line) for line in Path(path).read_text().splitlines() if line.strip()],
        dtype=np.int64,
    )
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise LabelOutOfRange(
            f"{path}: labels must lie in [0, {num_classes}), got "
            f"[{labels.min()}, {labels.max()}]")
    return labels


def write_labels(path: str | Path, labels: np.ndarray) -> None:
    Path(path).write_text("".join(f"{int(y)}\n" for y in labels))


def read_manifest(path: str | Path) -> dict[str, str]:
    entries = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def load_dataset(manifest_path: str | Path) -> Dataset:
    """Assemble a Dataset from the containers referenced by a manifest."""
    manifest_path = Path(manifest_path)
    entries = read_manifest(manifest_path)
    base = manifest_path.parent
    num_classes = int(entries["num_classes"])

    text, _, _ = read_container(base / entries["text"])
    audio, audio_lens, _ = read_container(base / entries["audio"])
    video, video_lens, _ = read_container(base / entries["video"])
    counts = {"text": len(text), "audio": len(audio), "video": len(video)}
    if len(set(counts.values())) != 1:
        raise CountMismatch(f"sample counts differ across modalities: {counts}")

    labels = None
    if entries.get("labels"):
        labels = read_labels(base / entries["labels"], num_classes)
        if len(labels) != len(text):
            raise CountMismatch(
                f"{len(labels)} labels for {len(text)} samples")

    records = [
        FeatureRecord(
            id=i, text=text[i, 0], video=video[i], audio=audio[i],
            video_len=int(video_lens[i]), audio_len=int(audio_lens[i]))
        for i in range(len(text))
    ]
    return Dataset(records=records, num_classes=num_classes, labels=labels)


# --- synthetic data ----------------------------------------------------------

@dataclass
class SynthSpec:
    num_classes: int = 4
    samples_per_class: int = 200
    text_dim: int = 32
    video_dim: int = 32
    audio_dim: int = 32
    video_len: int = 8
    audio_len: int = 8
    separation: float = 5.0
    noise_scale: float = 1.0
    text_ambiguity_pairs: list[tuple[int, int]] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if self.separation <= 0 or self.noise_scale <= 0:
            raise SpecTooSmall("separation and noise_scale must be positive")
        for a, b in self.text_ambiguity_pairs:
            if not (0 <= a < self.num_classes and 0 <= b < self.num_classes):
                raise SpecTooSmall(f"ambiguity pair ({a},{b}) references invalid classes")


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Gaussian blobs per (class, modality).  Classes listed in
    text_ambiguity_pairs share a text center but keep separated audio/video
    centers, so text alone cannot distinguish them."""
    if spec.samples_per_class < 2:
        raise SpecTooSmall("need at least 2 samples per class")
    rng = rng_stream(spec.seed, "synth")
    k = spec.num_classes

    def centers(dim: int) -> np.ndarray:
        c = rng.standard_normal((k, dim))
        c /= np.linalg.norm(c, axis=1, keepdims=True)
        return c * spec.separation

    text_c = centers(spec.text_dim)
    video_c = centers(spec.video_dim)
    audio_c = centers(spec.audio_dim)
    for a, b in spec.text_ambiguity_pairs:
        text_c[b] = text_c[a]

    records: list[FeatureRecord] = []
    labels: list[int] = []
    idx = 0
    for c in range(k):
        for _ in range(spec.samples_per_class):
            text = text_c[c] + spec.noise_scale * rng.standard_normal(spec.text_dim)
            video = video_c[c] + spec.noise_scale * rng.standard_normal(
                (spec.video_len, spec.video_dim))
            audio = audio_c[c] + spec.noise_scale * rng.standard_normal(
                (spec.audio_len, spec.audio_dim))
            records.append(FeatureRecord(
                id=idx, text=text.astype(np.float32),
                video=video.astype(np.float32), audio=audio.astype(np.float32),
                video_len=spec.video_len, audio_len=spec.audio_len))
            labels.append(c)
            idx += 1
    return Dataset(records=records, num_classes=k, labels=np.array(labels, dtype=np.int64))


def write_dataset(out_dir: str | Path, dataset: Dataset, manifest_name: str = "manifest.txt") -> Path:
    """Write a dataset as UMCF containers + labels + manifest; returns the
    manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stacked = dataset.stacked()
    write_container(out / "text.umcf", "text", stacked["text"])
    write_container(out / "audio.umcf", "audio", stacked["audio"], stacked["audio_len"])
    write_container(out / "video.umcf", "video", stacked["video"], stacked["video_len"])
    lines = [
        "text=text.umcf",
        "audio=audio.umcf",
        "video=video.umcf",
        f"num_classes={dataset.num_classes}",
    ]
    if dataset.labels is not None:
        write_labels(out / "labels.txt", dataset.labels)
        lines.insert(3, "labels=labels.txt")
    manifest = out / manifest_name
    manifest.write_text("".join(line + "\n" for line in lines))
    return manifest
