"""Per-modality encoders and the non-linear fusion layer.

Text features are already sentence-level vectors, so the text path is a
single linear projection.  Audio/video are sequences: linear projection,
a small pre-norm Transformer encoder, then the last unpadded element as
the sentence-level representation.  The three projected modalities are
concatenated and fused through W1 * GELU(Dropout(.)) + b1.

Augmentation views mask the *encoded* audio or video representation with
zeros before fusion, leaving text as the shared anchor.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import DimMismatch, EmptySequence
from .numerics import torch_gen


@dataclass
class EncoderConfig:
    text_dim: int
    video_dim: int
    audio_dim: int
    hidden_dim: int = 64          # D_H
    proj_dim: int | None = None   # contrastive head output; defaults to D_H
    attn_layers: int = 1
    attn_heads: int = 2
    ff_mult: int = 4
    fusion_dropout: float = 0.1

    def __post_init__(self):
        if self.hidden_dim % self.attn_heads != 0:
            raise ValueError("attn_heads must divide hidden_dim")
        if not (0.0 <= self.fusion_dropout < 1.0):
            raise ValueError("fusion_dropout must be in [0,1)")
        if self.proj_dim is None:
            self.proj_dim = self.hidden_dim


def _init_linear(m: nn.Module, gen: torch.Generator) -> None:
    """Uniform +-1/sqrt(fan_in) for every 2D weight and its bias."""
    for p in m.parameters():
        if p.ndim >= 2:
            bound = 1.0 / (p.shape[-1] ** 0.5)
            with torch.no_grad():
                p.uniform_(-bound, bound, generator=gen)
    for name, p in m.named_parameters():
        if p.ndim == 1 and "bias" in name:
            with torch.no_grad():
                p.zero_()


def dropout_mask(shape, rate: float, gen: torch.Generator | None,
                 dtype=torch.float32) -> torch.Tensor:
    """Inverted-dropout mask: keep with prob 1-rate, scale kept units by
    1/(1-rate)."""
    keep = (torch.rand(shape, generator=gen) >= rate).to(dtype)
    return keep / (1.0 - rate)


class SequenceEncoder(nn.Module):
    """Linear projection + pre-norm Transformer; pools the last unpadded
    sequence element."""

    def __init__(self, in_dim: int, cfg: EncoderConfig):
        super().__init__()
        self.proj = nn.Linear(in_dim, cfg.hidden_dim)
        self.layers = nn.ModuleList([
            nn.TransformerEncoderLayer(
                d_model=cfg.hidden_dim, nhead=cfg.attn_heads,
                dim_feedforward=cfg.ff_mult * cfg.hidden_dim,
                dropout=0.0, batch_first=True, norm_first=True)
            for _ in range(cfg.attn_layers)
        ])

    def forward(self, x: torch.Tensor, true_len: torch.Tensor) -> torch.Tensor:
        # x: (B, L, D_in), true_len: (B,)
        if (true_len < 1).any():
            raise EmptySequence("sequence consists entirely of padding")
        L = x.shape[1]
        pad_mask = torch.arange(L, device=x.device)[None, :] >= true_len[:, None]
        h = self.proj(x)
        for layer in self.layers:
            h = layer(h, src_key_padding_mask=pad_mask)
        idx = (true_len - 1).long()
        return h[torch.arange(h.shape[0]), idx]


class MultimodalEncoder(nn.Module):
    """Full encoder stack: text/audio/video paths plus the fusion layer."""

    def __init__(self, cfg: EncoderConfig, seed: int = 0):
        super().__init__()
        self.cfg = cfg
        self.f_t = nn.Linear(cfg.text_dim, cfg.hidden_dim)
        self.enc_a = SequenceEncoder(cfg.audio_dim, cfg)
        self.enc_v = SequenceEncoder(cfg.video_dim, cfg)
        self.fusion = nn.Linear(3 * cfg.hidden_dim, cfg.hidden_dim)
        _init_linear(self, torch_gen(seed, "init/encoder"))

    def encode_text(self, x_t: torch.Tensor) -> torch.Tensor:
        if x_t.shape[-1] != self.cfg.text_dim:
            raise DimMismatch(
                f"text dim {x_t.shape[-1]} != configured {self.cfg.text_dim}")
        return self.f_t(x_t)

    def encode_modality(self, x: torch.Tensor, true_len: torch.Tensor,
                        modality: str) -> torch.Tensor:
        enc = self.enc_a if modality == "audio" else self.enc_v
        return enc(x, true_len)

    def fuse(self, z_t: torch.Tensor, z_a: torch.Tensor, z_v: torch.Tensor,
             train: bool = False, gen: torch.Generator | None = None) -> torch.Tensor:
        z = torch.cat([z_t, z_a, z_v], dim=-1)
        if train and self.cfg.fusion_dropout > 0.0:
            z = z * dropout_mask(z.shape, self.cfg.fusion_dropout, gen, z.dtype)
        return self.fusion(torch.nn.functional.gelu(z))

    def forward(self, batch: dict[str, torch.Tensor], train: bool = False,
                gen: torch.Generator | None = None) -> torch.Tensor:
        """Fused embedding z_TAV for a batch dict with keys text, audio,
        video, audio_len, video_len."""
        z_t = self.encode_text(batch["text"])
        z_a = self.enc_a(batch["audio"], batch["audio_len"])
        z_v = self.enc_v(batch["video"], batch["video_len"])
        return self.fuse(z_t, z_a, z_v, train=train, gen=gen)

    def make_views(self, batch: dict[str, torch.Tensor], train: bool = False,
                   gen: torch.Generator | None = None
                   ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """(z_tav, z_ta0, z_t0v): the fused embedding and its two
        modality-masked augmentation views.  Masking zeroes the encoded
        representation, not the raw features."""
        z_t = self.encode_text(batch["text"])
        z_a = self.enc_a(batch["audio"], batch["audio_len"])
        z_v = self.enc_v(batch["video"], batch["video_len"])
        zero = torch.zeros_like(z_a)
        z_tav = self.fuse(z_t, z_a, z_v, train=train, gen=gen)
        z_ta0 = self.fuse(z_t, z_a, zero, train=train, gen=gen)
        z_t0v = self.fuse(z_t, zero, z_v, train=train, gen=gen)
        return z_tav, z_ta0, z_t0v
