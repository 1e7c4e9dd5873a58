"""Contrastive heads and losses.

Two losses drive training: an unsupervised contrastive loss over
augmentation views sharing an origin sample (pretraining head, and the
low-quality refinement head), and a supervised contrastive loss where
positives are all views sharing a pseudo-label (high-quality head).
Similarity is the dot product of L2-normalized projections; softmax
denominators use log-sum-exp with the diagonal excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .errors import BadRate, BatchTooSmall, NoPositives
from .numerics import torch_gen
from .model import _init_linear, dropout_mask

_NEG_INF = -1e30


class ContrastiveHead(nn.Module):
    """Two-layer projection with ReLU, plus its temperature."""

    def __init__(self, in_dim: int, out_dim: int, tau: float, tag: str,
                 seed: int = 0):
        super().__init__()
        if tau <= 0:
            raise ValueError("temperature must be positive")
        self.tau = tau
        self.tag = tag
        self.net = nn.Sequential(
            nn.Linear(in_dim, in_dim), nn.ReLU(), nn.Linear(in_dim, out_dim))
        _init_linear(self, torch_gen(seed, f"init/head_{tag}"))

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        p = self.net(z)
        return p / p.norm(dim=-1, keepdim=True).clamp_min(1e-12)


@dataclass
class ViewBatch:
    """Projected, L2-normalized view vectors with their bookkeeping.

    embeddings: (R, D_P); origin: sample index per row; pseudo_label:
    optional cluster id per row (views inherit their origin's label).
    """
    embeddings: torch.Tensor
    origin: torch.Tensor
    pseudo_label: torch.Tensor | None = None


def _log_denominators(batch: ViewBatch, tau: float) -> tuple[torch.Tensor, torch.Tensor]:
    """Similarity matrix and per-row log of the softmax denominator over all
    other rows."""
    sim = batch.embeddings @ batch.embeddings.T / tau
    masked = sim + torch.eye(sim.shape[0], dtype=sim.dtype) * _NEG_INF
    return sim, torch.logsumexp(masked, dim=1)


def ucl_loss(batch: ViewBatch, tau: float) -> torch.Tensor:
    """Unsupervised contrastive loss: mean over all ordered pairs of views
    sharing an origin of -log softmax(sim/tau)."""
    if torch.unique(batch.origin).numel() < 2:
        raise BatchTooSmall("need at least 2 distinct origins for negatives")
    sim, log_den = _log_denominators(batch, tau)
    same_origin = batch.origin[:, None] == batch.origin[None, :]
    pos = same_origin & ~torch.eye(len(batch.origin), dtype=torch.bool)
    losses = log_den[:, None] - sim
    return losses[pos].mean()


def mscl_loss(batch: ViewBatch, tau: float) -> torch.Tensor:
    """Supervised contrastive loss with pseudo-labels: per anchor, average
    -log softmax over the rows sharing its label; anchors with no positives
    are skipped."""
    if batch.pseudo_label is None:
        raise ValueError("mscl_loss requires pseudo labels")
    sim, log_den = _log_denominators(batch, tau)
    same_label = batch.pseudo_label[:, None] == batch.pseudo_label[None, :]
    pos = same_label & ~torch.eye(len(batch.origin), dtype=torch.bool)
    counts = pos.sum(dim=1)
    if (counts == 0).all():
        raise NoPositives("every anchor has an empty positive set")
    losses = (log_den[:, None] - sim) * pos
    anchors = counts > 0
    per_anchor = losses.sum(dim=1)[anchors] / counts[anchors]
    return per_anchor.mean()


def dropout_twice_views(z_t: torch.Tensor, rate: float,
                        gen: torch.Generator) -> tuple[torch.Tensor, torch.Tensor]:
    """Two independent inverted-dropout views of the same text embedding;
    the positive pair for the text-only variant."""
    if not (0.0 < rate < 1.0):
        raise BadRate(f"dropout rate must be in (0,1), got {rate}")
    a = z_t * dropout_mask(z_t.shape, rate, gen, z_t.dtype)
    b = z_t * dropout_mask(z_t.shape, rate, gen, z_t.dtype)
    return a, b
