"""Finite-difference verification of every trainable layer and both losses.

Each check builds a tiny float64 instance of the component, scalarizes its
output with a fixed random weighting, and compares autograd against
central differences on every parameter and input entry.
"""

from __future__ import annotations

import numpy as np
import torch

from .losses import ContrastiveHead, ViewBatch, mscl_loss, ucl_loss
from .model import EncoderConfig, MultimodalEncoder
from .numerics import GradCheckResult, grad_check, rng_stream


def _t(rng, *shape) -> torch.Tensor:
    return torch.tensor(rng.standard_normal(shape), dtype=torch.float64)


def _named_params(module: torch.nn.Module, prefix: str) -> dict[str, torch.Tensor]:
    return {f"{prefix}.{n}": p for n, p in module.named_parameters()}


def grad_check_suite(seed: int = 0, tol: float = 1e-4) -> dict[str, GradCheckResult]:
    """Run all gradient checks; returns {component name: result}."""
    rng = rng_stream(seed, "gradcheck")
    cfg = EncoderConfig(text_dim=5, video_dim=4, audio_dim=4, hidden_dim=8,
                        attn_heads=2, fusion_dropout=0.0, proj_dim=6)
    model = MultimodalEncoder(cfg, seed=seed).double()
    results: dict[str, GradCheckResult] = {}

    w = _t(rng, cfg.hidden_dim)  # fixed scalarization weights

    # text projection f_T
    x_t = _t(rng, 3, cfg.text_dim)
    tensors = {"x_t": x_t, **_named_params(model.f_t, "f_t")}
    results["text_projection"] = grad_check(
        lambda: (model.encode_text(x_t) * w).sum(), tensors, tol)

    # audio / video sequence encoders (linear + attention block, padded input)
    for name, enc, dim in (("audio_encoder", model.enc_a, cfg.audio_dim),
                           ("video_encoder", model.enc_v, cfg.video_dim)):
        x = _t(rng, 2, 3, dim)
        lens = torch.tensor([3, 2])
        tensors = {"x": x, **_named_params(enc, name)}
        results[name] = grad_check(
            lambda enc=enc, x=x: (enc(x, lens) * w).sum(), tensors, tol)

    # fusion layer (eval mode, dropout identity)
    z_t, z_a, z_v = (_t(rng, 3, cfg.hidden_dim) for _ in range(3))
    tensors = {"z_t": z_t, "z_a": z_a, "z_v": z_v,
               **_named_params(model.fusion, "fusion")}
    results["fusion"] = grad_check(
        lambda: (model.fuse(z_t, z_a, z_v, train=False) * w).sum(), tensors, tol)

    # contrastive heads (including the L2 normalization)
    wp = _t(rng, cfg.proj_dim)
    for tag, tau in (("phi1", 0.2), ("phi2", 1.4), ("phi3", 6.0)):
        head = ContrastiveHead(cfg.hidden_dim, cfg.proj_dim, tau, tag,
                               seed=seed).double()
        z = _t(rng, 4, cfg.hidden_dim)
        tensors = {"z": z, **_named_params(head, tag)}
        results[f"head_{tag}"] = grad_check(
            lambda head=head, z=z: (head(z) * wp).sum(), tensors, tol)

    # unsupervised contrastive loss through its head
    head1 = ContrastiveHead(cfg.hidden_dim, cfg.proj_dim, 0.2, "phi1", seed=seed).double()
    z = _t(rng, 9, cfg.hidden_dim)  # 3 samples x 3 views
    origin = torch.tensor([0, 1, 2] * 3)
    tensors = {"z": z, **_named_params(head1, "phi1")}
    results["ucl_loss"] = grad_check(
        lambda: ucl_loss(ViewBatch(head1(z), origin), 0.2), tensors, tol)

    # supervised contrastive loss through its head
    head2 = ContrastiveHead(cfg.hidden_dim, cfg.proj_dim, 1.4, "phi2", seed=seed).double()
    labels = torch.tensor([0, 0, 1] * 3)
    tensors = {"z": z, **_named_params(head2, "phi2")}
    results["mscl_loss"] = grad_check(
        lambda: mscl_loss(ViewBatch(head2(z), origin, labels), 1.4), tensors, tol)

    return results
