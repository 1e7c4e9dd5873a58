"""Small numeric primitives: normalization, distances, seeded RNG streams,
and a finite-difference gradient checker for the trainable layers.

Training arithmetic runs in float32; everything here that verifies or
measures (grad_check, distances used by metrics) runs in float64.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import torch

from .errors import DimMismatch, GradNonFinite, NormZero

NORM_EPS = 0.0  # zero-norm input is an error, not a clamp


def l2_normalize(v: np.ndarray) -> np.ndarray:
    """Scale v to unit Euclidean norm, preserving direction."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise NormZero("cannot normalize a zero vector")
    return v / n


def euclidean(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatch(f"shape {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


# --- seeded RNG streams ------------------------------------------------------
#
# Every stochastic component (init, dropout, kmeans, shuffle, ...) draws from
# its own named stream so seeds reproduce independently of call order.

def _stream_key(seed: int, stream: str) -> int:
    h = hashlib.sha256(stream.encode("utf-8")).digest()
    return int.from_bytes(h[:8], "little")


def rng_stream(seed: int, stream: str) -> np.random.Generator:
    """Numpy generator for (seed, stream); identical args give identical draws."""
    return np.random.default_rng(np.random.SeedSequence([seed, _stream_key(seed, stream)]))


def torch_gen(seed: int, stream: str) -> torch.Generator:
    """Torch generator derived from the same (seed, stream) space."""
    ss = np.random.SeedSequence([seed, _stream_key(seed, stream)])
    g = torch.Generator()
    g.manual_seed(int(ss.generate_state(1, dtype=np.uint64)[0] >> 1))
    return g


# --- gradient checking -------------------------------------------------------

@dataclass
class GradCheckResult:
    passed: bool
    max_rel_err: float
    worst: str  # "<tensor name>[flat index]" of the worst entry

    def __bool__(self) -> bool:
        return self.passed


def grad_check(
    fn: Callable[[], torch.Tensor],
    tensors: Mapping[str, torch.Tensor],
    tol: float = 1e-4,
    step: float = 1e-5,
) -> GradCheckResult:
    """Compare autograd gradients of the scalar fn() against central finite
    differences on every entry of the given float64 leaf tensors.

    fn must be deterministic (freeze dropout and any other stochastic parts)
    and must read the tensors passed here.
    """
    for name, t in tensors.items():
        if t.dtype != torch.float64:
            raise ValueError(f"{name}: grad_check requires float64 tensors")
        t.requires_grad_(True)

    out = fn()
    grads = torch.autograd.grad(out, list(tensors.values()), allow_unused=True)
    analytic = {}
    for (name, t), g in zip(tensors.items(), grads):
        g = torch.zeros_like(t) if g is None else g
        if not torch.isfinite(g).all():
            raise GradNonFinite(f"non-finite analytic gradient in {name}")
        analytic[name] = g.detach().clone()

    max_rel = 0.0
    worst = ""
    with torch.no_grad():
        for name, t in tensors.items():
            flat = t.view(-1)
            ga = analytic[name].view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + step
                f_plus = fn().item()
                flat[i] = orig - step
                f_minus = fn().item()
                flat[i] = orig
                num = (f_plus - f_minus) / (2.0 * step)
                if not np.isfinite(num):
                    raise GradNonFinite(f"non-finite numeric gradient in {name}[{i}]")
                a = ga[i].item()
                rel = abs(a - num) / max(abs(a), abs(num), 1e-6)
                if rel > max_rel:
                    max_rel = rel
                    worst = f"{name}[{i}]"
    for t in tensors.values():
        t.requires_grad_(False)
    return GradCheckResult(passed=max_rel < tol, max_rel_err=max_rel, worst=worst)
