"""Training orchestration: contrastive pretraining, the curriculum
clustering / selection / dual representation-learning loop, and inference.

Per curriculum round: embed everything in eval mode, cluster (K-Means++
on round 1, inherited centroids afterwards), split samples into high- and
low-quality sets by density selection, then train one or more epochs of
supervised contrastive loss on the high-quality set followed by
unsupervised contrastive loss on the complement.  The selection threshold
t grows linearly until it reaches 1, which ends training.

Variants: "full" and "text_only" are the two pipeline flavors; the
ablation tags (no_pretrain, random_step2, scl_only, kmeans_only,
ucl_only, mse) switch off or replace individual stages.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np
import torch
from torch import nn

from .data import Dataset
from .kmeans import ClusterState, cluster_round, kmeanspp_init, lloyd
from .losses import ContrastiveHead, ViewBatch, dropout_twice_views, mscl_loss, ucl_loss
from .model import EncoderConfig, MultimodalEncoder
from .numerics import rng_stream, torch_gen
from .selection import SelectionConfig, SelectionResult, select_all

VARIANTS = ("full", "text_only", "no_pretrain", "random_step2", "scl_only",
            "kmeans_only", "ucl_only", "mse")


@dataclass
class TrainConfig:
    t0: float = 0.1
    delta: float = 0.05
    batch_size: int = 128
    pretrain_epochs: int = 20
    round_epochs: int = 1
    lr_pretrain: float = 3e-4
    lr_train: float = 3e-4
    tau1: float = 0.2
    tau2: float = 1.4
    tau3: float = 6.0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    weight_decay: float = 0.01
    text_dropout: float = 0.1     # dropout-twice rate for the text_only variant
    shared_phi3: bool = False     # reuse the pretraining head for low-quality refinement
    seed: int = 0
    variant: str = "full"

    def __post_init__(self):
        if not (0.0 <= self.t0 <= 1.0) or self.delta <= 0 or self.batch_size < 2:
            raise ValueError("bad curriculum config")
        if min(self.tau1, self.tau2, self.tau3) <= 0:
            raise ValueError("temperatures must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def num_rounds(self) -> int:
        return max(0, math.ceil((1.0 - self.t0) / self.delta))


class Pipeline(nn.Module):
    """Encoder plus the three contrastive heads."""

    def __init__(self, enc_cfg: EncoderConfig, cfg: TrainConfig):
        super().__init__()
        self.enc_cfg = enc_cfg
        self.encoder = MultimodalEncoder(enc_cfg, seed=cfg.seed)
        d, p = enc_cfg.hidden_dim, enc_cfg.proj_dim
        self.phi1 = ContrastiveHead(d, p, cfg.tau1, "phi1", seed=cfg.seed)
        self.phi2 = ContrastiveHead(d, p, cfg.tau2, "phi2", seed=cfg.seed)
        self.phi3 = (self.phi1 if cfg.shared_phi3
                     else ContrastiveHead(d, p, cfg.tau3, "phi3", seed=cfg.seed))


@dataclass
class RoundLog:
    round: int
    t: float
    inertia: float
    n_high: int
    mscl: float | None = None
    ucl: float | None = None
    mse: float | None = None
    # instrumentation: the selection split and which samples each pass touched
    high_idx: np.ndarray | None = None
    low_idx: np.ndarray | None = None
    touched_mscl: list[int] = field(default_factory=list)
    touched_ucl: list[int] = field(default_factory=list)


@dataclass
class RunArtifacts:
    model: Pipeline
    final_state: ClusterState | None
    rounds: list[RoundLog]
    embeddings: np.ndarray
    pretrain_losses: list[float]


def _batch_tensors(dataset: Dataset, idx: np.ndarray) -> dict[str, torch.Tensor]:
    recs = [dataset.records[i] for i in idx]
    return {
        "text": torch.from_numpy(np.stack([r.text for r in recs])),
        "video": torch.from_numpy(np.stack([r.video for r in recs])),
        "audio": torch.from_numpy(np.stack([r.audio for r in recs])),
        "video_len": torch.tensor([r.video_len for r in recs], dtype=torch.int64),
        "audio_len": torch.tensor([r.audio_len for r in recs], dtype=torch.int64),
    }


def embed_all(model: Pipeline, dataset: Dataset, variant: str,
              chunk: int = 512) -> np.ndarray:
    """Eval-mode embeddings for every sample: z_TAV, or z_T for text_only."""
    model.eval()
    out = []
    with torch.no_grad():
        for start in range(0, len(dataset), chunk):
            idx = np.arange(start, min(start + chunk, len(dataset)))
            batch = _batch_tensors(dataset, idx)
            if variant == "text_only":
                z = model.encoder.encode_text(batch["text"])
            else:
                z = model.encoder(batch, train=False)
            out.append(z.numpy())
    return np.concatenate(out, axis=0)


def _view_batch(model: Pipeline, dataset: Dataset, idx: np.ndarray,
                head: ContrastiveHead, cfg: TrainConfig,
                gen: torch.Generator,
                labels: np.ndarray | None = None) -> ViewBatch:
    """Project augmentation views for a minibatch: three masked-modality
    views in multimodal variants, two dropout views in text_only."""
    batch = _batch_tensors(dataset, idx)
    if cfg.variant == "text_only":
        z_t = model.encoder.encode_text(batch["text"])
        a, b = dropout_twice_views(z_t, cfg.text_dropout, gen)
        views = [a, b]
    else:
        views = list(model.encoder.make_views(batch, train=True, gen=gen))
    emb = head(torch.cat(views, dim=0))
    origin = torch.tensor(np.tile(idx, len(views)), dtype=torch.int64)
    pseudo = None
    if labels is not None:
        pseudo = torch.tensor(np.tile(labels[idx], len(views)), dtype=torch.int64)
    return ViewBatch(embeddings=emb, origin=origin, pseudo_label=pseudo)


def _minibatches(idx: np.ndarray, batch_size: int,
                 rng: np.random.Generator) -> list[np.ndarray]:
    order = rng.permutation(idx)
    batches = [order[s:s + batch_size] for s in range(0, len(order), batch_size)]
    return [b for b in batches if len(b) >= 2]  # a contrastive batch needs negatives


def _optimizer(params, lr: float, cfg: TrainConfig) -> torch.optim.AdamW:
    return torch.optim.AdamW(params, lr=lr, betas=(cfg.beta1, cfg.beta2),
                             eps=cfg.adam_eps, weight_decay=cfg.weight_decay)


def pretrain(model: Pipeline, dataset: Dataset, cfg: TrainConfig) -> list[float]:
    """Unsupervised contrastive pretraining with the phi1 head; returns the
    mean loss per epoch."""
    model.train()
    opt = _optimizer(
        list(model.encoder.parameters()) + list(model.phi1.parameters()),
        cfg.lr_pretrain, cfg)
    gen = torch_gen(cfg.seed, "dropout/pretrain")
    epoch_losses = []
    for epoch in range(cfg.pretrain_epochs):
        rng = rng_stream(cfg.seed, f"shuffle/pretrain/{epoch}")
        losses = []
        for idx in _minibatches(np.arange(len(dataset)), cfg.batch_size, rng):
            batch = _view_batch(model, dataset, idx, model.phi1, cfg, gen)
            loss = ucl_loss(batch, cfg.tau1)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
        epoch_losses.append(float(np.mean(losses)) if losses else float("nan"))
    return epoch_losses


def curriculum_train(model: Pipeline, dataset: Dataset, cfg: TrainConfig,
                     sel_cfg: SelectionConfig | None = None) -> RunArtifacts:
    """The curriculum loop.  Round r (1-based) uses threshold
    t = min(1, t0 + delta*r); the loop ends after the round where t reaches 1,
    giving ceil((1 - t0)/delta) rounds total."""
    sel_cfg = sel_cfg or SelectionConfig()
    k = dataset.num_classes
    kmeans_rng = rng_stream(cfg.seed, "kmeans")
    sel_rng = rng_stream(cfg.seed, "selection")
    gen = torch_gen(cfg.seed, "dropout/train")
    opt = _optimizer(
        list(model.encoder.parameters()) + list(model.phi2.parameters())
        + list(model.phi3.parameters()),
        cfg.lr_train, cfg)

    state: ClusterState | None = None
    rounds: list[RoundLog] = []
    for r in range(1, cfg.num_rounds + 1):
        t = min(1.0, cfg.t0 + cfg.delta * r)
        points = embed_all(model, dataset, cfg.variant)
        state = cluster_round(points, state, k, kmeans_rng)

        if cfg.variant in ("kmeans_only", "ucl_only", "mse"):
            sel = None
            log = RoundLog(round=r, t=t, inertia=state.inertia, n_high=0)
        else:
            mode = "random" if cfg.variant == "random_step2" else sel_cfg.mode
            round_sel_cfg = SelectionConfig(
                t=t, lower_bound=sel_cfg.lower_bound, interval=sel_cfg.interval,
                num_candidates=sel_cfg.num_candidates, mode=mode,
                fixed_k_near=sel_cfg.fixed_k_near,
                cohesion_objective=sel_cfg.cohesion_objective)
            sel = select_all(points, state, round_sel_cfg, sel_rng)
            log = RoundLog(round=r, t=t, inertia=state.inertia,
                           n_high=len(sel.high_quality),
                           high_idx=sel.high_quality, low_idx=sel.low_quality)

        for epoch in range(cfg.round_epochs):
            _train_round_epoch(model, dataset, cfg, opt, gen, state, sel, r,
                               epoch, log)
        rounds.append(log)

    return RunArtifacts(model=model, final_state=state, rounds=rounds,
                        embeddings=embed_all(model, dataset, cfg.variant),
                        pretrain_losses=[])


def _train_round_epoch(model: Pipeline, dataset: Dataset, cfg: TrainConfig,
                       opt, gen, state: ClusterState,
                       sel: SelectionResult | None, r: int, epoch: int,
                       log: RoundLog) -> None:
    model.train()
    assignments = state.assignments

    if cfg.variant == "kmeans_only":
        return

    if cfg.variant == "mse":
        rng = rng_stream(cfg.seed, f"shuffle/round{r}/{epoch}/mse")
        centroids = torch.from_numpy(state.centroids.astype(np.float32))
        losses = []
        for idx in _minibatches(np.arange(len(dataset)), cfg.batch_size, rng):
            batch = _batch_tensors(dataset, idx)
            z = model.encoder(batch, train=True, gen=gen)
            target = centroids[torch.from_numpy(assignments[idx])]
            loss = torch.mean((z - target) ** 2)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
        log.mse = float(np.mean(losses)) if losses else None
        return

    if cfg.variant == "ucl_only":
        rng = rng_stream(cfg.seed, f"shuffle/round{r}/{epoch}/ucl")
        losses = []
        for idx in _minibatches(np.arange(len(dataset)), cfg.batch_size, rng):
            batch = _view_batch(model, dataset, idx, model.phi3, cfg, gen)
            loss = ucl_loss(batch, cfg.tau3)
            opt.zero_grad()
            loss.backward()
            opt.step()
            losses.append(loss.item())
            log.touched_ucl.extend(int(i) for i in idx)
        log.ucl = float(np.mean(losses)) if losses else None
        return

    # supervised contrastive pass on the high-quality set
    rng = rng_stream(cfg.seed, f"shuffle/round{r}/{epoch}/mscl")
    losses = []
    for idx in _minibatches(sel.high_quality, cfg.batch_size, rng):
        batch = _view_batch(model, dataset, idx, model.phi2, cfg, gen,
                            labels=assignments)
        loss = mscl_loss(batch, cfg.tau2)
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses.append(loss.item())
        log.touched_mscl.extend(int(i) for i in idx)
    log.mscl = float(np.mean(losses)) if losses else None

    if cfg.variant == "scl_only" or len(sel.low_quality) == 0:
        return

    # unsupervised contrastive pass on the complement
    rng = rng_stream(cfg.seed, f"shuffle/round{r}/{epoch}/ucl")
    losses = []
    for idx in _minibatches(sel.low_quality, cfg.batch_size, rng):
        batch = _view_batch(model, dataset, idx, model.phi3, cfg, gen)
        loss = ucl_loss(batch, cfg.tau3)
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses.append(loss.item())
        log.touched_ucl.extend(int(i) for i in idx)
    log.ucl = float(np.mean(losses)) if losses else None


def infer(model: Pipeline, dataset: Dataset, k: int, seed: int,
          variant: str = "full") -> np.ndarray:
    """Fresh K-Means++ on the trained eval-mode embeddings."""
    points = embed_all(model, dataset, variant)
    rng = rng_stream(seed, "infer_kmeans")
    state = lloyd(points, kmeanspp_init(points, k, rng))
    return state.assignments


def run_pipeline(dataset: Dataset, enc_cfg: EncoderConfig, cfg: TrainConfig,
                 sel_cfg: SelectionConfig | None = None
                 ) -> tuple[RunArtifacts, np.ndarray]:
    """Pretrain (unless ablated), run the curriculum, and cluster the final
    embeddings.  Returns the artifacts and the inferred assignments."""
    train_data = dataset.training_view()
    model = Pipeline(enc_cfg, cfg)
    pre_losses = ([] if cfg.variant == "no_pretrain"
                  else pretrain(model, train_data, cfg))
    artifacts = curriculum_train(model, train_data, cfg, sel_cfg)
    artifacts.pretrain_losses = pre_losses
    assignments = infer(model, train_data, dataset.num_classes, cfg.seed,
                        cfg.variant)
    return artifacts, assignments


# --- checkpointing -----------------------------------------------------------

CHECKPOINT_VERSION = 1


def config_hash(*cfgs) -> str:
    blob = json.dumps([asdict(c) for c in cfgs], sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def save_checkpoint(path, model: Pipeline, enc_cfg: EncoderConfig,
                    cfg: TrainConfig) -> None:
    torch.save({
        "version": CHECKPOINT_VERSION,
        "config_hash": config_hash(enc_cfg, cfg),
        "enc_cfg": asdict(enc_cfg),
        "train_cfg": asdict(cfg),
        "state_dict": model.state_dict(),
    }, path)


def load_checkpoint(path) -> Pipeline:
    blob = torch.load(path, weights_only=False)
    if blob.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {blob.get('version')}")
    enc_cfg = EncoderConfig(**blob["enc_cfg"])
    cfg = TrainConfig(**blob["train_cfg"])
    model = Pipeline(enc_cfg, cfg)
    model.load_state_dict(blob["state_dict"])
    return model
