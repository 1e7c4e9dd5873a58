"""Unsupervised multimodal clustering on pre-extracted per-modality
features: masked-view contrastive pretraining, curriculum clustering with
density-based high-quality sample selection, dual contrastive
representation learning, and a clustering evaluation suite."""

from .data import Dataset, FeatureRecord, SynthSpec, generate_synthetic, load_dataset
from .kmeans import ClusterState, cluster_round, kmeanspp_init, lloyd
from .metrics import MetricReport, evaluate
from .model import EncoderConfig, MultimodalEncoder
from .selection import SelectionConfig, SelectionResult, select_all
from .trainer import Pipeline, RunArtifacts, TrainConfig, infer, pretrain, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "Dataset", "FeatureRecord", "SynthSpec", "generate_synthetic", "load_dataset",
    "ClusterState", "cluster_round", "kmeanspp_init", "lloyd",
    "MetricReport", "evaluate",
    "EncoderConfig", "MultimodalEncoder",
    "SelectionConfig", "SelectionResult", "select_all",
    "Pipeline", "RunArtifacts", "TrainConfig", "infer", "pretrain", "run_pipeline",
]
