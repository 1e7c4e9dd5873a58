"""Clustering evaluation: NMI, ARI, ACC (Hungarian alignment), FMI, and the
aligned confusion matrix.  All computation is float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import BadK, DimMismatch, TooFewSamples


@dataclass
class MetricReport:
    nmi: float
    ari: float
    acc: float
    fmi: float
    mapping: dict[int, int]          # predicted cluster -> ground-truth class
    confusion: np.ndarray            # aligned counts, diagonal = correct

    @property
    def average(self) -> float:
        return (self.nmi + self.ari + self.acc + self.fmi) / 4.0

    def as_dict(self) -> dict:
        return {
            "nmi": self.nmi, "ari": self.ari, "acc": self.acc, "fmi": self.fmi,
            "avg": self.average,
            "mapping": {int(k): int(v) for k, v in self.mapping.items()},
            "confusion": self.confusion.tolist(),
        }


def _check(gt: np.ndarray, pred: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gt = np.asarray(gt, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gt.shape != pred.shape or gt.ndim != 1:
        raise DimMismatch(f"label shapes {gt.shape} vs {pred.shape}")
    return gt, pred


def contingency(gt: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """Count matrix, predicted clusters x ground-truth classes."""
    gt, pred = _check(gt, pred)
    n_pred = int(pred.max()) + 1
    n_gt = int(gt.max()) + 1
    table = np.zeros((n_pred, n_gt), dtype=np.int64)
    np.add.at(table, (pred, gt), 1)
    return table


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(gt: np.ndarray, pred: np.ndarray) -> float:
    """Mutual information normalized by the arithmetic mean of the two
    entropies (natural log)."""
    gt, pred = _check(gt, pred)
    table = contingency(gt, pred).astype(np.float64)
    n = table.sum()
    h_pred = _entropy(table.sum(axis=1))
    h_gt = _entropy(table.sum(axis=0))
    if h_pred == 0.0 and h_gt == 0.0:
        return 1.0  # both constant, necessarily identical partitions
    if h_pred == 0.0 or h_gt == 0.0:
        return 0.0
    pu = table.sum(axis=1) / n
    pv = table.sum(axis=0) / n
    pij = table / n
    mask = pij > 0
    mi = float((pij[mask] * np.log(pij[mask] / np.outer(pu, pv)[mask])).sum())
    return mi / (0.5 * (h_gt + h_pred))


def _comb2(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.float64)
    return x * (x - 1.0) / 2.0


def ari(gt: np.ndarray, pred: np.ndarray) -> float:
    gt, pred = _check(gt, pred)
    n = len(gt)
    if n < 2:
        raise TooFewSamples("ARI needs at least 2 samples")
    table = contingency(gt, pred)
    sum_ij = _comb2(table).sum()
    sum_u = _comb2(table.sum(axis=1)).sum()
    sum_v = _comb2(table.sum(axis=0)).sum()
    expected = sum_u * sum_v / _comb2(np.array([n]))[0]
    max_index = 0.5 * (sum_u + sum_v)
    if max_index == expected:
        return 1.0 if sum_ij == expected else 0.0
    return float((sum_ij - expected) / (max_index - expected))


def acc(gt: np.ndarray, pred: np.ndarray, k: int | None = None
        ) -> tuple[float, dict[int, int]]:
    """Best one-to-one cluster-to-class matched fraction via the Hungarian
    algorithm on the negated contingency table (square-padded)."""
    gt, pred = _check(gt, pred)
    if k is None:
        k = int(max(gt.max(), pred.max())) + 1
    if gt.max() >= k or pred.max() >= k:
        raise BadK(f"labels exceed k={k}")
    table = np.zeros((k, k), dtype=np.int64)
    np.add.at(table, (pred, gt), 1)
    rows, cols = linear_sum_assignment(-table)
    mapping = {int(r): int(c) for r, c in zip(rows, cols)}
    matched = table[rows, cols].sum()
    return float(matched / len(gt)), mapping


def fmi(gt: np.ndarray, pred: np.ndarray) -> float:
    """Pair-counting index TP / sqrt((TP+FP)(TP+FN)); 0 when TP is 0."""
    gt, pred = _check(gt, pred)
    if len(gt) < 2:
        raise TooFewSamples("FMI needs at least 2 samples")
    table = contingency(gt, pred)
    tp = _comb2(table).sum()
    tp_fp = _comb2(table.sum(axis=1)).sum()  # pairs in the same predicted cluster
    tp_fn = _comb2(table.sum(axis=0)).sum()  # pairs in the same true class
    if tp == 0.0:
        return 0.0
    return float(tp / np.sqrt(tp_fp * tp_fn))


def confusion(gt: np.ndarray, pred: np.ndarray, mapping: dict[int, int]
              ) -> np.ndarray:
    """Contingency table with predicted rows re-indexed by the Hungarian
    mapping so the diagonal counts correct assignments."""
    gt, pred = _check(gt, pred)
    k = max(len(mapping), int(gt.max()) + 1)
    table = np.zeros((k, k), dtype=np.int64)
    np.add.at(table, (pred, gt), 1)
    aligned = np.zeros_like(table)
    for r in range(k):
        aligned[mapping.get(r, r)] = table[r]
    return aligned


def evaluate(gt: np.ndarray, pred: np.ndarray, k: int | None = None) -> MetricReport:
    score, mapping = acc(gt, pred, k)
    return MetricReport(
        nmi=nmi(gt, pred), ari=ari(gt, pred), acc=score, fmi=fmi(gt, pred),
        mapping=mapping, confusion=confusion(gt, pred, mapping))
