"""Bicluster evaluation: matched overlap scores and link-prediction curves.

Biclusters are Cartesian products of a row set and a column set, so set
sizes and intersections reduce to row/column index arithmetic. The matched
scores build a confusion matrix between two collections (intersection
counts for CE, Jaccard indices for CS), solve the optimal one-to-one
assignment and normalize the matched sum. Relevance and recovery are the
assignment-free best-match means. AUC uses the rank-statistic formulation
with midrank tie handling; AUPR is the step-curve average precision.
"""

from __future__ import annotations

import itertools
import json
import warnings

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import rankdata

from .model import FactorPair, _values, success_probability

__all__ = [
    "Bicluster",
    "BiclusterSet",
    "extract_biclusters",
    "jaccard",
    "confusion_matrix",
    "match_and_score",
    "relevance_recovery",
    "auc_aupr",
    "UndefinedMetricError",
]


class UndefinedMetricError(ValueError):
    """Raised when a metric is undefined for the given inputs."""


class Bicluster:
    """One bicluster: the product of a row index set and a column index set."""

    __slots__ = ("rows", "cols")

    def __init__(self, rows, cols):
        self.rows = np.unique(np.asarray(rows, dtype=np.int64))
        self.cols = np.unique(np.asarray(cols, dtype=np.int64))
        if self.rows.size and self.rows[0] < 0 or self.cols.size and self.cols[0] < 0:
            raise ValueError("indices must be non-negative")

    @property
    def size(self) -> int:
        return int(self.rows.size) * int(self.cols.size)

    def cells(self) -> set[tuple[int, int]]:
        return {(int(r), int(c)) for r in self.rows for c in self.cols}

    def __repr__(self) -> str:
        return f"Bicluster({self.rows.size} rows x {self.cols.size} cols)"


class BiclusterSet:
    """A list of biclusters; empty ones are dropped with a warning."""

    def __init__(self, clusters):
        kept = []
        for c in clusters:
            if c.size == 0:
                warnings.warn("dropping empty bicluster", stacklevel=2)
                continue
            kept.append(c)
        self.clusters = kept

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    def __getitem__(self, i) -> Bicluster:
        return self.clusters[i]

    def to_records(self) -> list[dict]:
        """Interchange form: ``[{"k": i, "rows": [...], "cols": [...]}, ...]``."""
        return [
            {"k": i, "rows": c.rows.tolist(), "cols": c.cols.tolist()}
            for i, c in enumerate(self.clusters)
        ]

    @classmethod
    def from_records(cls, records) -> "BiclusterSet":
        return cls([Bicluster(rec["rows"], rec["cols"]) for rec in records])

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_records(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "BiclusterSet":
        with open(path) as fh:
            return cls.from_records(json.load(fh))


def extract_biclusters(fp: FactorPair, dedup: bool = False) -> BiclusterSet:
    """Read biclusters off the nonzero supports of an exact-sparse factor pair.

    Columns whose row or column support is empty yield no bicluster.
    Duplicate supports are kept unless ``dedup`` is set.
    """
    clusters = []
    seen = set()
    for k in range(fp.n_factors):
        rows = np.nonzero(fp.A[:, k])[0]
        cols = np.nonzero(fp.B[:, k])[0]
        if rows.size == 0 or cols.size == 0:
            continue
        if dedup:
            key = (rows.tobytes(), cols.tobytes())
            if key in seen:
                continue
            seen.add(key)
        clusters.append(Bicluster(rows, cols))
    return BiclusterSet(clusters)


def _intersection_size(a: Bicluster, b: Bicluster) -> int:
    nr = np.intersect1d(a.rows, b.rows, assume_unique=True).size
    nc = np.intersect1d(a.cols, b.cols, assume_unique=True).size
    return int(nr) * int(nc)


def jaccard(a: Bicluster, b: Bicluster) -> float:
    """Jaccard index of two biclusters' cell sets."""
    inter = _intersection_size(a, b)
    union = a.size + b.size - inter
    return inter / union if union else 0.0


def confusion_matrix(truth: BiclusterSet, est: BiclusterSet, kind: str = "cs") -> np.ndarray:
    """Pairwise overlap matrix: intersection counts (``"ce"``) or Jaccard (``"cs"``)."""
    if kind not in ("ce", "cs"):
        raise ValueError("kind must be 'ce' or 'cs'")
    m = np.zeros((len(truth), len(est)))
    for i, ci in enumerate(truth):
        for j, cj in enumerate(est):
            m[i, j] = _intersection_size(ci, cj) if kind == "ce" else jaccard(ci, cj)
    return m


def _union_cell_count(truth: BiclusterSet, est: BiclusterSet) -> int:
    cells: set[tuple[int, int]] = set()
    for c in itertools.chain(truth, est):
        cells |= c.cells()
    return len(cells)


def match_and_score(
    truth: BiclusterSet,
    est: BiclusterSet,
    kind: str = "cs",
    ce_norm: str = "union",
) -> float:
    """Optimal one-to-one matched overlap score in [0, 1].

    The confusion matrix is zero-padded to square and the maximum-weight
    assignment solved exactly. CS divides the matched Jaccard sum by the
    larger collection size. CE divides the matched intersection counts by
    the number of distinct cells covered by either collection
    (``ce_norm="union"``, the default, which keeps the score in [0, 1]) or
    by the larger collection size (``ce_norm="max"``).
    """
    if len(truth) == 0 and len(est) == 0:
        return 1.0
    if len(truth) == 0 or len(est) == 0:
        return 0.0
    m = confusion_matrix(truth, est, kind=kind)
    n = max(m.shape)
    padded = np.zeros((n, n))
    padded[: m.shape[0], : m.shape[1]] = m
    rows, cols = linear_sum_assignment(padded, maximize=True)
    total = float(padded[rows, cols].sum())
    if kind == "cs" or ce_norm == "max":
        norm = float(max(len(truth), len(est)))
    elif ce_norm == "union":
        norm = float(_union_cell_count(truth, est))
    else:
        raise ValueError("ce_norm must be 'union' or 'max'")
    return total / norm


def relevance_recovery(truth: BiclusterSet, est: BiclusterSet) -> tuple[float, float]:
    """Mean best Jaccard of estimate against truth, and of truth against estimate."""
    if len(truth) == 0 and len(est) == 0:
        return 1.0, 1.0
    if len(truth) == 0 or len(est) == 0:
        return 0.0, 0.0
    m = confusion_matrix(truth, est, kind="cs")
    relevance = float(m.max(axis=0).mean())
    recovery = float(m.max(axis=1).mean())
    return relevance, recovery


def auc_aupr(Y, fp: FactorPair) -> tuple[float, float]:
    """ROC and precision-recall areas for predicting the one-cells.

    Scores are the fitted success probabilities. AUC is the Mann-Whitney
    statistic with ties counted at midrank; AUPR sums precision over the
    recall increments at each distinct score threshold.
    """
    Yv = _values(Y)
    labels = Yv.ravel()
    scores = success_probability(fp.logits()).ravel()
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC/AUPR need at least one positive and one negative cell")
    ranks = rankdata(scores)
    auc = (ranks[labels == 1.0].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    order = np.argsort(-scores, kind="stable")
    sorted_labels = labels[order]
    sorted_scores = scores[order]
    boundaries = np.nonzero(np.diff(sorted_scores))[0]
    idx = np.concatenate([boundaries, [labels.size - 1]])
    tp = np.cumsum(sorted_labels)[idx]
    count = idx + 1.0
    precision = tp / count
    recall = tp / n_pos
    recall_prev = np.concatenate([[0.0], recall[:-1]])
    aupr = float(np.sum((recall - recall_prev) * precision))
    return float(auc), aupr
