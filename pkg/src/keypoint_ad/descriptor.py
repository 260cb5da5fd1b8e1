"""Fixed-length per-image descriptors and z-score normalization.

Each image is summarized by the scale and response of its K strongest
keypoints, interleaved as [scale_1, response_1, ..., scale_K, response_K]
and zero padded when fewer than K keypoints were detected.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detector import Keypoint, sort_keypoints

LABEL_OK = "OK"
LABEL_NOK = "NOK"
DEFAULT_K = 5

# stds this small mark a dimension as constant; its std is stored as 1
CONSTANT_STD_CUTOFF = 1e-12


def top_k(keypoints, k: int) -> list[Keypoint]:
    """The k strongest keypoints under the detector's total order.

    Sorting is by response descending, then scale descending, then (y, x)
    ascending, so the selection is deterministic under input permutation.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return sort_keypoints(keypoints)[:k]


def build_vector(keypoints, k: int = DEFAULT_K) -> np.ndarray:
    """Interleaved [scale, response] pairs of the top-k keypoints, zero padded."""
    strongest = top_k(keypoints, k)
    vec = np.zeros(2 * k, dtype=np.float64)
    for rank, kp in enumerate(strongest):
        vec[2 * rank] = kp.scale
        vec[2 * rank + 1] = kp.response
    return vec


@dataclass(frozen=True)
class Normalizer:
    """Per-dimension mean and population standard deviation for z-scoring.

    Dimensions whose std fell below the cutoff are flagged constant and
    stored with std 1 so scaling never divides by zero.
    """

    means: np.ndarray
    stds: np.ndarray
    constant: np.ndarray

    @property
    def dim(self) -> int:
        return self.means.shape[0]


def fit_normalizer(matrix: np.ndarray) -> Normalizer:
    """Fit per-dimension z-score statistics on a training matrix (n >= 2 rows)."""
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {x.shape}")
    if x.shape[0] < 2:
        raise ValueError(f"need at least 2 rows to fit a normalizer, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("matrix contains NaN or Inf")
    means = x.mean(axis=0)
    stds = x.std(axis=0)  # population (1/n) convention
    constant = stds < CONSTANT_STD_CUTOFF
    stds = np.where(constant, 1.0, stds)
    return Normalizer(means=means, stds=stds, constant=constant)


def apply_normalizer(norm: Normalizer, matrix: np.ndarray) -> np.ndarray:
    """Z-score rows with training statistics: (x - mean) / std per dimension."""
    x = np.asarray(matrix, dtype=np.float64)
    if x.shape[-1] != norm.dim:
        raise ValueError(f"dimension mismatch: normalizer has {norm.dim}, data has {x.shape[-1]}")
    return (x - norm.means) / norm.stds


def invert_normalizer(norm: Normalizer, matrix: np.ndarray) -> np.ndarray:
    """Undo z-scoring: x * std + mean."""
    x = np.asarray(matrix, dtype=np.float64)
    if x.shape[-1] != norm.dim:
        raise ValueError(f"dimension mismatch: normalizer has {norm.dim}, data has {x.shape[-1]}")
    return x * norm.stds + norm.means


@dataclass
class LabeledDataset:
    """Feature matrix with OK/NOK labels and per-row sample ids."""

    matrix: np.ndarray
    labels: np.ndarray
    sample_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=object)
        if not self.sample_ids:
            self.sample_ids = [f"sample_{i}" for i in range(self.matrix.shape[0])]
        n = self.matrix.shape[0]
        if self.labels.shape[0] != n or len(self.sample_ids) != n:
            raise ValueError("matrix, labels and sample_ids row counts disagree")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("feature matrix contains NaN or Inf")
        bad = set(self.labels) - {LABEL_OK, LABEL_NOK}
        if bad:
            raise ValueError(f"unknown labels: {sorted(bad)}")

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def nok_mask(self) -> np.ndarray:
        return np.asarray([lab == LABEL_NOK for lab in self.labels], dtype=bool)

    def subset(self, index) -> "LabeledDataset":
        idx = np.asarray(index)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return LabeledDataset(
            matrix=self.matrix[idx],
            labels=self.labels[idx],
            sample_ids=[self.sample_ids[i] for i in idx],
        )


def feature_header(k: int) -> list[str]:
    cols = ["id", "label"]
    for rank in range(1, k + 1):
        cols += [f"s{rank}", f"r{rank}"]
    return cols


def write_features_csv(path, dataset: LabeledDataset) -> None:
    """Persist features as CSV with header id,label,s1,r1,...,sK,rK."""
    n, dim = dataset.matrix.shape
    if dim % 2 != 0:
        raise ValueError("feature dimension must be even (scale/response pairs)")
    header = feature_header(dim // 2)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            cells = [dataset.sample_ids[i], str(dataset.labels[i])]
            cells += [repr(float(v)) for v in dataset.matrix[i]]
            fh.write(",".join(cells) + "\n")


def read_features_csv(path) -> LabeledDataset:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["id", "label"] or (len(header) - 2) % 2 != 0:
            raise ValueError(f"malformed feature CSV header in {path}")
        ids, labels, rows = [], [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise ValueError(f"row width {len(cells)} does not match header in {path}")
            ids.append(cells[0])
            labels.append(cells[1])
            rows.append([float(v) for v in cells[2:]])
    matrix = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, len(header) - 2))
    return LabeledDataset(matrix=matrix, labels=np.asarray(labels, dtype=object), sample_ids=ids)
