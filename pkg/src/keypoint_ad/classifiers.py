"""Classifier suite behind a single train/score interface.

One-class models (``ocsvm``, ``svdd``) learn from OK samples, the
data-description sphere optionally pushed away from labeled NOK samples;
``svm`` is the binary soft-margin sibling for the semi-supervised split.
``gnb``, ``logreg`` and ``tree`` are conventional supervised baselines.

Every model scores with the same convention: higher = more anomalous.
Training is deterministic: no RNG anywhere, SMO pairs picked by maximal
KKT violation, ties resolved by lowest index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .descriptor import LABEL_NOK, LABEL_OK, Normalizer, apply_normalizer, fit_normalizer
from .smo import ConvergenceError, smo_minimize

__all__ = [
    "KernelSpec",
    "ModelConfig",
    "ConvergenceError",
    "OneClassSVMModel",
    "SVDDModel",
    "BinarySVMModel",
    "GNBModel",
    "LogRegModel",
    "TreeNode",
    "TreeModel",
    "train_ocsvm",
    "train_svdd",
    "train_svm",
    "train_gnb",
    "predict_gnb",
    "train_logreg",
    "train_tree",
    "score",
    "score_samples",
    "fit_model",
    "default_gamma",
]

logger = logging.getLogger(__name__)

MODEL_KINDS = ("ocsvm", "svdd", "svm", "gnb", "logreg", "tree")
ONE_CLASS_KINDS = ("ocsvm",)   # kinds that must be trained on OK rows only
OCC_KINDS = ("ocsvm", "svdd", "svm")

_SV_CUTOFF = 1e-12
_GNB_VAR_FLOOR = 1e-9


# ---------------------------------------------------------------------------
# kernel


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind != "rbf":
            raise ValueError(f"unsupported kernel kind {self.kind!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


def default_gamma(X: np.ndarray) -> float:
    """Scale heuristic 1 / (d * var(X)), falling back to 1/d on constant data."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    var = float(X.var())
    return 1.0 / (d * var) if var > 1e-12 else 1.0 / d


def rbf_gram(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    a2 = np.sum(A * A, axis=1)[:, None]
    b2 = np.sum(B * B, axis=1)[None, :]
    d2 = np.maximum(a2 + b2 - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * d2)


def _kernel_matrix(kernel: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return rbf_gram(A, B, kernel.gamma)


def _resolve_kernel(kernel: KernelSpec | None, X: np.ndarray) -> KernelSpec:
    return kernel if kernel is not None else KernelSpec(gamma=default_gamma(X))


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("training matrix contains NaN or Inf")
    return X


def _nok_mask(labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=object)
    bad = set(labels) - {LABEL_OK, LABEL_NOK}
    if bad:
        raise ValueError(f"unknown labels: {sorted(bad)}")
    return np.asarray([lab == LABEL_NOK for lab in labels], dtype=bool)


# ---------------------------------------------------------------------------
# model containers


@dataclass(frozen=True)
class OneClassSVMModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    rho: float
    kernel: KernelSpec
    nu: float
    normalizer: Normalizer | None = None

    kind = "ocsvm"

    @property
    def feature_dim(self) -> int:
        return self.support_vectors.shape[1]


@dataclass(frozen=True)
class SVDDModel:
    support_vectors: np.ndarray
    alphas: np.ndarray
    signs: np.ndarray
    radius_sq: float
    center_norm_sq: float
    kernel: KernelSpec
    c_pos: float
    c_neg: float
    normalizer: Normalizer | None = None

    kind = "svdd"

    @property
    def feature_dim(self) -> int:
        return self.support_vectors.shape[1]


@dataclass(frozen=True)
class BinarySVMModel:
    support_vectors: np.ndarray
    betas: np.ndarray  # alpha_i * y_i with y = +1 for OK rows
    bias: float
    kernel: KernelSpec
    c: float
    normalizer: Normalizer | None = None

    kind = "svm"

    @property
    def feature_dim(self) -> int:
        return self.support_vectors.shape[1]


@dataclass(frozen=True)
class GNBModel:
    priors: np.ndarray       # [P(OK), P(NOK)]
    means: np.ndarray        # (2, d), row 0 = OK
    variances: np.ndarray    # (2, d), floored
    normalizer: Normalizer | None = None

    kind = "gnb"

    @property
    def feature_dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class LogRegModel:
    weights: np.ndarray
    bias: float
    l2_lambda: float
    normalizer: Normalizer | None = None

    kind = "logreg"

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class TreeNode:
    split_dim: int = -1       # -1 marks a leaf
    split_value: float = 0.0
    left: int = -1
    right: int = -1
    leaf_class: str = LABEL_OK
    leaf_score: float = 0.0   # NOK fraction of training rows in the node

    @property
    def is_leaf(self) -> bool:
        return self.split_dim < 0


@dataclass(frozen=True)
class TreeModel:
    nodes: tuple
    n_features: int
    max_splits: int
    normalizer: Normalizer | None = None

    kind = "tree"

    @property
    def feature_dim(self) -> int:
        return self.n_features


# ---------------------------------------------------------------------------
# one-class SVM


def train_ocsvm(
    X,
    nu: float = 0.05,
    kernel: KernelSpec | None = None,
    tol: float = 1e-6,
    max_iter: int = 100_000,
    normalizer: Normalizer | None = None,
) -> OneClassSVMModel:
    """nu-parameterized one-class SVM trained by pairwise dual updates.

    Minimizes 0.5 a^T K a over the scaled simplex {0 <= a_i <= 1/(nu n),
    sum a = 1}; rho is the mean decision value of the unbounded support
    vectors and score(x) = rho - sum_i a_i K(x_i, x).
    """
    X = _as_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise ValueError(f"one-class SVM needs at least 2 samples, got {n}")
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    kernel = _resolve_kernel(kernel, X)

    K = _kernel_matrix(kernel, X, X)
    upper = 1.0 / (nu * n)
    alpha0 = np.full(n, 1.0 / n)
    alpha, grad, _ = smo_minimize(
        K, np.zeros(n), np.zeros(n), np.full(n, upper), alpha0, tol=tol, max_iter=max_iter
    )

    edge = 1e-8 * upper
    unbounded = (alpha > edge) & (alpha < upper - edge)
    if unbounded.any():
        rho = float(grad[unbounded].mean())
    else:
        sv = alpha > edge
        rho = float(grad[sv].mean()) if sv.any() else float(grad.mean())

    keep = alpha > _SV_CUTOFF
    return OneClassSVMModel(
        support_vectors=X[keep].copy(),
        alphas=alpha[keep].copy(),
        rho=rho,
        kernel=kernel,
        nu=nu,
        normalizer=normalizer,
    )


# ---------------------------------------------------------------------------
# support vector data description


def train_svdd(
    X,
    labels=None,
    c_pos: float | None = None,
    c_neg: float = 1.0,
    kernel: KernelSpec | None = None,
    tol: float = 1e-6,
    max_iter: int = 100_000,
    normalizer: Normalizer | None = None,
) -> SVDDModel:
    """Minimal enclosing kernel-space sphere, pushed away from labeled NOK rows.

    Variables are folded as b_i = sign_i * a_i (sign +1 for OK, -1 for NOK),
    giving min b^T K b - sum_i b_i K_ii with sum b = 1 and per-sign boxes.
    The squared radius comes from unbounded positive support vectors;
    score(x) = squared kernel distance to the center minus radius^2.
    """
    X = _as_matrix(X)
    n = X.shape[0]
    nok = np.zeros(n, dtype=bool) if labels is None else _nok_mask(labels)
    n_pos = int((~nok).sum())
    if n_pos == 0:
        raise ValueError("SVDD needs at least one OK sample")
    if c_pos is None:
        c_pos = 1.0 / (n * 0.05)
    if c_pos <= 0 or c_neg <= 0:
        raise ValueError("penalties must be > 0")
    if n_pos * c_pos < 1.0:
        raise ValueError(f"infeasible box: {n_pos} OK samples with c_pos={c_pos} cannot sum to 1")
    kernel = _resolve_kernel(kernel, X)

    K = _kernel_matrix(kernel, X, X)
    signs = np.where(nok, -1.0, 1.0)
    lo = np.where(nok, -c_neg, 0.0)
    hi = np.where(nok, 0.0, c_pos)

    # feasible start: spread mass 1 uniformly over OK rows, capped at the box
    beta0 = np.zeros(n)
    share = 1.0 / n_pos
    if share <= c_pos:
        beta0[~nok] = share
    else:
        remaining = 1.0
        for i in np.flatnonzero(~nok):
            take = min(c_pos, remaining)
            beta0[i] = take
            remaining -= take
            if remaining <= 0:
                break

    beta, grad, _ = smo_minimize(2.0 * K, -np.diag(K).copy(), lo, hi, beta0, tol=tol, max_iter=max_iter)

    center_norm_sq = float(beta @ K @ beta)
    k_self = np.diag(K)
    dist_sq = k_self - 2.0 * (K @ beta) + center_norm_sq

    edge = 1e-8 * c_pos
    unbounded_pos = (~nok) & (beta > edge) & (beta < c_pos - edge)
    if unbounded_pos.any():
        radius_sq = float(dist_sq[unbounded_pos].mean())
    else:
        pos_sv = (~nok) & (beta > edge)
        radius_sq = float(dist_sq[pos_sv].mean()) if pos_sv.any() else 0.0

    keep = np.abs(beta) > _SV_CUTOFF
    return SVDDModel(
        support_vectors=X[keep].copy(),
        alphas=np.abs(beta[keep]),
        signs=signs[keep].copy(),
        radius_sq=radius_sq,
        center_norm_sq=center_norm_sq,
        kernel=kernel,
        c_pos=float(c_pos),
        c_neg=float(c_neg),
        normalizer=normalizer,
    )


# ---------------------------------------------------------------------------
# binary soft-margin SVM (semi-supervised sibling)


def train_svm(
    X,
    labels,
    c: float = 1.0,
    kernel: KernelSpec | None = None,
    tol: float = 1e-6,
    max_iter: int = 100_000,
    normalizer: Normalizer | None = None,
) -> BinarySVMModel:
    """Binary C-SVM with y = +1 for OK, scored by the negated margin distance."""
    X = _as_matrix(X)
    n = X.shape[0]
    nok = _nok_mask(labels)
    if not nok.any() or nok.all():
        raise ValueError("binary SVM needs both OK and NOK samples")
    if c <= 0:
        raise ValueError(f"penalty must be > 0, got {c}")
    kernel = _resolve_kernel(kernel, X)

    K = _kernel_matrix(kernel, X, X)
    y = np.where(nok, -1.0, 1.0)
    lo = np.where(nok, -c, 0.0)
    hi = np.where(nok, 0.0, c)
    beta, grad, _ = smo_minimize(K, -y, lo, hi, np.zeros(n), tol=tol, max_iter=max_iter)

    # grad = K beta - y, so y_i - (K beta)_i = -grad_i on unbounded SVs
    alpha = np.abs(beta)
    edge = 1e-8 * c
    unbounded = (alpha > edge) & (alpha < c - edge)
    if unbounded.any():
        bias = float(-grad[unbounded].mean())
    else:
        sv = alpha > edge
        bias = float(-grad[sv].mean()) if sv.any() else 0.0

    keep = alpha > _SV_CUTOFF
    return BinarySVMModel(
        support_vectors=X[keep].copy(),
        betas=beta[keep].copy(),
        bias=bias,
        kernel=kernel,
        c=float(c),
        normalizer=normalizer,
    )


# ---------------------------------------------------------------------------
# Gaussian naive Bayes


def train_gnb(X, labels, normalizer: Normalizer | None = None) -> GNBModel:
    """Per-class, per-dimension Gaussians with frequency priors."""
    X = _as_matrix(X)
    nok = _nok_mask(labels)
    counts = np.array([int((~nok).sum()), int(nok.sum())])
    if counts.min() < 2:
        raise ValueError(f"GNB needs both classes with >= 2 samples, got OK={counts[0]} NOK={counts[1]}")
    means = np.stack([X[~nok].mean(axis=0), X[nok].mean(axis=0)])
    variances = np.stack([X[~nok].var(axis=0), X[nok].var(axis=0)])
    variances = np.maximum(variances, _GNB_VAR_FLOOR)
    priors = counts / counts.sum()
    return GNBModel(priors=priors, means=means, variances=variances, normalizer=normalizer)


def _gnb_log_posteriors(model: GNBModel, X: np.ndarray) -> np.ndarray:
    """(n, 2) normalized log posteriors, columns [OK, NOK]."""
    log_joint = np.empty((X.shape[0], 2))
    for c in range(2):
        mu, var = model.means[c], model.variances[c]
        ll = -0.5 * (np.log(2.0 * np.pi * var) + (X - mu) ** 2 / var).sum(axis=1)
        log_joint[:, c] = np.log(model.priors[c]) + ll
    log_norm = np.logaddexp(log_joint[:, 0], log_joint[:, 1])
    return log_joint - log_norm[:, None]


def predict_gnb(model: GNBModel, x) -> tuple[str, float]:
    """Maximum-posterior class and its posterior probability."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if model.normalizer is not None:
        x = apply_normalizer(model.normalizer, x)
    post = np.exp(_gnb_log_posteriors(model, x))[0]
    label = LABEL_NOK if post[1] > post[0] else LABEL_OK
    return label, float(post.max())


# ---------------------------------------------------------------------------
# logistic regression


def _logreg_loss_grad(X, y, w, b, l2):
    z = X @ w + b
    # mean NLL: softplus(z) - y z, numerically stable via logaddexp
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w))
    resid = expit(z) - y
    grad_w = X.T @ resid / X.shape[0] + l2 * w
    grad_b = float(resid.mean())
    return loss, grad_w, grad_b


def train_logreg(
    X,
    labels,
    l2_lambda: float = 1e-4,
    max_iter: int = 10_000,
    tol: float = 1e-6,
    normalizer: Normalizer | None = None,
) -> LogRegModel:
    """L2-regularized logistic regression by gradient descent with backtracking.

    NOK is the positive class, so sigmoid(w.x + b) is the anomaly score.
    The Armijo backtracking starts from a Barzilai-Borwein spectral step so
    badly conditioned penalties still converge; stops when the full gradient
    norm drops below ``tol``.
    """
    X = _as_matrix(X)
    nok = _nok_mask(labels)
    if not nok.any() or nok.all():
        raise ValueError("logistic regression needs both classes")
    if l2_lambda < 0:
        raise ValueError("l2_lambda must be >= 0")
    y = nok.astype(np.float64)
    d = X.shape[1]

    def loss_grad(theta):
        loss, gw, gb = _logreg_loss_grad(X, y, theta[:d], float(theta[d]), l2_lambda)
        return loss, np.concatenate([gw, [gb]])

    theta = np.zeros(d + 1)
    loss, grad = loss_grad(theta)
    prev_theta = prev_grad = None
    gnorm = float(np.linalg.norm(grad))
    for _ in range(max_iter):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol:
            return LogRegModel(
                weights=theta[:d].copy(), bias=float(theta[d]),
                l2_lambda=float(l2_lambda), normalizer=normalizer,
            )
        step = 1.0
        if prev_theta is not None:
            s = theta - prev_theta
            dg = grad - prev_grad
            curve = float(s @ dg)
            if curve > 1e-30:
                step = min(max(float(s @ s) / curve, 1e-12), 1e12)
        accepted = False
        for _ in range(80):
            candidate = theta - step * grad
            loss_try, grad_try = loss_grad(candidate)
            if loss_try <= loss - 1e-4 * step * gnorm * gnorm:
                prev_theta, prev_grad = theta, grad
                theta, loss, grad = candidate, loss_try, grad_try
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise ConvergenceError("logistic regression line search stalled", gnorm)
    raise ConvergenceError(f"logistic regression did not converge in {max_iter} iterations", gnorm)


# ---------------------------------------------------------------------------
# coarse decision tree


def _gini(nok_count: np.ndarray | float, total: np.ndarray | float):
    p = nok_count / total
    return 2.0 * p * (1.0 - p)


def _best_split(X, y, idx):
    """Exhaustive best (dim, threshold) by impurity decrease on rows ``idx``.

    Thresholds are midpoints of consecutive distinct sorted values. Returns
    (decrease, dim, threshold) weighted by node size, or None when no split
    strictly reduces the weighted impurity. Ties keep the lowest dimension,
    then the lowest threshold.
    """
    n = idx.shape[0]
    nok_total = int(y[idx].sum())
    parent = n * _gini(nok_total, n)
    if nok_total == 0 or nok_total == n:
        return None
    best = None
    for dim in range(X.shape[1]):
        vals = X[idx, dim]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sy = y[idx][order]
        distinct = np.flatnonzero(sv[:-1] != sv[1:])
        if distinct.size == 0:
            continue
        left_n = distinct + 1.0
        left_nok = np.cumsum(sy)[distinct]
        right_n = n - left_n
        right_nok = nok_total - left_nok
        weighted = left_n * _gini(left_nok, left_n) + right_n * _gini(right_nok, right_n)
        decreases = parent - weighted
        k = int(np.argmax(decreases))
        if decreases[k] > 1e-12 and (best is None or decreases[k] > best[0]):
            threshold = 0.5 * (sv[distinct[k]] + sv[distinct[k] + 1])
            best = (float(decreases[k]), dim, float(threshold))
    return best


def train_tree(X, labels, max_splits: int = 4, normalizer: Normalizer | None = None) -> TreeModel:
    """CART-style greedy tree grown best-first up to ``max_splits`` splits."""
    X = _as_matrix(X)
    nok = _nok_mask(labels)
    if not nok.any() or nok.all():
        raise ValueError("decision tree needs both classes")
    if max_splits < 1:
        raise ValueError(f"max_splits must be >= 1, got {max_splits}")
    y = nok.astype(np.float64)

    def leaf(idx):
        frac = float(y[idx].mean())
        return TreeNode(leaf_class=LABEL_NOK if frac >= 0.5 else LABEL_OK, leaf_score=frac)

    nodes: list[TreeNode] = [leaf(np.arange(X.shape[0]))]
    rows = {0: np.arange(X.shape[0])}
    candidates = {0: _best_split(X, y, rows[0])}

    for _ in range(max_splits):
        live = [(node, cand) for node, cand in candidates.items() if cand is not None]
        if not live:
            break
        # best-first: largest decrease, then earliest-created node
        node, (decrease, dim, threshold) = max(live, key=lambda item: (item[1][0], -item[0]))
        idx = rows.pop(node)
        del candidates[node]
        go_left = X[idx, dim] <= threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]
        left, right = len(nodes), len(nodes) + 1
        nodes.append(leaf(left_idx))
        nodes.append(leaf(right_idx))
        nodes[node] = TreeNode(
            split_dim=dim,
            split_value=threshold,
            left=left,
            right=right,
            leaf_class=nodes[node].leaf_class,
            leaf_score=nodes[node].leaf_score,
        )
        rows[left], rows[right] = left_idx, right_idx
        candidates[left] = _best_split(X, y, left_idx)
        candidates[right] = _best_split(X, y, right_idx)

    return TreeModel(nodes=tuple(nodes), n_features=X.shape[1], max_splits=max_splits, normalizer=normalizer)


def _tree_scores(model: TreeModel, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = model.nodes[0]
        while not node.is_leaf:
            node = model.nodes[node.left if X[r, node.split_dim] <= node.split_value else node.right]
        out[r] = node.leaf_score
    return out


# ---------------------------------------------------------------------------
# unified scoring


def score_samples(model, X) -> np.ndarray:
    """Anomaly scores for rows of X; higher = more anomalous for all families."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.feature_dim:
        raise ValueError(f"dimension mismatch: model expects {model.feature_dim}, got {X.shape[1]}")
    if model.normalizer is not None:
        X = apply_normalizer(model.normalizer, X)

    if isinstance(model, OneClassSVMModel):
        k = _kernel_matrix(model.kernel, X, model.support_vectors)
        return model.rho - k @ model.alphas
    if isinstance(model, SVDDModel):
        beta = model.signs * model.alphas
        k = _kernel_matrix(model.kernel, X, model.support_vectors)
        k_self = np.ones(X.shape[0])  # RBF: K(x, x) = 1
        dist_sq = k_self - 2.0 * (k @ beta) + model.center_norm_sq
        return dist_sq - model.radius_sq
    if isinstance(model, BinarySVMModel):
        k = _kernel_matrix(model.kernel, X, model.support_vectors)
        return -(k @ model.betas + model.bias)
    if isinstance(model, GNBModel):
        return np.exp(_gnb_log_posteriors(model, X)[:, 1])
    if isinstance(model, LogRegModel):
        z = X @ model.weights + model.bias
        return expit(z)
    if isinstance(model, TreeModel):
        return _tree_scores(model, X)
    raise TypeError(f"unknown model type {type(model).__name__}")


def score(model, x) -> float:
    """Anomaly score of a single feature vector."""
    return float(score_samples(model, np.atleast_2d(x))[0])


# ---------------------------------------------------------------------------
# single train interface


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters for any model kind, with the defaults used throughout."""

    kind: str = "ocsvm"
    nu: float = 0.05
    gamma: float | None = None        # None -> 1/(d * var) heuristic at fit time
    c_pos: float | None = None        # None -> 1/(0.05 n)
    c_neg: float = 1.0
    c: float = 1.0                    # binary SVM penalty
    l2_lambda: float = 1e-4
    max_splits: int = 4
    tol: float = 1e-6
    max_iter: int = 100_000
    normalize: str = "all"            # all | occ_only | none

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.normalize not in ("all", "occ_only", "none"):
            raise ValueError(f"normalize must be all|occ_only|none, got {self.normalize!r}")

    def with_overrides(self, **kwargs) -> "ModelConfig":
        return replace(self, **kwargs)


def _wants_normalizer(config: ModelConfig) -> bool:
    if config.normalize == "all":
        return True
    if config.normalize == "occ_only":
        return config.kind in OCC_KINDS
    return False


def fit_model(config: ModelConfig, X, labels):
    """Train the configured model kind; z-scoring is fit on the rows used.

    One-class kinds drop NOK rows (with a warning) before training; the fitted
    normalizer is embedded in the model so scoring accepts raw features.
    """
    X = _as_matrix(X)
    labels = np.asarray(labels, dtype=object)
    if config.kind in ONE_CLASS_KINDS:
        nok = _nok_mask(labels)
        if nok.any():
            logger.warning("%s: dropping %d NOK rows from one-class training", config.kind, int(nok.sum()))
            X, labels = X[~nok], labels[~nok]

    norm = fit_normalizer(X) if _wants_normalizer(config) else None
    Xn = apply_normalizer(norm, X) if norm is not None else X
    kernel = KernelSpec(gamma=config.gamma) if config.gamma is not None else None

    if config.kind == "ocsvm":
        return train_ocsvm(Xn, nu=config.nu, kernel=kernel, tol=config.tol,
                           max_iter=config.max_iter, normalizer=norm)
    if config.kind == "svdd":
        return train_svdd(Xn, labels=labels, c_pos=config.c_pos, c_neg=config.c_neg,
                          kernel=kernel, tol=config.tol, max_iter=config.max_iter, normalizer=norm)
    if config.kind == "svm":
        return train_svm(Xn, labels, c=config.c, kernel=kernel, tol=config.tol,
                         max_iter=config.max_iter, normalizer=norm)
    if config.kind == "gnb":
        return train_gnb(Xn, labels, normalizer=norm)
    if config.kind == "logreg":
        return train_logreg(Xn, labels, l2_lambda=config.l2_lambda, tol=config.tol, normalizer=norm)
    if config.kind == "tree":
        return train_tree(Xn, labels, max_splits=config.max_splits, normalizer=norm)
    raise ValueError(f"unknown model kind {config.kind!r}")
