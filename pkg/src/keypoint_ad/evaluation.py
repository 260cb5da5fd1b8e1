"""Scoring metrics and experiment evaluation.

ROC curves sweep every distinct anomaly-score threshold descending, with
tied scores advancing both rates at once; AUC is the trapezoid area, which
equals the Mann-Whitney pair statistic with ties counted one half.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .classifiers import ModelConfig, fit_model, score_samples
from .descriptor import LABEL_NOK, LABEL_OK, LabeledDataset
from .model_io import dumps_17g


@dataclass(frozen=True)
class RocCurve:
    """Operating points swept over descending score thresholds.

    fpr/tpr start at (0, 0) for the +inf threshold and end at (1, 1).
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


@dataclass
class EvalReport:
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    auc: float
    threshold: float
    threshold_source: str
    roc: RocCurve = field(repr=False)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _split_scores(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=object)
    if scores.shape[0] != labels.shape[0]:
        raise ValueError("scores and labels length mismatch")
    nok = np.asarray([lab == LABEL_NOK for lab in labels], dtype=bool)
    ok = np.asarray([lab == LABEL_OK for lab in labels], dtype=bool)
    if not np.all(nok | ok):
        raise ValueError("labels must be OK or NOK")
    if not nok.any() or not ok.any():
        raise ValueError("both classes must be present")
    return scores, nok


def roc_and_auc(scores, labels) -> tuple[RocCurve, float]:
    """ROC over all distinct thresholds plus trapezoidal AUC (NOK positive)."""
    scores, nok = _split_scores(scores, labels)
    n_pos = int(nok.sum())
    n_neg = int((~nok).sum())

    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    nok_sorted = nok[order]

    # group indices where a run of tied scores ends
    last_of_group = np.flatnonzero(np.append(s_sorted[1:] != s_sorted[:-1], True))
    cum_tp = np.cumsum(nok_sorted)[last_of_group]
    cum_fp = np.cumsum(~nok_sorted)[last_of_group]

    thresholds = np.concatenate([[np.inf], s_sorted[last_of_group]])
    tpr = np.concatenate([[0.0], cum_tp / n_pos])
    fpr = np.concatenate([[0.0], cum_fp / n_neg])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr), auc


def select_threshold(scores, labels, objective: str = "max_accuracy") -> float:
    """Decision threshold over midpoint candidates (NOK when score > threshold).

    Candidates are midpoints between consecutive distinct scores plus one
    value beyond each extreme. Ties prefer the lower false-positive rate,
    then the smaller threshold. ``objective`` is max_accuracy or youden.
    """
    if objective not in ("max_accuracy", "youden"):
        raise ValueError(f"unknown objective {objective!r}")
    scores, nok = _split_scores(scores, labels)
    n = scores.shape[0]
    n_pos = int(nok.sum())
    n_neg = n - n_pos

    distinct = np.unique(scores)  # ascending
    mids = 0.5 * (distinct[:-1] + distinct[1:])
    candidates = np.concatenate([[distinct[0] - 1.0], mids, [distinct[-1] + 1.0]])

    best = None
    for t in candidates:
        pred_nok = scores > t
        tp = int((pred_nok & nok).sum())
        fp = int((pred_nok & ~nok).sum())
        tpr = tp / n_pos
        fpr = fp / n_neg
        if objective == "max_accuracy":
            value = (tp + (n_neg - fp)) / n
        else:
            value = tpr - fpr
        key = (-value, fpr, t)
        if best is None or key < best:
            best = key
    return float(best[2])


def confusion_at(scores, labels, threshold: float) -> tuple[int, int, int, int]:
    """(tp, fp, tn, fn) with NOK positive and NOK predicted when score > threshold."""
    scores, nok = _split_scores(scores, labels)
    pred = scores > threshold
    tp = int((pred & nok).sum())
    fp = int((pred & ~nok).sum())
    tn = int((~pred & ~nok).sum())
    fn = int((~pred & nok).sum())
    return tp, fp, tn, fn


def evaluate(model, dataset: LabeledDataset, threshold: float | None = None,
             objective: str = "max_accuracy", threshold_source: str | None = None) -> EvalReport:
    """Score a labeled dataset and fill the report.

    With no threshold given, one is selected on these very scores and the
    report is flagged threshold_source="test" (the leaky convention some
    experiments use); callers passing a threshold get "provided" unless they
    label its provenance via ``threshold_source``.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    scores = score_samples(model, dataset.matrix)
    roc, auc = roc_and_auc(scores, dataset.labels)
    if threshold is None:
        threshold = select_threshold(scores, dataset.labels, objective=objective)
        source = "test"
    else:
        source = threshold_source or "provided"
    tp, fp, tn, fn = confusion_at(scores, dataset.labels, threshold)
    return EvalReport(
        tp=tp, fp=fp, tn=tn, fn=fn,
        accuracy=(tp + tn) / len(dataset),
        auc=auc,
        threshold=float(threshold),
        threshold_source=source,
        roc=roc,
    )


# ---------------------------------------------------------------------------
# cross-validation and hyperparameter sweep


@dataclass
class CrossValidation:
    reports: list[EvalReport]
    mean_accuracy: float
    std_accuracy: float
    mean_auc: float
    std_auc: float


def stratified_folds(labels, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded stratified fold assignment; every fold keeps both classes."""
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    labels = np.asarray(labels, dtype=object)
    rng = np.random.default_rng(seed)
    test_indices: list[list[int]] = [[] for _ in range(folds)]
    for cls in (LABEL_OK, LABEL_NOK):
        members = np.flatnonzero(np.asarray([lab == cls for lab in labels], dtype=bool))
        if members.size < folds:
            raise ValueError(
                f"stratification failure: class {cls} has {members.size} samples for {folds} folds"
            )
        shuffled = members[rng.permutation(members.size)]
        for k, chunk in enumerate(np.array_split(shuffled, folds)):
            test_indices[k].extend(chunk.tolist())
    return [np.asarray(sorted(chunk), dtype=int) for chunk in test_indices]


def cross_validate(config: ModelConfig, dataset: LabeledDataset, folds: int = 5,
                   seed: int = 0) -> CrossValidation:
    """Stratified k-fold: per fold the model (and its normalizer) is fit on
    the training portion only, then evaluated on the held-out fold."""
    chunks = stratified_folds(dataset.labels, folds, seed)
    all_idx = np.arange(len(dataset))
    reports = []
    for test_idx in chunks:
        train_mask = np.ones(len(dataset), dtype=bool)
        train_mask[test_idx] = False
        train = dataset.subset(all_idx[train_mask])
        test = dataset.subset(test_idx)
        model = fit_model(config, train.matrix, train.labels)
        reports.append(evaluate(model, test))
    accs = np.asarray([r.accuracy for r in reports])
    aucs = np.asarray([r.auc for r in reports])
    return CrossValidation(
        reports=reports,
        mean_accuracy=float(accs.mean()),
        std_accuracy=float(accs.std()),
        mean_auc=float(aucs.mean()),
        std_auc=float(aucs.std()),
    )


GAMMA_GRID_SCALES = (0.01, 0.1, 1.0, 10.0)
NU_GRID = (0.01, 0.05, 0.1)


def grid_search(config: ModelConfig, dataset: LabeledDataset, folds: int = 3,
                seed: int = 0) -> tuple[ModelConfig, float]:
    """Sweep gamma in {0.01, 0.1, 1, 10}/d (and nu for ocsvm) by CV mean AUC."""
    d = dataset.matrix.shape[1]
    nus = NU_GRID if config.kind == "ocsvm" else (config.nu,)
    best: tuple[float, ModelConfig] | None = None
    for scale in GAMMA_GRID_SCALES:
        for nu in nus:
            candidate = config.with_overrides(gamma=scale / d, nu=nu)
            cv = cross_validate(candidate, dataset, folds=folds, seed=seed)
            if best is None or cv.mean_auc > best[0]:
                best = (cv.mean_auc, candidate)
    return best[1], best[0]


# ---------------------------------------------------------------------------
# report artifacts


def report_to_json(report: EvalReport, extra: dict | None = None) -> dict:
    doc = {
        "tp": report.tp,
        "fp": report.fp,
        "tn": report.tn,
        "fn": report.fn,
        "n": report.n,
        "accuracy": report.accuracy,
        "auc": report.auc,
        "threshold": report.threshold,
        "threshold_source": report.threshold_source,
        "roc": {
            "thresholds": [None if not np.isfinite(t) else float(t) for t in report.roc.thresholds],
            "fpr": report.roc.fpr,
            "tpr": report.roc.tpr,
        },
    }
    if extra:
        doc.update(extra)
    return doc


def write_report_json(path, report: EvalReport, extra: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_17g(report_to_json(report, extra)) + "\n")


def load_report_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_roc_csv(path, roc: RocCurve) -> None:
    """ROC points as CSV threshold,fpr,tpr for external plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("threshold,fpr,tpr\n")
        for t, f, p in zip(roc.thresholds, roc.fpr, roc.tpr):
            t_txt = "inf" if not np.isfinite(t) else repr(float(t))
            fh.write(f"{t_txt},{float(f)!r},{float(p)!r}\n")


TABLE_COLUMNS = ("Feature extractor", "Model", "Test accuracy [%]", "AUC - Test")


def format_result_table(rows: list[tuple[str, str, float, float]]) -> str:
    """Aligned text table with accuracy to one decimal and AUC to two."""
    rendered = [TABLE_COLUMNS] + [
        (extractor, model, f"{100.0 * acc:.1f}", f"{auc:.2f}") for extractor, model, acc, auc in rows
    ]
    widths = [max(len(r[c]) for r in rendered) for c in range(4)]
    lines = []
    for i, row in enumerate(rendered):
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[c] for c in range(4)))
    return "\n".join(lines)
