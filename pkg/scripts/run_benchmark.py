#!/usr/bin/env python3
"""Synthetic end-to-end experiment: both detectors, the full model suite.

Mirrors the two-table layout of the original experiments on generated disc
images: a semi-supervised table (GNB, logistic regression, coarse tree) and
a one-class table (OC-SVM and SVDD trained with and without labeled NOK
samples, plus the binary SVM on the semi-supervised split). Also reports
5-fold cross-validation on the semi-supervised training split next to the
held-out test numbers.
"""
import argparse
import time

import numpy as np

from keypoint_ad.classifiers import ModelConfig, fit_model
from keypoint_ad.descriptor import LabeledDataset, build_vector
from keypoint_ad.detector import detect
from keypoint_ad.evaluation import cross_validate, evaluate, format_result_table
from keypoint_ad.synthetic import synthetic_samples


def featurize(samples, detector, k=5):
    rows, labels, ids = [], [], []
    for sample_id, category, image in samples:
        rows.append(build_vector(detect(image, detector), k))
        labels.append("OK" if category == "OK" else "NOK")
        ids.append(sample_id)
    return LabeledDataset(
        matrix=np.vstack(rows), labels=np.asarray(labels, dtype=object), sample_ids=ids
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-ok", type=int, default=300)
    parser.add_argument("--n-nok", type=int, default=300)
    parser.add_argument("--seed", type=int, default=100)
    parser.add_argument("--size", type=int, default=96)
    parser.add_argument("--folds", type=int, default=5)
    args = parser.parse_args()

    started = time.time()
    samples = synthetic_samples(args.n_ok, args.n_nok, seed=args.seed, size=args.size)
    semi_rows, one_class_rows = [], []
    for detector in ("dog", "fast_hessian"):
        ds = featurize(samples, detector)
        labels = ds.labels
        ok_idx = np.flatnonzero([lab == "OK" for lab in labels])
        nok_idx = np.flatnonzero([lab == "NOK" for lab in labels])
        n_train_ok = len(ok_idx) // 2
        n_train_nok = max(len(nok_idx) // 6, 2)  # ~5 percent contamination of the train pool
        train_ok = ok_idx[:n_train_ok]
        semi_idx = np.concatenate([train_ok, nok_idx[:n_train_nok]])
        test = ds.subset(np.concatenate([ok_idx[n_train_ok:], nok_idx[n_train_nok:]]))
        semi = ds.subset(semi_idx)

        for kind in ("gnb", "logreg", "tree"):
            cfg = ModelConfig(kind=kind)
            model = fit_model(cfg, semi.matrix, semi.labels)
            report = evaluate(model, test)
            cv = cross_validate(cfg, semi, folds=args.folds, seed=args.seed + 1)
            semi_rows.append((detector, f"{kind} (cv acc {100 * cv.mean_accuracy:.1f})",
                              report.accuracy, report.auc))

        for label, kind, train_set in (
            ("one-class svm", "ocsvm", ds.subset(train_ok)),
            ("one-class svdd", "svdd", ds.subset(train_ok)),
            ("semi-supervised svdd", "svdd", semi),
            ("semi-supervised svm", "svm", semi),
        ):
            model = fit_model(ModelConfig(kind=kind), train_set.matrix, train_set.labels)
            report = evaluate(model, test)
            one_class_rows.append((detector, label, report.accuracy, report.auc))

    print("Semi-supervised experiment")
    print(format_result_table(semi_rows))
    print()
    print("One-class experiment")
    print(format_result_table(one_class_rows))
    print(f"\ntotal {time.time() - started:.1f}s")


if __name__ == "__main__":
    main()
