#!/usr/bin/env python3
"""Reproduction attempt on the original biscuit dataset, when available.

Expects the class-directory layout (ok/, nok_incomplete/, nok_strange/,
nok_color/) under --data. Rebuilds the published protocol: rotation
augmentation, seeded 1000/50 train and 200/200 test splits with NOK ratio
0.4:0.3:0.3, then trains the model suite on both detectors and prints the
two result tables next to the published reference numbers.
"""
import argparse
import time

import numpy as np

from keypoint_ad.classifiers import ModelConfig, fit_model
from keypoint_ad.dataset import SplitSpec, augment_records, build_splits, load_records, load_sample_image
from keypoint_ad.descriptor import LabeledDataset, build_vector
from keypoint_ad.detector import detect
from keypoint_ad.evaluation import evaluate, format_result_table, grid_search

REFERENCE = {
    ("dog", "one-class svm"): (75.7, 0.80),
    ("dog", "one-class svdd"): (60.0, 0.60),
    ("dog", "semi-supervised svm"): (79.2, 0.79),
    ("dog", "semi-supervised svdd"): (63.7, 0.63),
    ("fast_hessian", "one-class svm"): (87.5, 0.92),
    ("fast_hessian", "one-class svdd"): (56.0, 0.56),
    ("fast_hessian", "semi-supervised svm"): (89.5, 0.90),
    ("fast_hessian", "semi-supervised svdd"): (60.0, 0.60),
    ("fast_hessian", "gnb"): (89.0, 0.92),
    ("dog", "logreg"): (77.2, 0.86),
    ("dog", "tree"): (77.0, 0.83),
}


def featurize(records, detector, k, crop):
    rows, labels, ids = [], [], []
    for rec in records:
        image = load_sample_image(rec, crop=crop)
        rows.append(build_vector(detect(image, detector), k))
        labels.append(rec.label)
        ids.append(rec.id)
    return LabeledDataset(matrix=np.vstack(rows), labels=np.asarray(labels, dtype=object), sample_ids=ids)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", required=True, help="dataset root or path,class listing")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--crop", action="store_true", help="apply Otsu bounding-box crops")
    parser.add_argument("--grid-search", action="store_true", help="tune gamma/nu by CV AUC first")
    args = parser.parse_args()

    started = time.time()
    records = augment_records(load_records(args.data))
    split = build_splits(records, SplitSpec(1000, 50, 200, 200, (0.4, 0.3, 0.3), seed=args.seed))
    rows = []
    for detector in ("dog", "fast_hessian"):
        train = featurize(split.train, detector, args.k, args.crop)
        test = featurize(split.test, detector, args.k, args.crop)
        ok_rows = ~train.nok_mask

        base = ModelConfig(kind="ocsvm")
        if args.grid_search:
            base, cv_auc = grid_search(base, train, folds=3, seed=args.seed)
            print(f"[{detector}] grid search picked gamma={base.gamma:.4g} nu={base.nu} (CV AUC {cv_auc:.2f})")

        suites = [
            ("one-class svm", base, train.subset(ok_rows)),
            ("one-class svdd", ModelConfig(kind="svdd", gamma=base.gamma), train.subset(ok_rows)),
            ("semi-supervised svm", ModelConfig(kind="svm", gamma=base.gamma), train),
            ("semi-supervised svdd", ModelConfig(kind="svdd", gamma=base.gamma), train),
            ("gnb", ModelConfig(kind="gnb"), train),
            ("logreg", ModelConfig(kind="logreg"), train),
            ("tree", ModelConfig(kind="tree"), train),
        ]
        for label, cfg, train_set in suites:
            model = fit_model(cfg, train_set.matrix, train_set.labels)
            report = evaluate(model, test)
            rows.append((detector, label, report.accuracy, report.auc))
            ref = REFERENCE.get((detector, label))
            if ref:
                print(f"[{detector}] {label}: accuracy {100 * report.accuracy:.1f}% vs {ref[0]} "
                      f"(dev {abs(100 * report.accuracy - ref[0]):.1f}pp), "
                      f"AUC {report.auc:.2f} vs {ref[1]} (dev {abs(report.auc - ref[1]):.2f})")

    print()
    print(format_result_table(rows))
    print(f"\ntotal {time.time() - started:.1f}s")


if __name__ == "__main__":
    main()
