"""Command-line front end: extract, split, train, eval, report.

Exit codes: 0 success, 1 I/O error, 2 infeasible or invalid configuration,
3 solver non-convergence. Logging level comes from KEYPOINT_AD_LOG.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .classifiers import ConvergenceError, fit_model, score_samples
from .config import ConfigError, PipelineConfig, build_pipeline_config
from .dataset import (
    InfeasibleSplitError,
    SplitSpec,
    augment_records,
    build_splits,
    load_records,
    load_sample_image,
    read_manifest,
    write_manifest,
)
from .descriptor import LabeledDataset, build_vector, read_features_csv, write_features_csv
from .detector import detect
from .evaluation import (
    evaluate,
    format_result_table,
    load_report_json,
    select_threshold,
    write_report_json,
    write_roc_csv,
)
from .model_io import config_hash, load_model, save_model

logger = logging.getLogger("keypoint_ad")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = os.environ.get("KEYPOINT_AD_LOG", "warn").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# extract


def _extract_one(task):
    """Worker: (record, pipeline_config) -> (id, label, vector | None, error | None)."""
    record, cfg = task
    try:
        img = load_sample_image(record, crop=cfg.crop, invert=cfg.invert_foreground)
        keypoints = detect(img, cfg.detector, cfg.detector_config())
        vector = build_vector(keypoints, cfg.k)
        return record.id, record.label, vector, len(keypoints), None
    except Exception as exc:  # per-sample failures must not kill the batch
        return record.id, record.label, None, 0, f"{type(exc).__name__}: {exc}"


def cmd_extract(args, cfg: PipelineConfig) -> int:
    if args.manifest:
        records, _ = read_manifest(args.manifest)
    elif args.images:
        records = load_records(args.images)
        if args.augment:
            records = augment_records(records)
    else:
        raise ConfigError("extract needs --images or --manifest")

    tasks = [(rec, cfg) for rec in records]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_extract_one, tasks, chunksize=8))
    else:
        results = [_extract_one(t) for t in tasks]

    ids, labels, rows = [], [], []
    for sample_id, label, vector, n_kp, error in results:
        if error is not None:
            logger.error("skipping %s: %s", sample_id, error)
            continue
        if n_kp < cfg.k:
            logger.warning("%s: only %d keypoints for k=%d, zero padding", sample_id, n_kp, cfg.k)
        logger.info("%s: %d keypoints", sample_id, n_kp)
        ids.append(sample_id)
        labels.append(label)
        rows.append(vector)
    if not ids:
        raise OSError("extraction produced no feature rows")

    dataset = LabeledDataset(matrix=np.vstack(rows), labels=np.asarray(labels, dtype=object), sample_ids=ids)
    write_features_csv(args.out, dataset)
    print(f"wrote {len(ids)} feature rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# split


def cmd_split(args, cfg: PipelineConfig) -> int:
    records = augment_records(load_records(args.images))
    try:
        ratio = tuple(float(v) for v in args.nok_ratio.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --nok-ratio {args.nok_ratio!r}") from exc
    if len(ratio) != 3:
        raise ConfigError("--nok-ratio needs three comma-separated fractions")
    spec = SplitSpec(
        train_ok=args.train_ok,
        train_nok=args.train_nok,
        test_ok=args.test_ok,
        test_nok=args.test_nok,
        nok_ratio=ratio,
        seed=cfg.seed,
        group_disjoint=not args.no_group_disjoint,
        from_originals=args.from_originals,
    )
    result = build_splits(records, spec)
    members = result.train + result.test
    write_manifest(
        args.out,
        members,
        splits=result.split_map(),
        header_comments=[
            f"seed = {spec.seed}",
            f"train_ok = {spec.train_ok}, train_nok = {spec.train_nok}",
            f"test_ok = {spec.test_ok}, test_nok = {spec.test_nok}",
            f"nok_ratio = {spec.nok_ratio}",
            f"group_disjoint = {spec.group_disjoint}, from_originals = {spec.from_originals}",
        ],
    )
    print(f"wrote manifest with {len(result.train)} train / {len(result.test)} test rows to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# train / eval


def _join_split(features: LabeledDataset, manifest_path, split_name: str) -> LabeledDataset:
    _, splits = read_manifest(manifest_path)
    wanted = [sample_id for sample_id, split in splits.items() if split == split_name]
    have = {sample_id: i for i, sample_id in enumerate(features.sample_ids)}
    missing = [sample_id for sample_id in wanted if sample_id not in have]
    if missing:
        raise ConfigError(
            f"{len(missing)} {split_name} ids missing from features (first: {missing[0]!r})"
        )
    if not wanted:
        raise ConfigError(f"manifest has no {split_name} rows")
    return features.subset([have[sample_id] for sample_id in wanted])


def cmd_train(args, cfg: PipelineConfig) -> int:
    features = read_features_csv(args.features)
    train = _join_split(features, args.manifest, "train")
    model = fit_model(cfg.model_config(), train.matrix, train.labels)
    save_model(args.out, model, created_with_config_hash=config_hash(cfg.canonical()))
    sv = getattr(model, "support_vectors", None)
    detail = f", {sv.shape[0]} support vectors" if sv is not None else ""
    print(f"trained {cfg.model} on {len(train)} rows{detail} -> {args.out}")
    return 0


def _validation_threshold(model, train: LabeledDataset, cfg: PipelineConfig) -> float:
    """Hold out a stratified quarter of the train rows to pick the threshold."""
    rng = np.random.default_rng(cfg.seed + 1)
    nok = train.nok_mask
    picks = []
    for mask in (~nok, nok):
        members = np.flatnonzero(mask)
        if members.size < 2:
            raise ConfigError("validation threshold needs both classes in the train split")
        count = max(1, members.size // 4)
        picks.extend(members[rng.permutation(members.size)][:count].tolist())
    held = train.subset(sorted(picks))
    scores = score_samples(model, held.matrix)
    return select_threshold(scores, held.labels)


def cmd_eval(args, cfg: PipelineConfig) -> int:
    model = load_model(args.model_file)
    features = read_features_csv(args.features)
    test = _join_split(features, args.manifest, "test")
    if cfg.threshold_source == "validation":
        train = _join_split(features, args.manifest, "train")
        threshold = _validation_threshold(model, train, cfg)
        report = evaluate(model, test, threshold=threshold, threshold_source="validation")
    else:
        report = evaluate(model, test)
    extra = {"detector": cfg.detector, "model_kind": model.kind}
    write_report_json(args.out, report, extra=extra)
    if args.roc_out:
        write_roc_csv(args.roc_out, report.roc)
    print(format_result_table([(cfg.detector, model.kind, report.accuracy, report.auc)]))
    print(
        f"threshold {report.threshold:.6g} ({report.threshold_source}); "
        f"tp={report.tp} fp={report.fp} tn={report.tn} fn={report.fn} -> {args.out}"
    )
    return 0


# ---------------------------------------------------------------------------
# report


def cmd_report(args, _cfg: PipelineConfig) -> int:
    rows = []
    for path in args.reports:
        doc = load_report_json(path)
        rows.append(
            (doc.get("detector", "?"), doc.get("model_kind", "?"), float(doc["accuracy"]), float(doc["auc"]))
        )
    table = format_result_table(rows)
    print(table)
    if args.out:
        Path(args.out).write_text(table + "\n", encoding="utf-8")
    return 0


# ---------------------------------------------------------------------------
# argument plumbing


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; flags override file values")
    p.add_argument("--detector", choices=("dog", "fast_hessian"))
    p.add_argument("--model", dest="model_kind", choices=("ocsvm", "svdd", "svm", "gnb", "logreg", "tree"))
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--threshold-source", choices=("test", "validation"))
    p.add_argument("--k", type=int)
    p.add_argument("--normalize", choices=("all", "occ_only", "none"))
    p.add_argument("--nu", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--crop", action="store_true", default=None)


def _pipeline_config(args) -> PipelineConfig:
    return build_pipeline_config(
        config_path=args.config,
        detector=args.detector,
        model=args.model_kind,
        seed=args.seed,
        jobs=args.jobs,
        threshold_source=args.threshold_source,
        k=args.k,
        normalize=args.normalize,
        nu=args.nu,
        gamma=args.gamma,
        crop=args.crop,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="keypoint-ad", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="detect keypoints and write the feature CSV")
    p.add_argument("--images", help="class-directory image root or path,class listing CSV")
    p.add_argument("--manifest", help="split manifest listing the samples to extract")
    p.add_argument("--augment", action="store_true", help="add 90/180/270 rotations when scanning --images")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("split", help="build seeded train/test split manifest")
    p.add_argument("--images", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--train-ok", type=int, required=True)
    p.add_argument("--train-nok", type=int, required=True)
    p.add_argument("--test-ok", type=int, required=True)
    p.add_argument("--test-nok", type=int, required=True)
    p.add_argument("--nok-ratio", default="0.4,0.3,0.3")
    p.add_argument("--no-group-disjoint", action="store_true",
                   help="allow rotations of one original to straddle train/test")
    p.add_argument("--from-originals", action="store_true", help="draw only unrotated originals")
    _add_config_flags(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a model on the manifest's train split")
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on the manifest's test split")
    p.add_argument("--model-file", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--roc-out", help="optional ROC CSV path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="render stored report JSONs as a result table")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", help="also write the table to this path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = _pipeline_config(args)
        return args.func(args, cfg)
    except ConvergenceError as exc:
        logger.error("solver failed: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, InfeasibleSplitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
