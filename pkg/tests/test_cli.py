import json
import logging

import numpy as np
import pytest

from keypoint_ad.cli import main
from keypoint_ad.dataset import save_gray_png
from keypoint_ad.descriptor import read_features_csv
from keypoint_ad.evaluation import load_report_json
from keypoint_ad.synthetic import write_synthetic_tree


@pytest.fixture(scope="module")
def image_tree(tmp_path_factory):
    root = tmp_path_factory.mktemp("images")
    write_synthetic_tree(root, n_ok=12, n_nok=9, seed=13, size=56)
    return root


def run_pipeline(root, out_dir, model="gnb", train_ok=24, train_nok=12, test_ok=12, test_nok=12,
                 seed=5, extra_flags=()):
    manifest = out_dir / "manifest.csv"
    features = out_dir / "features.csv"
    model_file = out_dir / "model.json"
    report = out_dir / "report.json"
    assert main([
        "split", "--images", str(root), "--out", str(manifest),
        "--train-ok", str(train_ok), "--train-nok", str(train_nok),
        "--test-ok", str(test_ok), "--test-nok", str(test_nok),
        "--nok-ratio", "0.5,0.25,0.25", "--seed", str(seed),
    ]) == 0
    assert main([
        "extract", "--manifest", str(manifest), "--out", str(features),
        "--detector", "fast_hessian", "--seed", str(seed), *extra_flags,
    ]) == 0
    assert main([
        "train", "--features", str(features), "--manifest", str(manifest),
        "--model", model, "--out", str(model_file), "--seed", str(seed),
    ]) == 0
    assert main([
        "eval", "--model-file", str(model_file), "--features", str(features),
        "--manifest", str(manifest), "--out", str(report), "--seed", str(seed),
        "--roc-out", str(out_dir / "roc.csv"),
    ]) == 0
    return manifest, features, model_file, report


def test_extract_from_directory(tmp_path, image_tree):
    out = tmp_path / "features.csv"
    assert main(["extract", "--images", str(image_tree), "--out", str(out)]) == 0
    ds = read_features_csv(out)
    assert len(ds) == 21
    assert ds.matrix.shape == (21, 10)
    assert set(ds.labels) == {"OK", "NOK"}


def test_extract_augmented_and_deterministic(tmp_path, image_tree):
    out1 = tmp_path / "f1.csv"
    out2 = tmp_path / "f2.csv"
    args = ["extract", "--images", str(image_tree), "--augment", "--out"]
    assert main(args + [str(out1)]) == 0
    assert main(args + [str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert len(read_features_csv(out1)) == 84


def test_extract_parallel_matches_serial(tmp_path, image_tree):
    serial = tmp_path / "serial.csv"
    parallel = tmp_path / "parallel.csv"
    assert main(["extract", "--images", str(image_tree), "--out", str(serial)]) == 0
    assert main(["extract", "--images", str(image_tree), "--out", str(parallel), "--jobs", "3"]) == 0
    assert serial.read_bytes() == parallel.read_bytes()


def test_extract_flat_images_zero_rows_with_warning(tmp_path, caplog):
    root = tmp_path / "flats"
    (root / "ok").mkdir(parents=True)
    for i in range(3):
        save_gray_png(root / "ok" / f"flat_{i}.png", np.full((48, 48), 0.5))
    out = tmp_path / "features.csv"
    with caplog.at_level(logging.WARNING):
        assert main(["extract", "--images", str(root), "--out", str(out)]) == 0
    ds = read_features_csv(out)
    assert np.all(ds.matrix == 0.0)
    assert any("zero padding" in rec.message for rec in caplog.records)


def test_extract_without_inputs_is_config_error(tmp_path):
    assert main(["extract", "--out", str(tmp_path / "f.csv")]) == 2


def test_extract_empty_output_is_io_error(tmp_path):
    root = tmp_path / "broken"
    (root / "ok").mkdir(parents=True)
    (root / "ok" / "bad.png").write_bytes(b"not a png")
    assert main(["extract", "--images", str(root), "--out", str(tmp_path / "f.csv")]) == 1


def test_split_infeasible_exit_code(tmp_path, image_tree):
    out = tmp_path / "manifest.csv"
    code = main([
        "split", "--images", str(image_tree), "--out", str(out),
        "--train-ok", "4000", "--train-nok", "0", "--test-ok", "0", "--test-nok", "0",
    ])
    assert code == 2


def test_full_pipeline_and_report(tmp_path, image_tree, capsys):
    manifest, features, model_file, report = run_pipeline(image_tree, tmp_path)
    doc = load_report_json(report)
    assert doc["model_kind"] == "gnb"
    assert doc["detector"] == "fast_hessian"
    assert 0.0 <= doc["accuracy"] <= 1.0
    assert doc["tp"] + doc["fp"] + doc["tn"] + doc["fn"] == 24
    roc_text = (tmp_path / "roc.csv").read_text().splitlines()
    assert roc_text[0] == "threshold,fpr,tpr"

    capsys.readouterr()
    assert main(["report", str(report)]) == 0
    table = capsys.readouterr().out
    assert "Feature extractor" in table
    assert "gnb" in table

    out_table = tmp_path / "table.txt"
    assert main(["report", str(report), "--out", str(out_table)]) == 0
    assert "AUC - Test" in out_table.read_text()


def test_model_json_round_trips_reload(tmp_path, image_tree):
    _, features, model_file, report = run_pipeline(image_tree, tmp_path, model="logreg")
    doc = json.loads(model_file.read_text())
    assert doc["model_kind"] == "logreg"
    assert doc["feature_dim"] == 10
    assert doc["normalizer"] is not None
    assert doc["created_with_config_hash"]
    reloaded = load_report_json(report)
    assert reloaded["accuracy"] == pytest.approx(json.loads(report.read_text())["accuracy"])


def test_one_class_training_drops_nok_with_warning(tmp_path, image_tree, caplog):
    out_dir = tmp_path
    with caplog.at_level(logging.WARNING):
        run_pipeline(image_tree, out_dir, model="ocsvm")
    assert any("dropping" in rec.message for rec in caplog.records)


def test_retrain_same_inputs_identical_model(tmp_path, image_tree):
    d1 = tmp_path / "run1"
    d2 = tmp_path / "run2"
    d1.mkdir()
    d2.mkdir()
    run_pipeline(image_tree, d1, model="svm")
    run_pipeline(image_tree, d2, model="svm")
    assert (d1 / "model.json").read_bytes() == (d2 / "model.json").read_bytes()
    assert (d1 / "features.csv").read_bytes() == (d2 / "features.csv").read_bytes()
    assert (d1 / "report.json").read_bytes() == (d2 / "report.json").read_bytes()


def test_validation_threshold_source(tmp_path, image_tree):
    manifest = tmp_path / "manifest.csv"
    features = tmp_path / "features.csv"
    model_file = tmp_path / "model.json"
    report = tmp_path / "report.json"
    assert main([
        "split", "--images", str(image_tree), "--out", str(manifest),
        "--train-ok", "24", "--train-nok", "12", "--test-ok", "12", "--test-nok", "12",
        "--nok-ratio", "0.5,0.25,0.25", "--seed", "2",
    ]) == 0
    assert main(["extract", "--manifest", str(manifest), "--out", str(features)]) == 0
    assert main(["train", "--features", str(features), "--manifest", str(manifest),
                 "--model", "tree", "--out", str(model_file)]) == 0
    assert main(["eval", "--model-file", str(model_file), "--features", str(features),
                 "--manifest", str(manifest), "--out", str(report),
                 "--threshold-source", "validation"]) == 0
    assert load_report_json(report)["threshold_source"] == "validation"


def test_eval_missing_ids_is_config_error(tmp_path, image_tree):
    manifest, features, model_file, report = run_pipeline(image_tree, tmp_path)
    # manifest that references ids absent from the features file
    other = tmp_path / "other_manifest.csv"
    text = manifest.read_text().replace("ok_0000", "ok_9999")
    other.write_text(text)
    code = main(["eval", "--model-file", str(model_file), "--features", str(features),
                 "--manifest", str(other), "--out", str(tmp_path / "r2.json")])
    assert code == 2


def test_solver_nonconvergence_exit_code(tmp_path, image_tree):
    manifest = tmp_path / "manifest.csv"
    features = tmp_path / "features.csv"
    cfg = tmp_path / "config.ini"
    cfg.write_text("[model]\nkind = ocsvm\nsolver_max_iter = 1\nnu = 0.5\n")
    assert main([
        "split", "--images", str(image_tree), "--out", str(manifest),
        "--train-ok", "24", "--train-nok", "0", "--test-ok", "12", "--test-nok", "12",
        "--nok-ratio", "0.5,0.25,0.25",
    ]) == 0
    assert main(["extract", "--manifest", str(manifest), "--out", str(features)]) == 0
    code = main(["train", "--features", str(features), "--manifest", str(manifest),
                 "--config", str(cfg), "--out", str(tmp_path / "model.json")])
    assert code == 3


def test_config_file_flag_precedence(tmp_path, image_tree):
    cfg = tmp_path / "config.ini"
    cfg.write_text("[detector]\nkind = dog\n\n[descriptor]\nk = 3\n")
    out = tmp_path / "features.csv"
    assert main(["extract", "--images", str(image_tree), "--out", str(out), "--config", str(cfg)]) == 0
    assert read_features_csv(out).matrix.shape == (21, 6)  # k=3 from file
    out2 = tmp_path / "features2.csv"
    assert main(["extract", "--images", str(image_tree), "--out", str(out2),
                 "--config", str(cfg), "--k", "5"]) == 0
    assert read_features_csv(out2).matrix.shape == (21, 10)  # flag wins


def test_unknown_config_key_is_config_error(tmp_path, image_tree):
    cfg = tmp_path / "config.ini"
    cfg.write_text("[detector]\nwhat = 1\n")
    assert main(["extract", "--images", str(image_tree), "--out", str(tmp_path / "f.csv"),
                 "--config", str(cfg)]) == 2
