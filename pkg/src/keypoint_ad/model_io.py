"""Model persistence as JSON.

Floats are written with 17 significant digits so every value round-trips
bit exactly; files are byte-identical across runs for identical models.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

from .classifiers import (
    BinarySVMModel,
    GNBModel,
    KernelSpec,
    LogRegModel,
    OneClassSVMModel,
    SVDDModel,
    TreeModel,
    TreeNode,
)
from .descriptor import Normalizer


def dumps_17g(obj, indent: int = 2) -> str:
    """Serialize to JSON with floats rendered as %.17g decimals."""
    pieces: list[str] = []

    def emit(value, depth):
        pad = " " * (indent * depth)
        inner = " " * (indent * (depth + 1))
        if isinstance(value, dict):
            if not value:
                pieces.append("{}")
                return
            pieces.append("{\n")
            for idx, (key, item) in enumerate(value.items()):
                pieces.append(f"{inner}{json.dumps(str(key))}: ")
                emit(item, depth + 1)
                pieces.append(",\n" if idx < len(value) - 1 else "\n")
            pieces.append(pad + "}")
        elif isinstance(value, (list, tuple)):
            if len(value) == 0:
                pieces.append("[]")
                return
            pieces.append("[\n")
            for idx, item in enumerate(value):
                pieces.append(inner)
                emit(item, depth + 1)
                pieces.append(",\n" if idx < len(value) - 1 else "\n")
            pieces.append(pad + "]")
        elif isinstance(value, bool) or value is None:
            pieces.append(json.dumps(value))
        elif isinstance(value, (int, np.integer)):
            pieces.append(str(int(value)))
        elif isinstance(value, (float, np.floating)):
            x = float(value)
            if not np.isfinite(x):
                raise ValueError(f"cannot serialize non-finite number {x}")
            pieces.append(format(x, ".17g"))
        elif isinstance(value, str):
            pieces.append(json.dumps(value))
        elif isinstance(value, np.ndarray):
            emit(value.tolist(), depth)
        else:
            raise TypeError(f"cannot serialize {type(value).__name__}")

    emit(obj, 0)
    return "".join(pieces)


def config_hash(config) -> str:
    """Stable hash of any config-ish object, for provenance stamping."""
    if config is None:
        return ""
    text = config if isinstance(config, str) else repr(config)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _normalizer_to_json(norm: Normalizer | None):
    if norm is None:
        return None
    return {
        "means": norm.means,
        "stds": norm.stds,
        "constant": [bool(v) for v in norm.constant],
    }


def _normalizer_from_json(data) -> Normalizer | None:
    if data is None:
        return None
    return Normalizer(
        means=np.asarray(data["means"], dtype=np.float64),
        stds=np.asarray(data["stds"], dtype=np.float64),
        constant=np.asarray(data["constant"], dtype=bool),
    )


def model_to_json(model, created_with_config_hash: str = "") -> dict:
    doc = {
        "model_kind": model.kind,
        "feature_dim": model.feature_dim,
        "hyperparameters": {},
        "parameters": {},
        "normalizer": _normalizer_to_json(model.normalizer),
        "created_with_config_hash": created_with_config_hash,
    }
    if isinstance(model, OneClassSVMModel):
        doc["hyperparameters"] = {"nu": model.nu, "kernel": "rbf", "gamma": model.kernel.gamma}
        doc["parameters"] = {
            "support_vectors": model.support_vectors,
            "alphas": model.alphas,
            "rho": model.rho,
        }
    elif isinstance(model, SVDDModel):
        doc["hyperparameters"] = {
            "c_pos": model.c_pos,
            "c_neg": model.c_neg,
            "kernel": "rbf",
            "gamma": model.kernel.gamma,
        }
        doc["parameters"] = {
            "support_vectors": model.support_vectors,
            "alphas": model.alphas,
            "signs": model.signs,
            "radius_sq": model.radius_sq,
            "center_norm_sq": model.center_norm_sq,
        }
    elif isinstance(model, BinarySVMModel):
        doc["hyperparameters"] = {"c": model.c, "kernel": "rbf", "gamma": model.kernel.gamma}
        doc["parameters"] = {
            "support_vectors": model.support_vectors,
            "betas": model.betas,
            "bias": model.bias,
        }
    elif isinstance(model, GNBModel):
        doc["parameters"] = {
            "priors": model.priors,
            "means": model.means,
            "variances": model.variances,
        }
    elif isinstance(model, LogRegModel):
        doc["hyperparameters"] = {"l2_lambda": model.l2_lambda}
        doc["parameters"] = {"weights": model.weights, "bias": model.bias}
    elif isinstance(model, TreeModel):
        doc["hyperparameters"] = {"max_splits": model.max_splits}
        doc["parameters"] = {
            "nodes": [
                {
                    "split_dim": n.split_dim,
                    "split_value": n.split_value,
                    "left": n.left,
                    "right": n.right,
                    "leaf_class": n.leaf_class,
                    "leaf_score": n.leaf_score,
                }
                for n in model.nodes
            ],
        }
    else:
        raise TypeError(f"cannot serialize model type {type(model).__name__}")
    return doc


def model_from_json(doc: dict):
    kind = doc["model_kind"]
    norm = _normalizer_from_json(doc.get("normalizer"))
    hyper = doc.get("hyperparameters", {})
    params = doc["parameters"]
    if kind == "ocsvm":
        return OneClassSVMModel(
            support_vectors=np.asarray(params["support_vectors"], dtype=np.float64),
            alphas=np.asarray(params["alphas"], dtype=np.float64),
            rho=float(params["rho"]),
            kernel=KernelSpec(gamma=float(hyper["gamma"])),
            nu=float(hyper["nu"]),
            normalizer=norm,
        )
    if kind == "svdd":
        return SVDDModel(
            support_vectors=np.asarray(params["support_vectors"], dtype=np.float64),
            alphas=np.asarray(params["alphas"], dtype=np.float64),
            signs=np.asarray(params["signs"], dtype=np.float64),
            radius_sq=float(params["radius_sq"]),
            center_norm_sq=float(params["center_norm_sq"]),
            kernel=KernelSpec(gamma=float(hyper["gamma"])),
            c_pos=float(hyper["c_pos"]),
            c_neg=float(hyper["c_neg"]),
            normalizer=norm,
        )
    if kind == "svm":
        return BinarySVMModel(
            support_vectors=np.asarray(params["support_vectors"], dtype=np.float64),
            betas=np.asarray(params["betas"], dtype=np.float64),
            bias=float(params["bias"]),
            kernel=KernelSpec(gamma=float(hyper["gamma"])),
            c=float(hyper["c"]),
            normalizer=norm,
        )
    if kind == "gnb":
        return GNBModel(
            priors=np.asarray(params["priors"], dtype=np.float64),
            means=np.asarray(params["means"], dtype=np.float64),
            variances=np.asarray(params["variances"], dtype=np.float64),
            normalizer=norm,
        )
    if kind == "logreg":
        return LogRegModel(
            weights=np.asarray(params["weights"], dtype=np.float64),
            bias=float(params["bias"]),
            l2_lambda=float(hyper["l2_lambda"]),
            normalizer=norm,
        )
    if kind == "tree":
        nodes = tuple(
            TreeNode(
                split_dim=int(n["split_dim"]),
                split_value=float(n["split_value"]),
                left=int(n["left"]),
                right=int(n["right"]),
                leaf_class=str(n["leaf_class"]),
                leaf_score=float(n["leaf_score"]),
            )
            for n in params["nodes"]
        )
        return TreeModel(
            nodes=nodes,
            n_features=int(doc["feature_dim"]),
            max_splits=int(hyper["max_splits"]),
            normalizer=norm,
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(path, model, created_with_config_hash: str = "") -> None:
    text = dumps_17g(model_to_json(model, created_with_config_hash))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(json.load(fh))
