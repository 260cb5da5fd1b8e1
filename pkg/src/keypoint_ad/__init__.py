"""Keypoint-based image anomaly detection.

Pipeline: detect scale-space keypoints (difference-of-Gaussians or
box-filter fast-Hessian), summarize each image by the scale and response
of its K strongest keypoints, then classify with one-class (OC-SVM, SVDD)
or semi-supervised (binary SVM, Gaussian naive Bayes, logistic regression,
coarse decision tree) models, evaluated by accuracy and ROC/AUC.
"""

from .classifiers import (
    ConvergenceError,
    KernelSpec,
    ModelConfig,
    fit_model,
    predict_gnb,
    score,
    score_samples,
    train_gnb,
    train_logreg,
    train_ocsvm,
    train_svdd,
    train_svm,
    train_tree,
)
from .descriptor import (
    LABEL_NOK,
    LABEL_OK,
    LabeledDataset,
    Normalizer,
    apply_normalizer,
    build_vector,
    fit_normalizer,
    invert_normalizer,
    read_features_csv,
    top_k,
    write_features_csv,
)
from .detector import (
    DetectorConfig,
    ImageTooSmallError,
    Keypoint,
    default_config,
    detect,
    detect_dog,
    detect_fast_hessian,
)
from .dataset import (
    InfeasibleSplitError,
    SampleRecord,
    SplitSpec,
    augment_rotations,
    build_splits,
    crop_to_bbox,
)
from .evaluation import (
    EvalReport,
    RocCurve,
    cross_validate,
    evaluate,
    grid_search,
    roc_and_auc,
    select_threshold,
)
from .images import box_sum, gaussian_blur, rotate90, to_integral
from .model_io import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "KernelSpec",
    "ModelConfig",
    "fit_model",
    "predict_gnb",
    "score",
    "score_samples",
    "train_gnb",
    "train_logreg",
    "train_ocsvm",
    "train_svdd",
    "train_svm",
    "train_tree",
    "LABEL_NOK",
    "LABEL_OK",
    "LabeledDataset",
    "Normalizer",
    "apply_normalizer",
    "build_vector",
    "fit_normalizer",
    "invert_normalizer",
    "read_features_csv",
    "top_k",
    "write_features_csv",
    "DetectorConfig",
    "ImageTooSmallError",
    "Keypoint",
    "default_config",
    "detect",
    "detect_dog",
    "detect_fast_hessian",
    "InfeasibleSplitError",
    "SampleRecord",
    "SplitSpec",
    "augment_rotations",
    "build_splits",
    "crop_to_bbox",
    "EvalReport",
    "RocCurve",
    "cross_validate",
    "evaluate",
    "grid_search",
    "roc_and_auc",
    "select_threshold",
    "box_sum",
    "gaussian_blur",
    "rotate90",
    "to_integral",
    "load_model",
    "save_model",
]
