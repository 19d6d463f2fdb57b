"""Six classifier families behind one ``train(spec, X, y)`` entry point."""

from __future__ import annotations

import json
from pathlib import Path

from .base import (
    FAMILIES,
    FORMAT_VERSION,
    ConvergenceWarning,
    DegenerateFitError,
    ModelError,
    ModelSpec,
    Standardizer,
    TrainedModel,
)
from .forest import RandomForest, train_random_forest
from .gbt import GradientBoostedTrees, train_gbt
from .knn import NearestNeighbors, train_knn
from .linear import LinearDiscriminant, LogisticGLM, train_glm, train_lda
from .svm import RBFSupportVectorMachine, train_svm_rbf

TRAINERS = {
    "gbt": train_gbt,
    "random_forest": train_random_forest,
    "glm": train_glm,
    "lda": train_lda,
    "svm_rbf": train_svm_rbf,
    "knn": train_knn,
}

MODEL_CLASSES = {
    "gbt": GradientBoostedTrees,
    "random_forest": RandomForest,
    "glm": LogisticGLM,
    "lda": LinearDiscriminant,
    "svm_rbf": RBFSupportVectorMachine,
    "knn": NearestNeighbors,
}

TREE_FAMILIES = ("gbt", "random_forest")


def train(spec: ModelSpec, X, y) -> TrainedModel:
    spec.resolved()
    return TRAINERS[spec.family](X, y, spec=spec)


def model_from_dict(d: dict) -> TrainedModel:
    if d.get("format_version") != FORMAT_VERSION:
        raise ModelError(f"unsupported model format_version {d.get('format_version')!r}")
    spec = ModelSpec.from_dict(d["spec"])
    cls = MODEL_CLASSES[d["family"]]
    model = cls.from_state(spec, d["state"], Standardizer.from_dict(d["standardizer"]))
    model.feature_names = tuple(d["feature_names"])
    return model


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


__all__ = [
    "FAMILIES",
    "TREE_FAMILIES",
    "ConvergenceWarning",
    "DegenerateFitError",
    "ModelError",
    "ModelSpec",
    "TrainedModel",
    "train",
    "train_gbt",
    "train_random_forest",
    "train_glm",
    "train_lda",
    "train_svm_rbf",
    "train_knn",
    "save_model",
    "load_model",
    "model_from_dict",
]
