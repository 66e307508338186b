"""Model artifact serialization.

An artifact is a JSON document bundling a fitted model, the fitted
selector it expects its inputs to pass through, the canonical feature
names, and training metadata. The built-in ``paper-eq1`` artifact carries
the published full-data logistic scoring model for the 22 questionnaire
features.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from . import __version__ as _toolkit_version
from .cohort import FEATURE_NAMES
from .learn import BoostModel, ForestModel, LogisticModel, SvmModel
from .selection import FeatureMask, PcaTransform
from .trees import Tree

SCHEMA_VERSION = 1

PAPER_EQ1 = "paper-eq1"

# Published full-data logistic model: coefficient per canonical feature.
_EQ1_COEFFICIENTS = {
    "P1_SLPN": -0.41803,
    "P1_SLPD": 0.026638,
    "P1_PAIN": -0.33983,
    "P1_URIN": 0.022716,
    "P1_CNST": 1.0682,
    "P1_LTHD": 0.16622,
    "P1_FATG": -0.49868,
    "P2_SPCH": 1.6894,
    "P2_SALV": 0.7519,
    "P2_SWAL": 0.90309,
    "P2_EAT": 2.2193,
    "P2_DRES": 1.4171,
    "P2_HYGN": 2.1455,
    "P2_HWRT": 1.1211,
    "P2_HOBB": 0.57116,
    "P2_TURN": 0.70782,
    "P2_TRMR": 4.3677,
    "P2_RISE": 0.72112,
    "P2_WALK": 0.3455,
    "P2_FREZ": 1.1776,
    "GENDER": -0.41561,
    "AGE": -0.031956,
}
_EQ1_INTERCEPT = 0.54813


class ArtifactError(ValueError):
    """Malformed or incompatible model artifact."""


def _tree_to_dict(tree: Tree) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "pd_fraction": tree.pd_fraction.tolist(),
    }


def _tree_from_dict(d: dict) -> Tree:
    return Tree(
        feature=np.array(d["feature"], dtype=np.int32),
        threshold=np.array(d["threshold"], dtype=float),
        left=np.array(d["left"], dtype=np.int32),
        right=np.array(d["right"], dtype=np.int32),
        pd_fraction=np.array(d["pd_fraction"], dtype=float),
    )


def _selector_to_dict(selector) -> dict:
    if selector is None:
        return {"type": "identity"}
    if isinstance(selector, FeatureMask):
        return {
            "type": "mask",
            "selected": list(selector.selected),
            "n_features": selector.n_features,
        }
    if isinstance(selector, PcaTransform):
        return {
            "type": "pca",
            "mean": selector.mean.tolist(),
            "components": selector.components.tolist(),
            "explained_fraction": selector.explained_fraction.tolist(),
            "eigenvalues": selector.eigenvalues.tolist(),
            "variance_threshold": selector.variance_threshold,
        }
    raise ArtifactError(f"unsupported selector type {type(selector).__name__}")


def _selector_from_dict(d: dict):
    t = d.get("type", "identity")
    if t == "identity":
        return None
    if t == "mask":
        return FeatureMask(tuple(d["selected"]), n_features=d["n_features"])
    if t == "pca":
        return PcaTransform(
            mean=np.array(d["mean"]),
            components=np.array(d["components"]),
            explained_fraction=np.array(d["explained_fraction"]),
            eigenvalues=np.array(d["eigenvalues"]),
            variance_threshold=d["variance_threshold"],
        )
    raise ArtifactError(f"unknown selector type {t!r}")


def _model_payload(model) -> tuple[str, dict]:
    if isinstance(model, LogisticModel):
        return "logistic", {
            "coefficients": model.coefficients.tolist(),
            "intercept": model.intercept,
            "separation_warning": model.separation_warning,
        }
    if isinstance(model, ForestModel):
        return "forest", {
            "trees": [_tree_to_dict(t) for t in model.trees],
            "oob_error": model.oob_error,
            "bootstrap_seeds": list(model.bootstrap_seeds),
            "n_features": model.n_features,
            "n_training_rows": model.n_training_rows,
            "max_features": model.max_features,
            "min_leaf": model.min_leaf,
            "seed": model.seed,
        }
    if isinstance(model, BoostModel):
        return "boost", {
            "trees": [_tree_to_dict(t) for t in model.weak_learners],
            "learner_weights": model.learner_weights.tolist(),
            "n_features": model.n_features,
            "max_depth": model.max_depth,
        }
    if isinstance(model, SvmModel):
        return "svm", {
            "support_vectors": model.support_vectors.tolist(),
            "dual_coefficients": model.dual_coefficients.tolist(),
            "bias": model.bias,
            "gamma": model.gamma,
            "c": model.c,
            "scaler_mean": model.scaler_mean.tolist(),
            "scaler_sd": model.scaler_sd.tolist(),
            "n_features": model.n_features,
        }
    raise ArtifactError(f"unsupported model type {type(model).__name__}")


def _model_from_payload(model_type: str, p: dict):
    if model_type == "logistic":
        return LogisticModel(
            coefficients=np.array(p["coefficients"]),
            intercept=p["intercept"],
            separation_warning=p.get("separation_warning", False),
        )
    if model_type == "forest":
        return ForestModel(
            trees=tuple(_tree_from_dict(t) for t in p["trees"]),
            oob_error=p["oob_error"],
            bootstrap_seeds=tuple(p["bootstrap_seeds"]),
            n_features=p["n_features"],
            n_training_rows=p["n_training_rows"],
            max_features=p["max_features"],
            min_leaf=p["min_leaf"],
            seed=p["seed"],
        )
    if model_type == "boost":
        return BoostModel(
            weak_learners=tuple(_tree_from_dict(t) for t in p["trees"]),
            learner_weights=np.array(p["learner_weights"]),
            n_features=p["n_features"],
            max_depth=p["max_depth"],
        )
    if model_type == "svm":
        return SvmModel(
            support_vectors=np.array(p["support_vectors"]),
            dual_coefficients=np.array(p["dual_coefficients"]),
            bias=p["bias"],
            gamma=p["gamma"],
            c=p["c"],
            scaler_mean=np.array(p["scaler_mean"]),
            scaler_sd=np.array(p["scaler_sd"]),
            n_features=p["n_features"],
        )
    raise ArtifactError(f"unknown model type {model_type!r}")


def data_fingerprint(X, y) -> str:
    h = hashlib.sha256()
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    y = np.ascontiguousarray(np.asarray(y, dtype=np.int64))
    h.update(str(X.shape).encode())
    h.update(X.tobytes())
    h.update(y.tobytes())
    return h.hexdigest()[:16]


def model_to_artifact(
    model,
    selector=None,
    feature_names=FEATURE_NAMES,
    model_id: str = "custom",
    metadata: dict | None = None,
) -> dict:
    model_type, payload = _model_payload(model)
    return {
        "schema_version": SCHEMA_VERSION,
        "model_id": model_id,
        "model_type": model_type,
        "feature_names": list(feature_names),
        "selector": _selector_to_dict(selector),
        "model": payload,
        "metadata": dict(metadata or {}),
        "toolkit_version": _toolkit_version,
    }


def model_from_artifact(artifact: dict):
    """Return (model, selector, feature_names) from an artifact document."""
    try:
        if int(artifact["schema_version"]) != SCHEMA_VERSION:
            raise ArtifactError(
                f"unsupported schema_version {artifact['schema_version']!r}"
            )
        model = _model_from_payload(artifact["model_type"], artifact["model"])
        selector = _selector_from_dict(artifact.get("selector", {"type": "identity"}))
        names = tuple(artifact["feature_names"])
    except KeyError as e:
        raise ArtifactError(f"artifact missing field {e}") from None
    return model, selector, names


def save_artifact(artifact: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(artifact, fh, indent=2)


def builtin_artifact(name: str) -> dict:
    """Artifacts shipped with the toolkit; currently only ``paper-eq1``."""
    if name != PAPER_EQ1:
        raise ArtifactError(f"unknown builtin artifact {name!r}")
    model = LogisticModel(
        coefficients=np.array([_EQ1_COEFFICIENTS[f] for f in FEATURE_NAMES]),
        intercept=_EQ1_INTERCEPT,
        feature_names=FEATURE_NAMES,
    )
    return model_to_artifact(
        model,
        selector=None,
        feature_names=FEATURE_NAMES,
        model_id=PAPER_EQ1,
        metadata={"source": "published full-data logistic scoring model"},
    )


def load_artifact(path_or_name) -> dict:
    """Load an artifact from a JSON file or by builtin name."""
    if str(path_or_name) == PAPER_EQ1:
        return builtin_artifact(PAPER_EQ1)
    try:
        with open(path_or_name, encoding="utf-8") as fh:
            artifact = json.load(fh)
    except FileNotFoundError:
        raise ArtifactError(f"artifact {path_or_name!r} not found") from None
    except json.JSONDecodeError as e:
        raise ArtifactError(f"artifact {path_or_name!r} is not valid JSON: {e}") from None
    if not isinstance(artifact, dict):
        raise ArtifactError("artifact must be a JSON object")
    return artifact
