"""Linear genuine/spoof classifier (Fisher LDA) and PAD error rates.

Features are z-normalised with training statistics. Missing (NaN) entries
are imputed with z = 0, which is neutral under a linear score. The genuine
class sits on the positive side: a sample is genuine when
``score + bias > threshold``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

MODEL_MAGIC = "FNFPAD-LDA v1"
RIDGE_MAX = 1e-2
COND_LIMIT = 1e12


class ModelFormatError(ValueError):
    pass


class SingularScatterError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class LinearModel:
    feature_names: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    weights: np.ndarray
    bias: float = 0.0
    threshold: float = 0.0

    def __post_init__(self):
        n = len(self.feature_names)
        for name in ("means", "stds", "weights"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have length {n}, got shape {arr.shape}")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if np.any(self.stds <= 0):
            raise ValueError("normalisation stds must be positive")

    def normalize(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.feature_names):
            raise ValueError(f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        z = (X - self.means) / self.stds
        return np.where(np.isnan(z), 0.0, z)

    def score(self, X) -> np.ndarray:
        return self.normalize(X) @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        """Boolean array, True for samples classified genuine."""
        return self.score(X) > self.threshold

    def raw_direction(self) -> np.ndarray:
        """Discriminant direction expressed in un-normalised feature units."""
        return self.weights / self.stds


def _column_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    present = ~np.isnan(X)
    counts = present.sum(axis=0)
    filled = np.where(present, X, 0.0)
    means = np.divide(filled.sum(axis=0), counts, out=np.zeros(X.shape[1]), where=counts > 0)
    sq = np.where(present, (X - means) ** 2, 0.0).sum(axis=0)
    stds = np.sqrt(np.divide(sq, counts, out=np.zeros(X.shape[1]), where=counts > 0))
    # constant or all-missing columns carry no information; keep them finite
    stds[stds <= 1e-12] = 1.0
    return means, stds


def _class_cov(Z: np.ndarray) -> np.ndarray:
    d = Z - Z.mean(axis=0)
    return d.T @ d / Z.shape[0]


def train_fisher_lda(X, is_genuine, feature_names: Sequence[str] | None = None,
                     ridge: float = 1e-6) -> LinearModel:
    """Closed-form Fisher LDA: ``w = (S_g + S_s + ridge*I)^-1 (mu_g - mu_s)``.

    ``X`` is ``(n, d)`` with NaN for missing values. If the regularised
    scatter is ill-conditioned the ridge grows tenfold up to 1e-2.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(is_genuine, dtype=bool).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be (n, d) with one label per row")
    n_g, n_s = int(y.sum()), int((~y).sum())
    if n_g < 2 or n_s < 2:
        raise ValueError(f"need at least 2 samples per class, got {n_g} genuine and {n_s} spoof")
    d = X.shape[1]
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{i}" for i in range(d))
    if len(names) != d:
        raise ValueError("feature_names length does not match X")

    means, stds = _column_stats(X)
    Z = (X - means) / stds
    Z = np.where(np.isnan(Z), 0.0, Z)
    zg, zs = Z[y], Z[~y]
    scatter = _class_cov(zg) + _class_cov(zs)
    dmu = zg.mean(axis=0) - zs.mean(axis=0)

    lam = ridge
    while True:
        A = scatter + lam * np.eye(d)
        if np.linalg.cond(A) < COND_LIMIT:
            break
        if lam >= RIDGE_MAX:
            raise SingularScatterError(f"scatter matrix singular even with ridge {lam:g}")
        lam = min(lam * 10.0, RIDGE_MAX)
    w = np.linalg.solve(A, dmu)
    threshold = 0.5 * float(zg.mean(axis=0) @ w + zs.mean(axis=0) @ w)
    return LinearModel(names, means, stds, w, 0.0, threshold)


def evaluate(predicted_genuine, is_genuine) -> dict:
    """Accuracy, APCER (spoofs accepted) and BPCER (genuine rejected).

    A rate whose class is absent from ``is_genuine`` is reported as None.
    """
    pred = np.asarray(predicted_genuine, dtype=bool).ravel()
    truth = np.asarray(is_genuine, dtype=bool).ravel()
    if pred.size != truth.size:
        raise ValueError("prediction and label counts differ")
    if truth.size == 0:
        raise ValueError("cannot evaluate an empty set")
    n_g, n_s = int(truth.sum()), int((~truth).sum())
    return {
        "n_genuine": n_g,
        "n_spoof": n_s,
        "accuracy": float(np.mean(pred == truth)),
        "apcer": float(np.sum(pred & ~truth) / n_s) if n_s else None,
        "bpcer": float(np.sum(~pred & truth) / n_g) if n_g else None,
    }


def evaluate_model(model: LinearModel, X, is_genuine) -> dict:
    return evaluate(model.predict(X), is_genuine)


# -- persistence ---------------------------------------------------------

def dumps_model(model: LinearModel) -> str:
    """Plain-text model: magic, count, names, (mean, std) pairs, weights,
    bias, threshold. One value per line; floats use shortest round-trip repr."""
    lines = [MODEL_MAGIC, str(len(model.feature_names))]
    lines += list(model.feature_names)
    for m, s in zip(model.means, model.stds):
        lines += [repr(float(m)), repr(float(s))]
    lines += [repr(float(w)) for w in model.weights]
    lines += [repr(float(model.bias)), repr(float(model.threshold))]
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> LinearModel:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MODEL_MAGIC:
        raise ModelFormatError("unrecognized model file")
    try:
        n = int(lines[1])
        if n < 1:
            raise ValueError
    except (IndexError, ValueError):
        raise ModelFormatError("model file: bad feature count") from None
    expected = 2 + n + 2 * n + n + 2
    if len(lines) != expected:
        raise ModelFormatError(f"model file: expected {expected} lines, found {len(lines)}")
    names = tuple(lines[2 : 2 + n])
    try:
        nums = np.array([float(v) for v in lines[2 + n :]], dtype=np.float64)
    except ValueError as exc:
        raise ModelFormatError(f"model file: {exc}") from None
    pairs = nums[: 2 * n].reshape(n, 2)
    weights = nums[2 * n : 3 * n]
    bias, threshold = nums[3 * n], nums[3 * n + 1]
    try:
        return LinearModel(names, pairs[:, 0], pairs[:, 1], weights, float(bias), float(threshold))
    except ValueError as exc:
        raise ModelFormatError(f"model file: {exc}") from None


def save_model(model: LinearModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path) -> LinearModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))
