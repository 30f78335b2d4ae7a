"""Learnable quality evaluation: a regularized logistic classifier.

The model is deliberately simple: 11 weights + bias over standardized
content features, trained by deterministic full-batch descent.  The
objective is

    F(w, b) = mean log-loss + (l2 / 2) * ||w||^2      (bias unpenalized)

Each epoch applies the gradient step to the data term and the exact
proximal (closed-form) shrink to the ridge term:

    w <- (w - lr * grad_data) / (1 + lr * l2),   b <- b - lr * grad_b

Backward-Euler handling of the penalty keeps the epoch stable for any
l2 >= 0 (a naive explicit step diverges once lr * l2 > 2), so F is
non-increasing per epoch at the default lr on standardized features,
and extreme l2 genuinely crushes the weights instead of exploding.
``loss`` and ``gradient`` expose the exact objective and its analytic
derivative for finite-difference verification.

Labels are the strings "accept" / "reject" throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import Standardization
from .errors import MissingField, ParseError, SingleClass
from .segments import ContentFeatures, FEATURE_COUNT, FEATURE_NAMES

ACCEPT = "accept"
REJECT = "reject"


@dataclass(frozen=True)
class Hyper:
    l2: float = 0.01
    lr: float = 0.1
    epochs: int = 300


@dataclass
class QualityModel:
    weights: np.ndarray
    bias: float
    standardization: Standardization
    hyper: Hyper
    loss_history: list[float] = field(default_factory=list, repr=False)

    @classmethod
    def zero(cls, hyper: Hyper = Hyper()) -> "QualityModel":
        return cls(
            weights=np.zeros(FEATURE_COUNT),
            bias=0.0,
            standardization=Standardization(
                mean=np.zeros(FEATURE_COUNT), std=np.ones(FEATURE_COUNT)
            ),
            hyper=hyper,
        )


def _sigmoid(z: np.ndarray | float):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def loss(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    """Mean log-loss plus the ridge term; X must already be standardized."""
    p = _sigmoid(X @ w + b)
    eps = 1e-12
    ll = -(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps)).mean()
    return float(ll + 0.5 * l2 * (w @ w))


def gradient(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of ``loss`` in (w, b)."""
    p = _sigmoid(X @ w + b)
    err = p - y
    grad_w = X.T @ err / len(y) + l2 * w
    grad_b = float(err.mean())
    return grad_w, grad_b


def train(
    labeled: list[tuple[ContentFeatures, str]], hyper: Hyper = Hyper()
) -> QualityModel:
    """Fit the classifier on (features, label) pairs.

    Deterministic: zero-initialized weights, fixed epoch count, no
    shuffling.  Raises SingleClass unless both labels are present.
    """
    labels = {lab for _, lab in labeled}
    if labels - {ACCEPT, REJECT}:
        raise ValueError(f"unknown labels: {labels - {ACCEPT, REJECT}}")
    if len(labels) < 2:
        raise SingleClass("training set must contain both accept and reject")

    X_raw = np.array([f.to_vector() for f, _ in labeled], dtype=float)
    y = np.array([1.0 if lab == ACCEPT else 0.0 for _, lab in labeled])
    std = Standardization.fit(X_raw)
    X = std.apply(X_raw)

    w = np.zeros(FEATURE_COUNT)
    b = 0.0
    lr, l2 = hyper.lr, hyper.l2
    history = [loss(X, y, w, b, l2)]
    for _ in range(hyper.epochs):
        p = _sigmoid(X @ w + b)
        err = p - y
        w = (w - lr * (X.T @ err / len(y))) / (1.0 + lr * l2)
        b -= lr * float(err.mean())
        history.append(loss(X, y, w, b, l2))

    return QualityModel(
        weights=w, bias=b, standardization=std, hyper=hyper, loss_history=history
    )


def predict(m: QualityModel, f: ContentFeatures) -> float:
    """Acceptance probability in the open interval (0, 1)."""
    z = m.standardization.apply(np.asarray(f.to_vector())) @ m.weights + m.bias
    return float(_sigmoid(z))


def predict_batch(m: QualityModel, X_raw: np.ndarray) -> np.ndarray:
    """Vectorized ``predict`` over raw (unstandardized) feature rows."""
    return _sigmoid(m.standardization.apply(X_raw) @ m.weights + m.bias)


def uncertainty(m: QualityModel, f: ContentFeatures) -> float:
    """Query informativeness: 1 at p = 0.5, falling to 0 at the extremes."""
    return 1.0 - 2.0 * abs(predict(m, f) - 0.5)


_FMT = "{:.17g}"


def save_model(m: QualityModel, path) -> None:
    """Plain key=value text; floats carry 17 significant digits so the
    round-trip is exact for IEEE doubles."""
    lines = [
        "cpforge-model v1",
        "features = " + ",".join(FEATURE_NAMES),
        "mean = " + ",".join(_FMT.format(v) for v in m.standardization.mean),
        "std = " + ",".join(_FMT.format(v) for v in m.standardization.std),
        "weights = " + ",".join(_FMT.format(v) for v in m.weights),
        "bias = " + _FMT.format(m.bias),
        "l2 = " + _FMT.format(m.hyper.l2),
        "lr = " + _FMT.format(m.hyper.lr),
        "epochs = " + str(m.hyper.epochs),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> QualityModel:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != "cpforge-model v1":
        raise ParseError(f"{path}: not a model file")
    kv = {}
    for ln in lines[1:]:
        if " = " not in ln:
            raise ParseError(f"{path}: malformed line {ln!r}")
        key, val = ln.split(" = ", 1)
        kv[key] = val

    def vector(key: str) -> np.ndarray:
        if key not in kv:
            raise MissingField(f"{path}: missing {key!r}")
        vals = np.array([float(v) for v in kv[key].split(",")])
        if len(vals) != FEATURE_COUNT:
            raise MissingField(
                f"{path}: {key} has {len(vals)} values, expected {FEATURE_COUNT}"
            )
        return vals

    def scalar(key: str) -> float:
        if key not in kv:
            raise MissingField(f"{path}: missing {key!r}")
        return float(kv[key])

    try:
        model = QualityModel(
            weights=vector("weights"),
            bias=scalar("bias"),
            standardization=Standardization(mean=vector("mean"), std=vector("std")),
            hyper=Hyper(l2=scalar("l2"), lr=scalar("lr"), epochs=int(scalar("epochs"))),
        )
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return model
