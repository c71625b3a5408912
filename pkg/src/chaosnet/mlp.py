"""One-hidden-layer perceptron (sigmoid hidden, linear output), trained with L-BFGS.

Parameters are flattened in the order W1 (h x p), b1 (h), W2 (q x h), b2 (q).
The loss is (1 / 2N) * sum ||forward(x) - target||^2 over the batch.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from . import lbfgs
from .codec import Dataset, scale

MODEL_FORMAT = "chaosnet-mlp/1"


class TrainingError(RuntimeError):
    pass


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    step_kind: str


@dataclass
class MlpModel:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    seed: int | None = None
    x_min: np.ndarray | None = None
    x_max: np.ndarray | None = None
    history: list[EpochRecord] = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.W1.shape[1]

    @property
    def h(self) -> int:
        return self.W1.shape[0]

    @property
    def q(self) -> int:
        return self.W2.shape[0]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.p, self.h, self.q

    @property
    def n_params(self) -> int:
        p, h, q = self.dims
        return h * p + h + q * h + q

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([self.W1.ravel(), self.b1, self.W2.ravel(), self.b2])

    def with_params(self, theta: np.ndarray) -> MlpModel:
        W1, b1, W2, b2 = unflatten(theta, self.dims)
        return MlpModel(W1, b1, W2, b2, self.seed, self.x_min, self.x_max, list(self.history))

    def scale_inputs(self, raw: np.ndarray) -> np.ndarray:
        """Apply the input normalization recorded at training time (identity if none)."""
        if self.x_min is None:
            return np.asarray(raw, dtype=float)
        return scale(np.asarray(raw, dtype=float), self.x_min, self.x_max)

    def predict(self, raw_inputs: np.ndarray) -> np.ndarray:
        return forward_batch(self, self.scale_inputs(raw_inputs))

    def save(self, path: str | Path) -> None:
        rec = {
            "format": MODEL_FORMAT,
            "dims": list(self.dims),
            "seed": self.seed,
            "params": self.params.tolist(),
            "x_min": None if self.x_min is None else np.asarray(self.x_min).tolist(),
            "x_max": None if self.x_max is None else np.asarray(self.x_max).tolist(),
        }
        Path(path).write_text(json.dumps(rec))

    @classmethod
    def load(cls, path: str | Path) -> MlpModel:
        rec = json.loads(Path(path).read_text())
        if rec.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: unsupported model format {rec.get('format')!r}")
        W1, b1, W2, b2 = unflatten(np.asarray(rec["params"], dtype=float), tuple(rec["dims"]))
        lo = None if rec["x_min"] is None else np.asarray(rec["x_min"], dtype=float)
        hi = None if rec["x_max"] is None else np.asarray(rec["x_max"], dtype=float)
        return cls(W1, b1, W2, b2, rec["seed"], lo, hi)


def unflatten(theta: np.ndarray, dims) -> tuple[np.ndarray, ...]:
    p, h, q = dims
    if theta.size != h * p + h + q * h + q:
        raise ValueError(f"parameter vector of size {theta.size} does not fit dims {dims}")
    i = 0
    W1 = theta[i:i + h * p].reshape(h, p); i += h * p
    b1 = theta[i:i + h]; i += h
    W2 = theta[i:i + q * h].reshape(q, h); i += q * h
    b2 = theta[i:i + q]
    return W1, b1, W2, b2


def init_model(dims: tuple[int, int, int], seed: int) -> MlpModel:
    """Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero."""
    p, h, q = dims
    if min(dims) < 1:
        raise ValueError(f"dims must be positive, got {dims}")
    rng = np.random.default_rng(seed)
    W1 = rng.uniform(-1, 1, size=(h, p)) / math.sqrt(p)
    W2 = rng.uniform(-1, 1, size=(q, h)) / math.sqrt(h)
    return MlpModel(W1, np.zeros(h), W2, np.zeros(q), seed=seed)


def forward_batch(model: MlpModel, X: np.ndarray) -> np.ndarray:
    hidden = expit(X @ model.W1.T + model.b1)
    return hidden @ model.W2.T + model.b2


def forward(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.p,):
        raise ValueError(f"input of shape {x.shape}, model expects ({model.p},)")
    return forward_batch(model, x[None, :])[0]


def _loss_grad(theta, dims, X, Y):
    W1, b1, W2, b2 = unflatten(theta, dims)
    N = X.shape[0]
    H = expit(X @ W1.T + b1)
    R = H @ W2.T + b2 - Y
    loss = 0.5 * float(np.sum(R * R)) / N
    dOut = R / N
    gW2 = dOut.T @ H
    gb2 = dOut.sum(axis=0)
    dZ = (dOut @ W2) * H * (1.0 - H)
    gW1 = dZ.T @ X
    gb1 = dZ.sum(axis=0)
    return loss, np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])


def loss_and_gradient(model: MlpModel, X: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if len(X) == 0:
        raise ValueError("empty batch")
    return _loss_grad(model.params, model.dims, X, Y.reshape(len(Y), -1))


@dataclass
class TrainConfig:
    max_epochs: int = 500
    hidden: int = 25
    memory: int = 10
    c1: float = 1e-4
    c2: float = 0.9
    gtol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("Wolfe constants need 0 < c1 < c2 < 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


def _arrays(data):
    if isinstance(data, Dataset):
        return data.scaled_inputs(), data.outputs
    X, Y = data
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return X, Y.reshape(len(Y), -1)


def lbfgs_train(model: MlpModel, train, validation, cfg: TrainConfig) -> MlpModel:
    """Full-batch L-BFGS on the training set; validation loss is only recorded.

    ``train`` and ``validation`` are Datasets (their scaled inputs are used
    and the scaling is stored in the returned model) or ``(X, Y)`` arrays.
    One epoch is one accepted parameter update.
    """
    X, Y = _arrays(train)
    Xv, Yv = _arrays(validation)
    if len(X) == 0 or len(Xv) == 0:
        raise ValueError("training and validation sets must be nonempty")
    dims = model.dims

    def fun(theta):
        return _loss_grad(theta, dims, X, Y)

    history: list[EpochRecord] = []

    def record(step: lbfgs.Step, theta):
        val_loss, _ = _loss_grad(theta, dims, Xv, Yv)
        history.append(EpochRecord(step.iteration, step.loss, val_loss, step.kind))

    with np.errstate(over="ignore", invalid="ignore"):
        result = lbfgs.minimize(
            fun, model.params, cfg.max_epochs, cfg.memory, cfg.c1, cfg.c2, cfg.gtol, record
        )
    if not np.all(np.isfinite(result.x)):
        raise TrainingError("parameters diverged to non-finite values")
    trained = model.with_params(result.x)
    trained.history = list(model.history) + history
    if isinstance(train, Dataset):
        trained.x_min, trained.x_max = train.x_min, train.x_max
    return trained


def write_history(model: MlpModel, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "val_loss", "step_kind"])
        for r in model.history:
            w.writerow([r.epoch, repr(r.train_loss), repr(r.val_loss), r.step_kind])


# -- success rates ----------------------------------------------------------


@dataclass
class SuccessReport:
    """Success rates in percent; one row of ``runs`` per repetition.

    Columns follow ``names``: each output, plus ``"config"`` (all
    configuration outputs right at once) when there are several of them.
    """

    names: list[str]
    runs: np.ndarray

    @property
    def mean(self) -> dict[str, float]:
        return dict(zip(self.names, self.runs.mean(axis=0).tolist()))

    @property
    def std(self) -> dict[str, float]:
        ddof = 1 if len(self.runs) > 1 else 0
        return dict(zip(self.names, self.runs.std(axis=0, ddof=ddof).tolist()))

    def rate(self, name: str) -> float:
        return self.mean[name]

    @property
    def repetitions(self) -> int:
        return len(self.runs)

    @classmethod
    def combine(cls, reports: list[SuccessReport]) -> SuccessReport:
        if not reports:
            raise ValueError("no reports to combine")
        names = reports[0].names
        if any(r.names != names for r in reports):
            raise ValueError("reports cover different outputs")
        return cls(names, np.vstack([r.runs for r in reports]))


def _round_half_up(x):
    return np.floor(x + 0.5)


def correct_matrix(pred: np.ndarray, ds: Dataset) -> np.ndarray:
    """Boolean (N, q) matrix: was each output of each sample predicted correctly."""
    pred = np.asarray(pred, dtype=float).reshape(len(ds), -1)
    ok = np.empty(pred.shape, dtype=bool)
    for j, spec in enumerate(ds.output_specs):
        target = ds.outputs[:, j]
        if spec.kind == "bit":
            ok[:, j] = (pred[:, j] >= 0.5) == (target >= 0.5)
        else:
            guess = np.clip(_round_half_up(pred[:, j]), spec.lo, spec.hi)
            ok[:, j] = guess == target
    return ok


def evaluate_predictions(pred: np.ndarray, ds: Dataset) -> SuccessReport:
    if len(ds) == 0:
        raise ValueError("empty test set")
    ok = correct_matrix(pred, ds)
    names, rates = [], []
    config_cols = [j for j, s in enumerate(ds.output_specs) if s.group == "config"]
    for j, spec in enumerate(ds.output_specs):
        if spec.group == "strategy" and len(config_cols) > 1:
            names.append("config")
            rates.append(100.0 * ok[:, config_cols].all(axis=1).mean())
        names.append(spec.name)
        rates.append(100.0 * ok[:, j].mean())
    if len(config_cols) > 1 and "config" not in names:
        names.append("config")
        rates.append(100.0 * ok[:, config_cols].all(axis=1).mean())
    return SuccessReport(names, np.array([rates]))


def evaluate_success(model: MlpModel, ds: Dataset) -> SuccessReport:
    """Per-output success rates of ``model`` on the test set ``ds``."""
    return evaluate_predictions(model.predict(ds.inputs), ds)
