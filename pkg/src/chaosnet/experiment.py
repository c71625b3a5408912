"""The training matrix: maps x schemes x hidden sizes x epoch budgets x repetitions."""

from __future__ import annotations

import csv
import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .codec import SCHEMES, Dataset, enumerate_dataset, split_dataset
from .dynamics import BooleanMap, resolve_map
from .graph import certify_chaos
from .mlp import (
    MlpModel,
    SuccessReport,
    TrainConfig,
    TrainingError,
    evaluate_predictions,
    init_model,
    lbfgs_train,
)

log = logging.getLogger(__name__)

RESULT_FIELDS = [
    "function", "scheme", "hidden", "epochs", "output",
    "mean", "std", "repetitions", "failures", "chaotic",
]


@dataclass
class ExperimentConfig:
    maps: list[str] = field(default_factory=lambda: ["paper_f", "paper_g"])
    n: int = 4
    k: int = 3
    schemes: list[str] = field(default_factory=lambda: ["1", "2"])
    hidden: list[int] = field(default_factory=lambda: [10, 25])
    epochs: list[int] = field(default_factory=lambda: [125, 250, 500])
    repetitions: int = 10
    seed: int = 0
    out: str = "results"
    workers: int = 1
    series: bool = True

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ValueError(f"unknown schemes {bad}")
        if not self.maps:
            raise ValueError("no maps given")

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        """Parse flat ``key = value`` lines; list values are comma-separated."""
        values: dict[str, str] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> ExperimentConfig:
        def items(v):
            return [s.strip() for s in v.split(",") if s.strip()]

        kwargs = {}
        for key, val in values.items():
            if key in ("maps", "schemes"):
                kwargs[key] = items(val)
            elif key in ("hidden", "epochs"):
                kwargs[key] = [int(s) for s in items(val)]
            elif key in ("n", "k", "repetitions", "seed", "workers"):
                kwargs[key] = int(val)
            elif key == "out":
                kwargs[key] = val
            elif key == "series":
                kwargs[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                raise ValueError(f"unknown config key {key!r}")
        return cls(**kwargs)


def derive_seed(*parts) -> int:
    """Stable 32-bit seed from any printable key (independent of PYTHONHASHSEED)."""
    digest = hashlib.sha256("|".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass
class ResultRow:
    function: str
    scheme: str
    hidden: int
    epochs: int
    output: str
    mean: float
    std: float
    repetitions: int
    failures: int
    chaotic: bool

    def as_csv(self) -> list[str]:
        return [
            self.function, self.scheme, str(self.hidden), str(self.epochs), self.output,
            f"{self.mean:.4f}", f"{self.std:.4f}", str(self.repetitions),
            str(self.failures), str(self.chaotic).lower(),
        ]


def train_cell_run(
    ds: Dataset, hidden: int, epochs: int, seed: int
) -> tuple[np.ndarray, Dataset, list[MlpModel]]:
    """Train one repetition; returns (test predictions, test set, models).

    Scheme ``2-split`` trains one single-output network per output column.
    """
    split_seed = derive_seed(seed, "split")
    train, val, test = split_dataset(ds, split_seed)
    cfg = TrainConfig(max_epochs=epochs, hidden=hidden, seed=seed)
    columns = range(ds.q) if ds.scheme == "2-split" else [None]
    preds, models = [], []
    for j in columns:
        tr, va = (train, val) if j is None else (train.select_output(j), val.select_output(j))
        model = init_model((ds.p, hidden, tr.q), derive_seed(seed, "init", j))
        model = lbfgs_train(model, tr, va, cfg)
        preds.append(model.predict(test.inputs))
        models.append(model)
    return np.hstack(preds), test, models


def _job(args):
    ds, hidden, epochs, seed = args
    try:
        pred, test, _ = train_cell_run(ds, hidden, epochs, seed)
    except (TrainingError, FloatingPointError) as exc:
        return None, None, str(exc)
    return evaluate_predictions(pred, test), (pred, test), None


def emit_prediction_series(model_or_pred, test: Dataset, path: str | Path, svg: str | Path | None = None) -> Path:
    """CSV of (index, expected, predicted) configuration values over the test set.

    Bit-coded configurations are reported as integers v(x) (predictions
    thresholded at 0.5); a single coded configuration output is reported as
    the raw network output next to its target.
    """
    if isinstance(model_or_pred, MlpModel):
        pred = model_or_pred.predict(test.inputs)
    else:
        pred = np.asarray(model_or_pred, dtype=float)
    if len(test) == 0:
        raise ValueError("empty test set")
    cols = [j for j, s in enumerate(test.output_specs) if s.group == "config"]
    if len(cols) > 1:
        weights = 2.0 ** np.arange(len(cols) - 1, -1, -1)
        expected = (test.outputs[:, cols] >= 0.5) @ weights
        predicted = (pred[:, cols] >= 0.5) @ weights
    else:
        expected = test.outputs[:, cols[0]]
        predicted = pred[:, cols[0]]
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "expected", "predicted"])
        for i, (e, p) in enumerate(zip(expected, predicted)):
            w.writerow([i, f"{e:g}", f"{p:.6g}"])
    if svg is not None:
        _plot_series(expected, predicted, svg)
    return path


def _plot_series(expected, predicted, svg):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 3))
    idx = np.arange(len(expected))
    ax.plot(idx, expected, "o", ms=2, label="expected")
    ax.plot(idx, predicted, "x", ms=2, label="predicted")
    ax.set_xlabel("test sample")
    ax.set_ylabel("configuration")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(svg, format="svg", metadata={"Date": None})
    plt.close(fig)


def _load_maps(cfg: ExperimentConfig) -> list[tuple[str, BooleanMap]]:
    maps = []
    for spec in cfg.maps:
        f = resolve_map(spec)
        if f.n != cfg.n:
            raise ValueError(f"map {spec!r} has n={f.n}, experiment uses n={cfg.n}")
        maps.append((spec, f))
    return maps


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run the whole matrix and write ``results.csv`` (plus prediction series) under ``cfg.out``."""
    maps = _load_maps(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    verdicts = {name: certify_chaos(f).verdict for name, f in maps}
    jobs, keys = [], []
    for name, f in maps:
        for scheme in cfg.schemes:
            ds = enumerate_dataset(f, cfg.n, cfg.k, scheme)
            for hidden in cfg.hidden:
                for epochs in cfg.epochs:
                    for r in range(cfg.repetitions):
                        seed = derive_seed(cfg.seed, name, scheme, hidden, epochs, r)
                        jobs.append((ds, hidden, epochs, seed))
                        keys.append((name, scheme, hidden, epochs, r))

    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            outcomes = list(pool.map(_job, jobs, chunksize=1))
    else:
        outcomes = [_job(j) for j in jobs]

    cells: dict[tuple, list] = {}
    failures: dict[tuple, int] = {}
    for (name, scheme, hidden, epochs, r), (report, series, err) in zip(keys, outcomes):
        cell = (name, scheme, hidden, epochs)
        cells.setdefault(cell, [])
        failures.setdefault(cell, 0)
        if err is not None:
            failures[cell] += 1
            log.warning("run %s rep %d failed: %s (excluded from the mean)", cell, r, err)
            continue
        cells[cell].append(report)
        if cfg.series and len(cells[cell]) == 1:
            (out / "series").mkdir(exist_ok=True)
            pred, test = series
            emit_prediction_series(pred, test, out / "series" / _series_name(cell))

    rows = []
    for cell in sorted(cells):
        name, scheme, hidden, epochs = cell
        reports = cells[cell]
        if not reports:
            log.warning("all repetitions of %s failed", cell)
            continue
        agg = SuccessReport.combine(reports)
        mean, std = agg.mean, agg.std
        for output in agg.names:
            rows.append(ResultRow(
                name, scheme, hidden, epochs, output, mean[output], std[output],
                agg.repetitions, failures[cell], verdicts[name],
            ))
    write_results(rows, out / "results.csv")
    return rows


def _series_name(cell) -> str:
    name, scheme, hidden, epochs = cell
    safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in Path(name).stem)
    return f"{safe}_scheme{scheme}_h{hidden}_e{epochs}.csv"


def write_results(rows: list[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_FIELDS)
        for row in rows:
            w.writerow(row.as_csv())


def read_results(path: str | Path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        rows = []
        for rec in csv.DictReader(fh):
            rows.append(ResultRow(
                rec["function"], rec["scheme"], int(rec["hidden"]), int(rec["epochs"]),
                rec["output"], float(rec["mean"]), float(rec["std"]),
                int(rec["repetitions"]), int(rec["failures"]), rec["chaotic"] == "true",
            ))
    return rows
