"""Training numerics and the experiment protocol.

Contains the weighted ridge solver shared by every readout, the k-fold
cross-validation harness with contiguous time blocks, hyperparameter
sweeps, and the execution-time benchmark.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateRangeError, DimensionError, InvalidDataError,
                     InvalidSpecError, NumericError)
from .signals import format_float

EPSILON_SWEEP = (1.0, 0.1, 0.01, 1e-3, 1e-4)
CLUSTER_SWEEP = (1, 2, 4, 8, 16)
TAP_SWEEP = tuple(range(1, 11))


def ridge_solve(X, y, alpha: float, sample_weights=None) -> np.ndarray:
    """Solve ridge regression min_w sum_k s_k (y_k - w.x_k)^2 + alpha ||w||^2.

    The d x d normal system (X^T D X + alpha I) w = X^T D y is formed
    explicitly and solved by LU factorization. All weights, including any
    bias column the caller appended, are penalized.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise DimensionError("X must be a 2-D design matrix")
    if y.ndim != 1 or y.size != X.shape[0]:
        raise DimensionError(f"y length {y.size} does not match X rows {X.shape[0]}")
    if X.shape[0] < 1:
        raise InvalidDataError("need at least one sample")
    if alpha < 0.0:
        raise InvalidSpecError(f"alpha must be non-negative, got {alpha!r}")
    if sample_weights is not None:
        s = np.asarray(sample_weights, dtype=float)
        if s.shape != (X.shape[0],):
            raise DimensionError("sample_weights must be one weight per row of X")
        if np.any(s < 0.0):
            raise InvalidDataError("sample_weights must be non-negative")
        Xw = X * s[:, None]
        yw = y * s
    else:
        Xw = X
        yw = y
    d = X.shape[1]
    A = X.T @ Xw + alpha * np.eye(d)
    b = X.T @ yw
    try:
        w = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericError("normal system is singular; use alpha > 0 to regularize") from exc
    if not np.all(np.isfinite(w)):
        raise NumericError("ridge solution is not finite")
    return w


def rmse(a, b) -> float:
    """Root-mean-square difference of two equal-length 1-D arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.size != b.size:
        raise DimensionError(f"rmse needs equal-length 1-D arrays, got {a.shape} and {b.shape}")
    if a.size == 0:
        raise InvalidDataError("rmse of empty arrays is undefined")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def normalize_minmax(x) -> np.ndarray:
    """Scale a series to [0, 1] by its own min and max."""
    x = np.asarray(x, dtype=float)
    lo = float(np.min(x))
    hi = float(np.max(x))
    if hi == lo:
        raise DegenerateRangeError("normalize_minmax is undefined on a constant series")
    return (x - lo) / (hi - lo)


@dataclass(frozen=True)
class FoldResult:
    index: int
    e_train: float
    e_val: float

    @property
    def e_bar(self) -> float:
        return float(np.sqrt(self.e_train ** 2 + self.e_val ** 2))


@dataclass
class CvReport:
    """Per-fold errors plus the index selected by minimal combined error."""

    folds: list
    best_index: int

    @property
    def e_train_mean(self) -> float:
        return float(np.mean([f.e_train for f in self.folds]))

    @property
    def e_train_sd(self) -> float:
        return float(np.std([f.e_train for f in self.folds]))

    @property
    def e_val_mean(self) -> float:
        return float(np.mean([f.e_val for f in self.folds]))

    @property
    def e_val_sd(self) -> float:
        return float(np.std([f.e_val for f in self.folds]))

    def to_dict(self) -> dict:
        return {
            "folds": [{"index": f.index, "e_train": f.e_train, "e_val": f.e_val,
                       "e_bar": f.e_bar} for f in self.folds],
            "best_index": self.best_index,
            "e_train_mean": self.e_train_mean,
            "e_train_sd": self.e_train_sd,
            "e_val_mean": self.e_val_mean,
            "e_val_sd": self.e_val_sd,
        }

    def to_csv(self, path) -> None:
        lines = ["fold,e_train,e_val,e_bar,selected"]
        for f in self.folds:
            lines.append(f"{f.index},{format_float(f.e_train)},{format_float(f.e_val)},"
                         f"{format_float(f.e_bar)},{int(f.index == self.best_index)}")
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def contiguous_folds(n: int, k: int) -> list:
    """Split range(n) into k contiguous (lo, hi) blocks of near-equal size."""
    if k < 2:
        raise InvalidSpecError(f"need at least 2 folds, got {k}")
    if n < k:
        raise InvalidDataError(f"cannot split {n} samples into {k} folds")
    edges = np.linspace(0, n, k + 1).astype(int)
    return [(int(edges[i]), int(edges[i + 1])) for i in range(k)]


def kfold_cv(dataset, trainer, k: int = 5):
    """Blocked k-fold cross validation over a time-series dataset.

    For each fold the validation block is held out and the trainer is fit
    on the surrounding segments (each treated as an independent contiguous
    record). Fold quality is e_bar = sqrt(e_train^2 + e_val^2); the fold
    with minimal e_bar wins, ties resolved toward the lower index.

    Returns (best_model, CvReport).
    """
    n = len(dataset)
    folds = contiguous_folds(n, k)
    results = []
    models = []
    for i, (lo, hi) in enumerate(folds):
        segments = []
        if lo > 0:
            segments.append(dataset.slice(0, lo))
        if hi < n:
            segments.append(dataset.slice(hi, n))
        model = trainer.fit(segments, fold=i)
        yhat_tr, y_tr = _evaluate_segments(model, segments)
        e_train = rmse(yhat_tr, y_tr)
        yhat_v, y_v = model.evaluate(dataset.slice(lo, hi))
        e_val = rmse(yhat_v, y_v)
        results.append(FoldResult(index=i, e_train=e_train, e_val=e_val))
        models.append(model)
    e_bars = [f.e_bar for f in results]
    best = int(np.argmin(e_bars))  # argmin takes the first minimum, i.e. lowest index
    return models[best], CvReport(folds=results, best_index=best)


def _evaluate_segments(model, segments):
    parts = [model.evaluate(seg) for seg in segments]
    yhat = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    return yhat, y


def weight_contributions(w_out: np.ndarray, n_y: int, n_u: int) -> dict:
    """Normalized absolute weight shares for a trained fuzzy readout.

    ``w_out`` is the rule weight matrix (n_c x (1 + n_y + n_u)) with the
    bias first, then the angle taps, then the filtered-pressure taps. Each
    rule's weights are normalized to sum to one in absolute value and then
    grouped. Returns per-rule shares and their across-rule means.
    """
    W = np.atleast_2d(np.asarray(w_out, dtype=float))
    if W.shape[1] != 1 + n_y + n_u:
        raise DimensionError(f"w_out has {W.shape[1]} columns, expected {1 + n_y + n_u}")
    totals = np.sum(np.abs(W), axis=1)
    if np.any(totals == 0.0):
        raise DegenerateRangeError("cannot normalize an all-zero rule weight vector")
    norm = np.abs(W) / totals[:, None]
    bias = norm[:, 0]
    theta = np.sum(norm[:, 1:1 + n_y], axis=1)
    reservoir = np.sum(norm[:, 1 + n_y:], axis=1)
    return {
        "per_rule": norm,
        "bias_share": bias,
        "theta_share": theta,
        "reservoir_share": reservoir,
        "mean_bias_share": float(np.mean(bias)),
        "mean_theta_share": float(np.mean(theta)),
        "mean_reservoir_share": float(np.mean(reservoir)),
    }


@dataclass
class SweepCell:
    """One grid point of a hyperparameter sweep."""

    settings: dict
    status: str = "ok"
    e_train_mean: float = float("nan")
    e_train_sd: float = float("nan")
    e_val_mean: float = float("nan")
    e_val_sd: float = float("nan")
    e_test: float = float("nan")
    train_time_s: float = float("nan")
    test_time_s: float = float("nan")
    message: str = ""


@dataclass
class SweepResult:
    axis: str
    cells: list = field(default_factory=list)

    def _setting_keys(self):
        keys = []
        for c in self.cells:
            for k in c.settings:
                if k not in keys:
                    keys.append(k)
        return keys

    def to_csv(self, path, include_timings: bool = False) -> None:
        keys = self._setting_keys()
        cols = keys + ["status", "e_train_mean", "e_train_sd", "e_val_mean", "e_val_sd", "e_test"]
        if include_timings:
            cols += ["train_time_s", "test_time_s"]
        lines = [",".join(cols)]
        for c in self.cells:
            row = [format_float(c.settings.get(k)) if isinstance(c.settings.get(k), float)
                   else str(c.settings.get(k, "")) for k in keys]
            row += [c.status] + [format_float(v) for v in
                                 (c.e_train_mean, c.e_train_sd,
                                  c.e_val_mean, c.e_val_sd, c.e_test)]
            if include_timings:
                row += [format_float(c.train_time_s), format_float(c.test_time_s)]
            lines.append(",".join(row))
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {"axis": self.axis, "cells": []}
        for c in self.cells:
            d = {"settings": c.settings, "status": c.status, "message": c.message,
                 "e_train_mean": c.e_train_mean, "e_train_sd": c.e_train_sd,
                 "e_val_mean": c.e_val_mean, "e_val_sd": c.e_val_sd, "e_test": c.e_test}
            if include_timings:
                d["train_time_s"] = c.train_time_s
                d["test_time_s"] = c.test_time_s
            out["cells"].append(d)
        return out


def _sweep_grid(axis: str, values):
    if axis == "epsilon":
        vals = EPSILON_SWEEP if values is None else tuple(values)
        return [{"epsilon": float(v)} for v in vals]
    if axis == "clusters":
        vals = CLUSTER_SWEEP if values is None else tuple(values)
        return [{"model": m, "n_c": int(v)} for m in ("fprc", "fuzzy-linear") for v in vals]
    if axis == "taps":
        vals = TAP_SWEEP if values is None else tuple(values)
        return [{"n_u": int(u), "n_y": int(y)} for u in vals for y in vals]
    raise InvalidSpecError(f"unknown sweep axis {axis!r}, expected epsilon, clusters, or taps")


def run_sweep(axis: str, values, config, train_ds, test_ds, k: int = 5) -> SweepResult:
    """Train and evaluate across one hyperparameter axis.

    Cells are independent: a failing cell is recorded with its error
    message and the sweep continues.
    """
    from .fprc import FprcTrainer  # imported here to avoid a module cycle

    grid = _sweep_grid(axis, values)
    result = SweepResult(axis=axis)
    for settings in grid:
        cell = SweepCell(settings=dict(settings))
        params = config.model.fprc_params()
        kind = settings.get("model", "fprc")
        overrides = {k_: v for k_, v in settings.items() if k_ != "model"}
        try:
            params = params.replace(**overrides)
            trainer = FprcTrainer(params, seed=config.seed,
                                  reservoir_features=(kind == "fprc"))
            t0 = time.perf_counter()
            model, report = kfold_cv(train_ds, trainer, k=k)
            cell.train_time_s = time.perf_counter() - t0
            t0 = time.perf_counter()
            yhat, y = model.evaluate(test_ds)
            cell.test_time_s = time.perf_counter() - t0
            cell.e_test = rmse(yhat, y)
            cell.e_train_mean = report.e_train_mean
            cell.e_train_sd = report.e_train_sd
            cell.e_val_mean = report.e_val_mean
            cell.e_val_sd = report.e_val_sd
        except Exception as exc:  # noqa: BLE001 - cells must not kill the sweep
            cell.status = "failed"
            cell.message = f"{type(exc).__name__}: {exc}"
        result.cells.append(cell)
    return result


@dataclass
class BenchmarkResult:
    model_kind: str
    train_times_s: list
    test_times_s: list
    e_train: float
    e_test: float
    n_test_steps: int

    @property
    def train_time_mean(self) -> float:
        return float(np.mean(self.train_times_s))

    @property
    def train_time_sd(self) -> float:
        return float(np.std(self.train_times_s))

    @property
    def test_time_mean(self) -> float:
        return float(np.mean(self.test_times_s))

    @property
    def test_time_sd(self) -> float:
        return float(np.std(self.test_times_s))

    @property
    def per_step_us(self) -> float:
        return 1e6 * self.test_time_mean / self.n_test_steps

    def metrics_dict(self) -> dict:
        """Deterministic (seed-reproducible) part of the benchmark."""
        return {"model": self.model_kind, "e_train": self.e_train, "e_test": self.e_test,
                "n_test_steps": self.n_test_steps}

    def timing_dict(self) -> dict:
        """Wall-clock part: varies run to run by nature."""
        return {"model": self.model_kind,
                "train_time_mean_s": self.train_time_mean,
                "train_time_sd_s": self.train_time_sd,
                "test_time_mean_s": self.test_time_mean,
                "test_time_sd_s": self.test_time_sd,
                "per_step_us": self.per_step_us,
                "repetitions": len(self.test_times_s)}


def benchmark_execution(trainer, train_ds, test_ds, repetitions: int = 10,
                        refit_each_rep: bool = True) -> BenchmarkResult:
    """Time the training and test procedures of one model.

    Each repetition refits the readout on the full training record and
    replays the full test record, mirroring how execution cost scales with
    the two dataset lengths. RMSEs come from the final repetition.
    """
    if repetitions < 1:
        raise InvalidSpecError("repetitions must be >= 1")
    train_times, test_times = [], []
    model = None
    e_train = float("nan")
    for rep in range(repetitions):
        if model is None or refit_each_rep:
            t0 = time.perf_counter()
            model = trainer.fit([train_ds], fold=0)
            train_times.append(time.perf_counter() - t0)
            yhat_tr, y_tr = model.evaluate(train_ds)
            e_train = rmse(yhat_tr, y_tr)
        t0 = time.perf_counter()
        yhat, y = model.evaluate(test_ds)
        test_times.append(time.perf_counter() - t0)
    e_test = rmse(yhat, y)
    return BenchmarkResult(model_kind=trainer.kind, train_times_s=train_times,
                           test_times_s=test_times, e_train=e_train, e_test=e_test,
                           n_test_steps=len(test_ds))
