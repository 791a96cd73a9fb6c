"""Performance predictors: equal-frequency bins, ZeroR, least squares, k-fold CV."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import UsageError

MODELS = ("zero_r", "ols")


class DegenerateBins(ValueError):
    pass


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    features: list[str]
    ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.ndim != 1 or len(self.X) != len(self.y):
            raise UsageError("X must be n x p and y length n")
        if self.X.shape[1] != len(self.features):
            raise UsageError("feature names do not match X columns")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise UsageError("dataset has missing or non-finite values")

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, idx: np.ndarray) -> "Dataset":
        ids = [self.ids[i] for i in idx] if self.ids else []
        return Dataset(self.X[idx], self.y[idx], list(self.features), ids)


@dataclass(frozen=True)
class BinScheme:
    """Cut points; bin i holds values v with cuts[i-1] <= v < cuts[i]."""
    cuts: tuple[float, ...]
    requested: int

    @property
    def k(self) -> int:
        return len(self.cuts) + 1

    def assign(self, values) -> np.ndarray:
        return np.searchsorted(np.asarray(self.cuts), np.asarray(values, dtype=float), side="right")


def equal_freq_bins(values: Sequence[float], k: int = 10) -> BinScheme:
    """Cut sorted training values at the order statistics j*n/k.

    A cut that falls inside a run of equal values moves to the nearest
    boundary between distinct values (the lower one on a tie); cuts that
    coincide merge, so ``k`` of the result may be smaller than requested.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    if k < 1:
        raise UsageError("k must be >= 1")
    if n < k:
        raise UsageError(f"need at least k={k} values, got {n}")
    if len(np.unique(v)) < k:
        raise DegenerateBins(f"only {len(np.unique(v))} distinct values for {k} bins")
    # positions i where v[i-1] < v[i]: a cut there separates distinct values
    breaks = np.flatnonzero(v[1:] > v[:-1]) + 1
    chosen: list[int] = []
    for j in range(1, k):
        pos = (j * n) // k
        i = int(np.searchsorted(breaks, pos))
        cands = [breaks[c] for c in (i - 1, i) if 0 <= c < len(breaks)]
        best = min(cands, key=lambda b: (abs(b - pos), b))
        if not chosen or best > chosen[-1]:
            chosen.append(int(best))
    cuts = []
    for p in chosen:
        lo, hi = float(v[p - 1]), float(v[p])
        mid = lo + (hi - lo) / 2
        # no representable midpoint between adjacent floats: cut at the upper one
        cuts.append(mid if lo < mid else hi)
    return BinScheme(tuple(cuts), k)


@dataclass
class ZeroR:
    mean: float
    first_bin: int = 0

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.full(len(X), self.mean)

    def classify(self, X: np.ndarray, bins: BinScheme) -> np.ndarray:
        return np.full(len(X), self.first_bin, dtype=np.int64)


def zero_r(train: Dataset) -> ZeroR:
    return ZeroR(float(train.y.mean()))


@dataclass
class OlsModel:
    intercept: float
    coef: np.ndarray
    features: list[str]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept

    def classify(self, X: np.ndarray, bins: BinScheme) -> np.ndarray:
        return bins.assign(self.predict(X))

    def dump(self) -> str:
        lines = [f"intercept\t{self.intercept!r}"]
        lines += [f"{f}\t{c!r}" for f, c in zip(self.features, self.coef)]
        return "\n".join(lines) + "\n"


def ols_regression(train: Dataset) -> OlsModel:
    """Least squares with intercept; rank-deficient designs get the minimum-norm fit."""
    A = np.column_stack([np.ones(len(train)), train.X])
    beta, *_ = np.linalg.lstsq(A, train.y, rcond=None)
    return OlsModel(float(beta[0]), beta[1:], list(train.features))


def fit(kind: str, train: Dataset):
    if kind == "zero_r":
        return zero_r(train)
    if kind == "ols":
        return ols_regression(train)
    raise UsageError(f"unknown model {kind!r}; choose from {MODELS}")


@dataclass
class FoldResult:
    index: int
    n_test: int
    correct: int
    sse: float
    sse_zero_r: float
    effective_k: int


@dataclass
class EvalReport:
    model: str
    n: int
    accuracy: float
    rmse: float
    rrse: float
    folds: list[FoldResult]

    def rows(self) -> list[dict]:
        out = []
        for f in self.folds:
            out.append({"model": self.model, "fold": f.index, "n_test": f.n_test,
                        "accuracy": 100.0 * f.correct / f.n_test,
                        "rmse": math.sqrt(f.sse / f.n_test), "effective_k": f.effective_k})
        return out


def fold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    if folds < 2:
        raise UsageError("need at least 2 folds")
    if folds > n:
        raise UsageError(f"{folds} folds for only {n} rows")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def cross_validate(ds: Dataset, model: str = "ols", folds: int = 10, seed: int = 0,
                   k: int = 10) -> EvalReport:
    """Seeded k-fold CV reporting bin accuracy, RMSE and RRSE against ZeroR.

    Bins are refit on each training fold; the classifier regresses then bins
    its prediction.  RRSE pools squared errors over all folds.
    """
    if model not in MODELS:
        raise UsageError(f"unknown model {model!r}; choose from {MODELS}")
    parts = fold_indices(len(ds), folds, seed)
    results = []
    for i, test in enumerate(parts):
        train = np.concatenate([p for j, p in enumerate(parts) if j != i])
        tr, te = ds.subset(train), ds.subset(test)
        bins = equal_freq_bins(tr.y, k)
        m = fit(model, tr)
        base = zero_r(tr)
        pred = m.predict(te.X)
        labels = bins.assign(te.y)
        correct = int(np.sum(m.classify(te.X, bins) == labels))
        sse = float(np.sum((pred - te.y) ** 2))
        sse0 = float(np.sum((base.predict(te.X) - te.y) ** 2))
        results.append(FoldResult(i, len(test), correct, sse, sse0, bins.k))
    n = len(ds)
    sse = sum(f.sse for f in results)
    sse0 = sum(f.sse_zero_r for f in results)
    if model == "zero_r":
        rrse = 100.0
    elif sse0 > 0:
        rrse = 100.0 * math.sqrt(sse) / math.sqrt(sse0)
    else:
        rrse = 0.0 if sse == 0 else float("inf")
    acc = 100.0 * sum(f.correct for f in results) / n
    return EvalReport(model, n, acc, math.sqrt(sse / n), rrse, results)


DB_SIZES = (500, 1000, 2500, 5000, 10000, 20000)


def db_size_dataset(measures: np.ndarray, suboptimality: np.ndarray, sizes: np.ndarray,
                    features: Sequence[str], ids: Sequence[str] = ()) -> Dataset:
    """Rows of (measures + achieved mean suboptimality) -> database size."""
    X = np.column_stack([np.asarray(measures, dtype=float), np.asarray(suboptimality, dtype=float)])
    return Dataset(X, np.asarray(sizes, dtype=float), [*features, "mean_suboptimality"], list(ids))


def predict_db_size(ds: Dataset, folds: int = 10, seed: int = 0
                    ) -> tuple[OlsModel, dict[str, EvalReport]]:
    """Inverted predictor: desired suboptimality in, database size out.

    Classes are the distinct sizes present, binned by equal frequency.
    """
    k = len(np.unique(ds.y))
    reports = {m: cross_validate(ds, m, folds, seed, k) for m in MODELS}
    return ols_regression(ds), reports
