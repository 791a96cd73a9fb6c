"""Rank correlation and performance aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as sps

from .core import UsageError

ALPHA = 0.05
RHO_BINS = (0.25, 0.5, 0.75)


class UndefinedCorrelation(ValueError):
    """Raised when one of the inputs has no rank variance."""


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    n: int
    p: float
    significant: bool

    @property
    def defined(self) -> bool:
        return not math.isnan(self.rho)


UNDEFINED = CorrelationResult(float("nan"), 0, float("nan"), False)


def _check_pair(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise UsageError("x and y must be equal-length 1-D sequences")
    if len(x) < 3:
        raise UsageError("need at least 3 paired values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise UsageError("values must be finite")
    return x, y


def rank_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average ranks (ties share their mean rank)."""
    x, y = _check_pair(x, y)
    rx = sps.rankdata(x)
    ry = sps.rankdata(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    den = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if den == 0:
        raise UndefinedCorrelation("constant input has no rank variance")
    rho = float(dx @ dy) / den
    return max(-1.0, min(1.0, rho))


def t_pvalue(rho: float, n: int) -> float:
    """Two-tailed p from t = rho*sqrt((n-2)/(1-rho^2)) with n-2 dof."""
    if n < 3:
        raise UsageError("need n >= 3")
    if abs(rho) >= 1.0:
        return 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return float(2.0 * sps.t.sf(abs(t), n - 2))


def spearman(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    rho = rank_rho(x, y)
    n = len(x)
    p = t_pvalue(rho, n)
    return CorrelationResult(rho, n, p, p <= ALPHA)


def exact_p(x: Sequence[float], y: Sequence[float], max_n: int = 10) -> float:
    """Two-sided permutation p-value over all orderings of ``y`` (small n only)."""
    import itertools

    x, y = _check_pair(x, y)
    if len(x) > max_n:
        raise UsageError(f"exact permutation test limited to n <= {max_n}")
    rho = abs(rank_rho(x, y))
    hits = total = 0
    for perm in itertools.permutations(y.tolist()):
        total += 1
        try:
            r = abs(rank_rho(x, perm))
        except UndefinedCorrelation:
            continue
        if r >= rho - 1e-12:
            hits += 1
    return hits / total


@dataclass(frozen=True)
class PerformanceAggregate:
    mean: float
    median: float
    solve_rate: float
    solved: int
    attempted: int
    build_seconds: float | None = None


def aggregate(suboptimalities: Sequence[float], attempted: int | None = None,
              build_seconds: float | None = None) -> PerformanceAggregate:
    """Mean and median over solved runs; ``attempted`` defaults to the solved count.

    NaN entries stand for unsolved runs and count only against the solve rate.
    """
    vals = np.asarray(suboptimalities, dtype=float)
    solved = vals[~np.isnan(vals)]
    total = len(vals) if attempted is None else attempted
    if total < 1 or len(vals) == 0:
        raise UsageError("nothing to aggregate")
    if len(solved) > total:
        raise UsageError("more solved runs than attempts")
    if len(solved) == 0:
        return PerformanceAggregate(float("nan"), float("nan"), 0.0, 0, total, build_seconds)
    # np.median averages the two middle values for even lengths
    return PerformanceAggregate(float(solved.mean()), float(np.median(solved)),
                                len(solved) / total, len(solved), total, build_seconds)


def correlation_table(columns: Mapping[str, Sequence[float]],
                      pairs: Sequence[tuple[str, str]] | None = None
                      ) -> dict[tuple[str, str], CorrelationResult]:
    """Spearman for each requested (axis1, axis2) pair; all ordered pairs by default.

    Undefined correlations (constant column, too few rows) become ``UNDEFINED``.
    Rows with a NaN in either column are dropped pairwise.
    """
    names = list(columns)
    if pairs is None:
        pairs = [(a, b) for a in names for b in names]
    out: dict[tuple[str, str], CorrelationResult] = {}
    for a, b in pairs:
        x = np.asarray(columns[a], dtype=float)
        y = np.asarray(columns[b], dtype=float)
        ok = ~(np.isnan(x) | np.isnan(y))
        try:
            out[(a, b)] = spearman(x[ok], y[ok])
        except (UndefinedCorrelation, UsageError):
            out[(a, b)] = UNDEFINED
    return out


def rho_bin(rho: float) -> int:
    """0..3 for |rho| in [0,.25), [.25,.5), [.5,.75), [.75,1]; -1 if undefined."""
    if math.isnan(rho):
        return -1
    a = abs(rho)
    return sum(a >= t for t in RHO_BINS)


def format_table(table: Mapping[tuple[str, str], CorrelationResult], rows: Sequence[str],
                 cols: Sequence[str]) -> str:
    """Fixed-width text table; ``*`` marks p > 0.05 and [k] the |rho| bin."""
    width = max([len(c) for c in cols] + [12])
    lead = max([len(r) for r in rows] + [4])
    lines = [" " * lead + " " + " ".join(c.rjust(width) for c in cols)]
    for r in rows:
        cells = []
        for c in cols:
            res = table.get((r, c))
            if res is None or not res.defined:
                cells.append("undef".rjust(width))
                continue
            mark = "" if res.significant else "*"
            cells.append(f"{res.rho:+.3f}{mark}[{rho_bin(res.rho)}]".rjust(width))
        lines.append(r.ljust(lead) + " " + " ".join(cells))
    return "\n".join(lines)
