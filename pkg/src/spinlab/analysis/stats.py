"""Estimators used on simulation output."""

from __future__ import annotations

import csv
from collections import Counter
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from ..errors import DegenerateInput


def hitting_time(times: Sequence[float], values: Sequence, predicate: Callable) -> float | None:
    """First time at which ``predicate(value)`` holds, or None."""
    prev = -np.inf
    for t, x in zip(times, values):
        if t < prev:
            raise ValueError("trace is not time-sorted")
        prev = t
        if predicate(x):
            return float(t)
    return None


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    residual: float  # largest absolute deviation from the fitted line


def fit_log_slope(ns: Sequence[float], times: Sequence[float]) -> SlopeFit:
    """Least squares of times against ln n."""
    ns = np.asarray(ns, dtype=float)
    times = np.asarray(times, dtype=float)
    if ns.size < 3 or ns.size != times.size:
        raise DegenerateInput("need at least three (n, time) points")
    if np.any(np.diff(ns) <= 0):
        raise DegenerateInput("sizes must be strictly increasing")
    x = np.log(ns)
    slope, intercept = np.polyfit(x, times, 1)
    resid = float(np.max(np.abs(times - (slope * x + intercept))))
    return SlopeFit(float(slope), float(intercept), resid)


def histogram(values: Iterable[int]) -> list[tuple[int, int, float]]:
    counts = Counter(int(v) for v in values)
    total = sum(counts.values())
    return [(k, c, c / total) for k, c in sorted(counts.items())]


def write_histogram_csv(path, values: Iterable[int]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("k", "count", "freq"))
        w.writerows(histogram(values))


def quantiles(values: Sequence[float], qs=(0.1, 0.5, 0.9)) -> dict[str, float]:
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return {f"q{int(q * 100)}": float("nan") for q in qs}
    return {f"q{int(q * 100)}": float(np.quantile(arr, q)) for q in qs}


def censored_median(values: Sequence[float | None], cap: float) -> float:
    """Median with missing values (events not seen before ``cap``) counted as ``cap``.

    Conservative: if more than half are censored the result is ``cap``.
    """
    arr = np.asarray([cap if v is None else v for v in values], dtype=float)
    if arr.size == 0:
        raise DegenerateInput("no values")
    return float(np.median(arr))
