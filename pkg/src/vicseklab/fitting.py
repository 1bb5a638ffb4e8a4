"""Least-squares slope estimation for power-law and decay regressions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, WindowError

#: Minimum sample count for any regression.
MIN_SAMPLES = 8


@dataclass
class ExponentFit:
    """Slope/intercept/r^2 of a straight-line fit with its validity window."""

    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r_squared,
            "window": [self.window[0], self.window[1]],
            "sample_count": self.sample_count,
        }


def fit_line(x: np.ndarray, y: np.ndarray, window: tuple[float, float] | None = None,
             min_samples: int = MIN_SAMPLES) -> ExponentFit:
    """Ordinary least squares y = slope * x + intercept with r^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if x.size < min_samples:
        raise InsufficientSamplesError(f"{x.size} samples < required {min_samples}")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    if window is None:
        window = (float(np.min(x)), float(np.max(x)))
    return ExponentFit(float(slope), float(intercept), r2, window, int(x.size))


def fit_loglog(x: np.ndarray, y: np.ndarray,
               min_samples: int = MIN_SAMPLES) -> ExponentFit:
    """Power-law fit: slope of log y against log x; window in x units."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = (x > 0) & (y > 0)
    if np.count_nonzero(keep) < min_samples:
        raise InsufficientSamplesError(
            f"only {np.count_nonzero(keep)} positive samples, need {min_samples}")
    fit = fit_line(np.log(x[keep]), np.log(y[keep]), min_samples=min_samples)
    return ExponentFit(fit.slope, fit.intercept, fit.r_squared,
                       (float(np.min(x[keep])), float(np.max(x[keep]))),
                       fit.sample_count)


def decay_rate(t: np.ndarray, y: np.ndarray, min_samples: int = MIN_SAMPLES) -> ExponentFit:
    """Exponential decay fit: slope of log y against t (rate = -slope)."""
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = y > 0
    if np.count_nonzero(keep) < min_samples:
        raise InsufficientSamplesError(
            f"only {np.count_nonzero(keep)} positive samples, need {min_samples}")
    fit = fit_line(t[keep], np.log(y[keep]), min_samples=min_samples)
    return ExponentFit(fit.slope, fit.intercept, fit.r_squared,
                       (float(np.min(t[keep])), float(np.max(t[keep]))),
                       fit.sample_count)


def make_t_grid(lo: float, hi: float, count: int, spacing: str = "log") -> np.ndarray:
    if not (lo > 0 and hi > lo):
        raise ValueError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    if spacing == "log":
        return np.geomspace(lo, hi, count)
    if spacing == "linear":
        return np.linspace(lo, hi, count)
    raise ValueError(f"unknown spacing {spacing!r}")


def clip_to_window(t_grid: np.ndarray, window: tuple[float, float],
                   min_samples: int = MIN_SAMPLES) -> np.ndarray:
    """Restrict a grid to the validity window; error if too little remains."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    kept = t_grid[(t_grid >= window[0]) & (t_grid <= window[1])]
    if kept.size < min_samples:
        raise WindowError(
            f"{kept.size} of {t_grid.size} grid points inside the validity window "
            f"[{window[0]:.3e}, {window[1]:.3e}]; need {min_samples}")
    return kept


def stability_ratio(values: np.ndarray) -> float:
    """max/min over positive entries; the 'bounded within one order' statistic."""
    values = np.asarray(values, dtype=np.float64)
    values = values[values > 0]
    if values.size == 0:
        return np.inf
    return float(np.max(values) / np.min(values))
