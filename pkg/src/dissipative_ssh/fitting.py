"""Finite-size scaling of the Liouvillian gap."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import OpenChainModel
from .thirdq import liouvillian_gap, rapidity_spectrum

GAP_FLOOR = 1e-12


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ScalingSeries:
    sizes: np.ndarray
    gaps: np.ndarray
    excluded: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def points(self) -> list[tuple[int, float]]:
        return [(int(n), float(g)) for n, g in zip(self.sizes, self.gaps)]

    def __len__(self):
        return self.sizes.size


def _resolved_gap(model: OpenChainModel, floor: float) -> float:
    """Gap, or 0 when the slowest rate sits below ``floor`` (relative).

    ``liouvillian_gap`` skips unresolvable rates and returns the next one;
    for a scan that would splice a different mode into the series.
    """
    spec = rapidity_spectrum(model, classify=False)
    im = spec.distinct.imag
    scale = np.abs(im).max()
    if scale == 0 or im.min() <= floor * scale:
        return 0.0
    return liouvillian_gap(spec, floor)


def gap_scan(model_template: OpenChainModel, n_list, floor: float = GAP_FLOOR, threads: int = 1) -> ScalingSeries:
    """Gap for each N. Sizes whose slowest decay rate is at or below
    ``floor`` (relative to the largest) are excluded and listed."""
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list:
        raise ValueError("N list is empty")

    def one(n):
        return _resolved_gap(model_template.with_cells(n), floor)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            gaps = list(pool.map(one, n_list))
    else:
        gaps = [one(n) for n in n_list]
    keep = [(n, g) for n, g in zip(n_list, gaps) if g > 0]
    excluded = tuple(n for n, g in zip(n_list, gaps) if g <= 0)
    sizes = np.array([n for n, _ in keep], dtype=int)
    vals = np.array([g for _, g in keep], dtype=float)
    return ScalingSeries(sizes, vals, excluded, {"model": model_template.as_dict(), "floor": floor})


@dataclass(frozen=True)
class ScalingFit:
    """gap = prefactor * exp(-rate * N) or prefactor * N**(-rate)."""

    form: str
    prefactor: float
    rate: float
    r_squared: float
    residuals: np.ndarray

    def predict(self, sizes) -> np.ndarray:
        sizes = np.asarray(sizes, dtype=float)
        if self.form == "exponential":
            return self.prefactor * np.exp(-self.rate * sizes)
        return self.prefactor * sizes ** (-self.rate)


def _loglinear(x, y, form) -> ScalingFit:
    if x.size < 3:
        raise FitError(f"{form} fit needs at least 3 points, got {x.size}")
    ly = np.log(y)
    design = np.column_stack([np.ones_like(x), x])
    (intercept, slope), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    if ss_tot == 0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return ScalingFit(form, float(np.exp(intercept)), float(-slope), r2, resid)


def fit_exponential(series: ScalingSeries) -> ScalingFit:
    return _loglinear(series.sizes.astype(float), series.gaps, "exponential")


def fit_powerlaw(series: ScalingSeries) -> ScalingFit:
    return _loglinear(np.log(series.sizes.astype(float)), series.gaps, "powerlaw")


@dataclass(frozen=True)
class ModelSelection:
    best: str
    exponential: ScalingFit
    powerlaw: ScalingFit
    degenerate: bool


def model_select(series: ScalingSeries, tie_tol: float = 1e-12) -> ModelSelection:
    if len(series) < 4:
        raise FitError(f"model selection needs at least 4 points, got {len(series)}")
    exp_fit = fit_exponential(series)
    pow_fit = fit_powerlaw(series)
    tie = abs(exp_fit.r_squared - pow_fit.r_squared) <= tie_tol
    best = "exponential" if exp_fit.r_squared >= pow_fit.r_squared else "powerlaw"
    return ModelSelection(best, exp_fit, pow_fit, tie)


def synthetic_series(fit: ScalingFit, sizes) -> ScalingSeries:
    sizes = np.asarray(sizes, dtype=int)
    return ScalingSeries(sizes, fit.predict(sizes))
