"""Growth-curve models, fitting, phase labels, and bi-phase detection.

Two sigmoid families describe community growth, written here as the closed
forms that solve their rate equations:

    gompertz:  y(t) = y_star * exp(-shape * exp(-alpha * t))
               dy/dt = alpha * y * (ln(y_star) - ln(y))
    logistic:  y(t) = y_star / (1 + shape * exp(-alpha * y_star * t))
               dy/dt = alpha * y * (y_star - y)

with shape = ln(y_star/y0) (gompertz) or (y_star - y0)/y0 (logistic), both
anchored at t = 0.  Fitting minimizes the sum of squared residuals with a
damped Gauss-Newton (Levenberg-Marquardt) iteration over log-parameters,
which keeps all three parameters positive.  Neither family can represent a
declining tail, so when a decline is detected the series is truncated at its
global maximum before fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import GrowthFitError
from .series import MonthKey


class GrowthModel(Enum):
    GOMPERTZ = "gompertz"
    LOGISTIC = "logistic"


class PhaseLabel(Enum):
    LAG = "Lag"
    EXPONENTIAL = "Exponential"
    STATIONARY = "Stationary"
    DECLINE = "Decline"


@dataclass(frozen=True)
class GrowthParams:
    model: GrowthModel
    y_star: float
    alpha: float
    shape: float

    def __post_init__(self):
        if not (self.y_star > 0 and self.alpha > 0 and self.shape > 0):
            raise GrowthFitError(
                f"growth parameters must be positive, got "
                f"y_star={self.y_star}, alpha={self.alpha}, shape={self.shape}"
            )

    @property
    def y0(self) -> float:
        if self.model is GrowthModel.GOMPERTZ:
            return self.y_star * math.exp(-self.shape)
        return self.y_star / (1.0 + self.shape)


def model_value(t, params: GrowthParams):
    """Evaluate the closed form at time t (months since the anchor).

    Accepts scalars or arrays; strictly increasing in t and bounded above by
    y_star for all finite t.
    """
    tv = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        if params.model is GrowthModel.GOMPERTZ:
            out = params.y_star * np.exp(-params.shape * np.exp(-params.alpha * tv))
        else:
            out = params.y_star / (1.0 + params.shape * np.exp(-params.alpha * params.y_star * tv))
    return float(out) if tv.ndim == 0 else out


def ode_rhs(y, params: GrowthParams):
    """The growth rate dy/dt each family postulates at population y."""
    yv = np.asarray(y, dtype=float)
    if params.model is GrowthModel.GOMPERTZ:
        out = params.alpha * yv * (math.log(params.y_star) - np.log(yv))
    else:
        out = params.alpha * yv * (params.y_star - yv)
    return float(out) if yv.ndim == 0 else out


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 200
    tolerance: float = 1e-9  # relative SSE improvement
    damping_init: float = 1e-3
    damping_factor: float = 10.0
    max_log_step: float = 1.0  # per-iteration cap on |d ln(param)|
    # Deterministic extra starts: the warm-start rate scaled by each factor.
    rate_start_factors: tuple[float, ...] = (1.0, 0.3, 3.0, 10.0, 30.0)
    low_confidence_peak: float = 15.0


@dataclass(frozen=True)
class PhaseConfig:
    lag_fraction: float = 0.1
    stationary_fraction: float = 0.9
    decline_drop_fraction: float = 0.05
    decline_window: int = 6


@dataclass(frozen=True)
class GrowthFit:
    params: GrowthParams
    sse: float
    r_squared: float
    iterations: int
    converged: bool
    t_offset: MonthKey | None = None
    truncated_at: int | None = None
    notes: tuple[str, ...] = ()
    sse_trace: tuple[float, ...] = ()  # accepted-step SSEs, non-increasing

    def to_dict(self) -> dict:
        return {
            "model": self.params.model.value,
            "y_star": self.params.y_star,
            "alpha": self.params.alpha,
            "shape": self.params.shape,
            "sse": self.sse,
            "r_squared": self.r_squared,
            "iterations": self.iterations,
            "converged": self.converged,
            "t_offset": None if self.t_offset is None else str(self.t_offset),
            "truncated_at": self.truncated_at,
            "notes": list(self.notes),
        }


def _model_values(t: np.ndarray, model: GrowthModel, theta: np.ndarray) -> np.ndarray:
    y_star, alpha, shape = np.exp(theta)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        if model is GrowthModel.GOMPERTZ:
            return y_star * np.exp(-shape * np.exp(-alpha * t))
        return y_star / (1.0 + shape * np.exp(-alpha * y_star * t))


def _jacobian(t: np.ndarray, model: GrowthModel, theta: np.ndarray) -> np.ndarray:
    """d y / d ln(param), columns ordered (y_star, alpha, shape)."""
    y_star, alpha, shape = np.exp(theta)
    if model is GrowthModel.GOMPERTZ:
        decay = np.exp(-alpha * t)
        y = y_star * np.exp(-shape * decay)
        return np.column_stack((y, y * alpha * shape * t * decay, -y * shape * decay))
    decay = np.exp(-alpha * y_star * t)
    denom = 1.0 + shape * decay
    d_raw_y_star = 1.0 / denom + y_star * alpha * t * shape * decay / denom**2
    d_raw_alpha = y_star**2 * t * shape * decay / denom**2
    d_raw_shape = -y_star * decay / denom**2
    return np.column_stack((y_star * d_raw_y_star, alpha * d_raw_alpha, shape * d_raw_shape))


def _warm_start(t: np.ndarray, values: np.ndarray, model: GrowthModel) -> tuple[float, float, float]:
    """Deterministic initialization.

    y_star = 1.1 * max, y0 = first positive value, and the rate comes from
    the OLS slope of log(y) over the first half of the rise (the points up to
    halfway between y0 and the maximum, in value).
    """
    y_max = float(np.max(values))
    y_star = 1.1 * y_max
    positive = np.flatnonzero(values > 0)
    y0 = float(values[positive[0]])
    half_value = y0 + 0.5 * (y_max - y0)
    rise = positive[values[positive] <= half_value]
    if len(rise) < 2:
        rise = positive[: max(2, len(positive) // 2)]
    if len(rise) >= 2 and np.ptp(t[rise]) > 0:
        log_slope = float(np.polyfit(t[rise], np.log(values[rise]), 1)[0])
    else:
        log_slope = 0.0
    log_slope = max(log_slope, 1e-4)
    if model is GrowthModel.GOMPERTZ:
        shape = max(math.log(y_star / y0), 1e-6)
        return y_star, max(log_slope / shape, 1e-8), shape
    shape = max((y_star - y0) / y0, 1e-6)
    return y_star, max(log_slope / y_star, 1e-12), shape


def _lm_minimize(
    t: np.ndarray,
    values: np.ndarray,
    model: GrowthModel,
    start: tuple[float, float, float],
    options: FitOptions,
) -> tuple[np.ndarray, float, int, bool, list[float]]:
    theta = np.log(np.asarray(start, dtype=float))
    damping = options.damping_init
    residuals = values - _model_values(t, model, theta)
    sse = float(residuals @ residuals)
    trace = [sse]
    converged = False
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        jac = _jacobian(t, model, theta)
        gradient = jac.T @ residuals
        hessian = jac.T @ jac
        accepted = False
        for _ in range(60):
            lhs = hessian + damping * np.diag(np.maximum(np.diag(hessian), 1e-12))
            try:
                step = np.linalg.solve(lhs, gradient)
            except np.linalg.LinAlgError:
                damping *= options.damping_factor
                continue
            largest = float(np.max(np.abs(step)))
            if largest > options.max_log_step:
                step *= options.max_log_step / largest
            candidate = theta + step
            cand_residuals = values - _model_values(t, model, candidate)
            cand_sse = float(cand_residuals @ cand_residuals)
            if math.isfinite(cand_sse) and cand_sse < sse:
                improvement = (sse - cand_sse) / sse if sse > 0 else 0.0
                theta, residuals, sse = candidate, cand_residuals, cand_sse
                trace.append(sse)
                damping = max(damping / options.damping_factor, 1e-15)
                accepted = True
                if improvement < options.tolerance:
                    converged = True
                break
            damping *= options.damping_factor
        if not accepted:
            # No damping level yields a decrease: at a (local) minimum.
            converged = True
            break
        if converged:
            break
    return theta, sse, iterations, converged, trace


def _trailing_decline(values: np.ndarray, config: PhaseConfig) -> bool:
    window = config.decline_window
    if len(values) < window:
        return False
    tail = values[-window:]
    tt = np.arange(window, dtype=float)
    slope = float(np.polyfit(tt, tail, 1)[0])
    return slope * window < -config.decline_drop_fraction * float(np.max(values))


MIN_FIT_POINTS = 8


def fit_growth(
    values: Sequence[float],
    model: GrowthModel,
    t_offset: MonthKey | None = None,
    options: FitOptions = FitOptions(),
    phase_config: PhaseConfig = PhaseConfig(),
    truncate_on_decline: bool = True,
) -> GrowthFit:
    """Least-squares fit of one growth model to a smoothed monthly sequence.

    Time is the point index, anchored at t = 0 (= ``t_offset`` when given).
    Needs at least 8 points and one positive value.  A detected decline
    truncates the series at its global maximum before fitting, since the
    models cannot represent decline.  Non-convergence is not an error: the
    best parameters so far are returned with converged=False.
    """
    data = np.asarray(values, dtype=float)
    if data.ndim != 1 or len(data) < MIN_FIT_POINTS:
        raise GrowthFitError(f"need at least {MIN_FIT_POINTS} points, got {len(data)}")
    if np.any(data < 0):
        raise GrowthFitError("series values must be nonnegative")
    if not np.any(data > 0):
        raise GrowthFitError("all-zero series cannot be fit")

    notes: list[str] = []
    truncated_at = None
    fit_data = data
    if truncate_on_decline and _trailing_decline(data, phase_config):
        peak = int(np.argmax(data))
        if peak + 1 >= MIN_FIT_POINTS:
            truncated_at = peak
            fit_data = data[: peak + 1]
            notes.append(f"decline detected; fit truncated at peak month index {peak}")
        else:
            notes.append("decline detected; truncation skipped (peak too early)")
    if float(np.max(data)) < options.low_confidence_peak:
        notes.append(
            f"low confidence: series peak below {options.low_confidence_peak:g} active contributors"
        )

    t = np.arange(len(fit_data), dtype=float)
    sst = float(np.sum((fit_data - fit_data.mean()) ** 2))

    if np.ptp(fit_data) == 0:
        # Flat positive series: the level is known but no rate is recoverable.
        level = float(fit_data[0])
        params = GrowthParams(model=model, y_star=level, alpha=1e-6, shape=1e-9)
        residuals = fit_data - model_value(t, params)
        sse = float(residuals @ residuals)
        notes.append("rate unidentifiable: constant series")
        return GrowthFit(
            params=params,
            sse=sse,
            r_squared=0.0,
            iterations=0,
            converged=False,
            t_offset=t_offset,
            truncated_at=truncated_at,
            notes=tuple(notes),
            sse_trace=(sse,),
        )

    base = _warm_start(t, fit_data, model)
    best = None
    for factor in options.rate_start_factors:
        start = (base[0], base[1] * factor, base[2])
        result = _lm_minimize(t, fit_data, model, start, options)
        if best is None or result[1] < best[1]:
            best = result
    theta, sse, iterations, converged, trace = best
    y_star, alpha, shape = np.exp(theta)
    params = GrowthParams(model=model, y_star=float(y_star), alpha=float(alpha), shape=float(shape))
    r_squared = 0.0 if sst == 0 else max(0.0, min(1.0, 1.0 - sse / sst))
    if not converged:
        notes.append("did not converge within iteration limit; best parameters so far")
    return GrowthFit(
        params=params,
        sse=sse,
        r_squared=r_squared,
        iterations=iterations,
        converged=converged,
        t_offset=t_offset,
        truncated_at=truncated_at,
        notes=tuple(notes),
        sse_trace=tuple(trace),
    )


def classify_phase(
    values: Sequence[float],
    fit: GrowthFit,
    config: PhaseConfig = PhaseConfig(),
) -> PhaseLabel:
    """Assign exactly one growth phase to a (series, fit) pair.

    Decline: the trailing OLS slope loses more than decline_drop_fraction of
    the series maximum over the decline window.  Otherwise the last smoothed
    value is compared against the fitted ceiling: stationary above 90% of
    y_star, lag below 10%, exponential in between.
    """
    data = np.asarray(values, dtype=float)
    if len(data) < config.decline_window:
        raise GrowthFitError(
            f"classification unavailable: need at least {config.decline_window} months"
        )
    if _trailing_decline(data, config):
        return PhaseLabel.DECLINE
    last = float(data[-1])
    if last >= config.stationary_fraction * fit.params.y_star:
        return PhaseLabel.STATIONARY
    if last <= config.lag_fraction * fit.params.y_star:
        return PhaseLabel.LAG
    return PhaseLabel.EXPONENTIAL


@dataclass(frozen=True)
class BiPhaseFit:
    breakpoint_index: int
    breakpoint: MonthKey | None
    first: GrowthFit
    second: GrowthFit
    combined_sse: float
    preferred: bool

    def to_dict(self) -> dict:
        return {
            "breakpoint_index": self.breakpoint_index,
            "breakpoint": None if self.breakpoint is None else str(self.breakpoint),
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "combined_sse": self.combined_sse,
            "preferred": self.preferred,
        }


MIN_SEGMENT_MONTHS = 12


def _bic(sse: float, n: int, n_params: int, sse_floor: float) -> float:
    # The floor keeps noiseless comparisons from resolving on numerical dust:
    # any SSE below ~1e-9 of the data's energy counts as "exact", so model
    # preference then falls to the parameter-count penalty alone.
    return n * math.log(max(sse, sse_floor) / n) + n_params * math.log(n)


def detect_biphase(
    values: Sequence[float],
    model: GrowthModel,
    t_offset: MonthKey | None = None,
    min_segment: int = MIN_SEGMENT_MONTHS,
    options: FitOptions = FitOptions(),
) -> BiPhaseFit | None:
    """Search for two successive growth episodes.

    Every interior breakpoint leaving at least ``min_segment`` months per
    side is tried; each segment is fit independently and the split with the
    lowest combined SSE wins.  ``preferred`` is True when the two-segment
    BIC (7 effective parameters) beats the single-fit BIC (3).  Returns None
    when the series is too short.
    """
    if min_segment < MIN_FIT_POINTS:
        raise GrowthFitError(f"min_segment must be at least {MIN_FIT_POINTS}")
    data = np.asarray(values, dtype=float)
    n = len(data)
    if n < 2 * min_segment:
        return None

    best = None
    for breakpoint_index in range(min_segment, n - min_segment + 1):
        try:
            first = fit_growth(
                data[:breakpoint_index], model, t_offset=t_offset,
                options=options, truncate_on_decline=False,
            )
            second = fit_growth(
                data[breakpoint_index:], model,
                t_offset=None if t_offset is None else t_offset.shift(breakpoint_index),
                options=options, truncate_on_decline=False,
            )
        except GrowthFitError:
            continue
        combined = first.sse + second.sse
        if best is None or combined < best[1]:
            best = (breakpoint_index, combined, first, second)
    if best is None:
        return None

    sse_floor = max(1e-10, 1e-9 * float(data @ data))
    try:
        single = fit_growth(data, model, t_offset=t_offset, options=options, truncate_on_decline=False)
        single_bic = _bic(single.sse, n, 3, sse_floor)
    except GrowthFitError:
        single_bic = math.inf
    breakpoint_index, combined, first, second = best
    preferred = _bic(combined, n, 7, sse_floor) < single_bic
    return BiPhaseFit(
        breakpoint_index=breakpoint_index,
        breakpoint=None if t_offset is None else t_offset.shift(breakpoint_index),
        first=first,
        second=second,
        combined_sse=combined,
        preferred=preferred,
    )
