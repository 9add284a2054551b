"""RMS angular spreads from circular statistics and their log-normal summaries."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import Condition, Metric, Scope
from .lobes import SpatialLobe

log = logging.getLogger(__name__)

#: resultant lengths below this make ``-2 ln R`` meaningless
RESULTANT_FLOOR = 1e-12


class DegenerateSpreadError(ValueError):
    """The power-weighted resultant vanished (e.g. antipodal equal powers)."""


@dataclass(frozen=True)
class ASValue:
    metric: Metric
    scope: Scope
    value_deg: float
    link_id: str = ""
    lobe_index: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "scope", Scope(self.scope))
        if not (math.isfinite(self.value_deg) and self.value_deg >= 0):
            raise ValueError(f"angular spread must be finite and >= 0, got {self.value_deg!r}")


@dataclass(frozen=True)
class LogNormalSummary:
    """Log-normal description of one metric/scope/condition/frequency cell."""

    metric: Metric
    condition: Condition
    scope: Scope
    frequency_ghz: float
    mu_lg: float
    sigma_lg: float
    n_samples: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "condition", Condition(self.condition))
        object.__setattr__(self, "scope", Scope(self.scope))
        if self.sigma_lg < 0:
            raise ValueError("sigma_lg must be >= 0")

    @property
    def expectation_deg(self) -> float:
        return lognormal_expectation_deg(self.mu_lg, self.sigma_lg)


def circular_as(angles_deg: Sequence[float], powers_linear: Sequence[float]) -> float:
    """Power-weighted circular standard deviation ``sqrt(-2 ln R)``, in degrees.

    Raises :class:`DegenerateSpreadError` when the resultant length ``R`` is
    below :data:`RESULTANT_FLOOR`.
    """
    theta = np.deg2rad(np.asarray(angles_deg, dtype=float))
    p = np.asarray(powers_linear, dtype=float)
    if theta.ndim != 1 or theta.shape != p.shape:
        raise ValueError("angles and powers must be 1-D sequences of equal length")
    if theta.size == 0:
        raise ValueError("no components")
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(p))):
        raise ValueError("angles and powers must be finite")
    if np.any(p <= 0):
        raise ValueError("component powers must be positive")

    wrapped = np.mod(np.asarray(angles_deg, dtype=float), 360.0)
    if np.all(wrapped == wrapped[0]):
        return 0.0
    value = spread_rad(theta, p)
    if math.isinf(value):
        raise DegenerateSpreadError(f"power-weighted resultant below floor {RESULTANT_FLOOR}")
    return math.degrees(value)


def spread_rad(theta_rad: np.ndarray, weights: np.ndarray) -> float:
    """Unchecked kernel of :func:`circular_as`; returns inf for a vanishing resultant."""
    w = weights / weights.sum()
    c, s = float(np.dot(w, np.cos(theta_rad))), float(np.dot(w, np.sin(theta_rad)))
    r = math.hypot(c, s)
    if r < RESULTANT_FLOOR:
        return math.inf
    if r < 0.5:
        return math.sqrt(-2.0 * math.log(r))
    # narrow spread: 1 - R**2 from angles centred on the mean direction
    d = theta_rad - math.atan2(s, c)
    one_minus_c = float(np.dot(w, 2.0 * np.sin(d / 2.0) ** 2))
    s_c = float(np.dot(w, np.sin(d)))
    one_minus_r2 = max(one_minus_c * (2.0 - one_minus_c) - s_c * s_c, 0.0)
    return math.sqrt(-math.log1p(-one_minus_r2))


def _lobe_angles(lobe: SpatialLobe, metric: Metric) -> np.ndarray:
    if metric.is_zenith:
        return np.full(len(lobe.members), lobe.zenith_deg)
    return lobe.angles_deg


def _check_plane(lobes: Sequence[SpatialLobe], metric: Metric) -> None:
    for lobe in lobes:
        if lobe.plane is not metric.plane:
            raise ValueError(f"{metric.value} needs {metric.plane.value} lobes, got a {lobe.plane.value} lobe")


def omni_as(lobes: Sequence[SpatialLobe], metric: Metric) -> ASValue:
    """Spread over the pooled members of every lobe of one PAS."""
    metric = Metric(metric)
    if not lobes:
        raise ValueError("omni spread needs at least one lobe")
    _check_plane(lobes, metric)
    angles = np.concatenate([_lobe_angles(lb, metric) for lb in lobes])
    powers = np.concatenate([lb.powers for lb in lobes])
    return ASValue(metric, Scope.OMNI, circular_as(angles, powers), link_id=lobes[0].link_id)


def lobe_as(lobe: SpatialLobe, metric: Metric) -> ASValue:
    metric = Metric(metric)
    _check_plane([lobe], metric)
    value = circular_as(_lobe_angles(lobe, metric), lobe.powers)
    return ASValue(metric, Scope.LOBE, value, link_id=lobe.link_id, lobe_index=lobe.lobe_index)


def lognormal_fit(values_deg: Sequence[float]) -> Tuple[float, float]:
    """Mean and population standard deviation of ``log10(values)``."""
    v = np.asarray(values_deg, dtype=float)
    if v.size == 0:
        raise ValueError("no samples to fit")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("log-normal fit needs finite, strictly positive samples")
    lg = np.log10(v)
    mu = float(lg.mean())
    return mu, float(np.sqrt(np.mean((lg - mu) ** 2)))


def lognormal_expectation_deg(mu_lg: float, sigma_lg: float) -> float:
    """Expectation ``10 ** (mu + sigma**2 / 2)`` of the log-normal law."""
    if not (math.isfinite(mu_lg) and math.isfinite(sigma_lg)):
        raise ValueError("mu and sigma must be finite")
    if sigma_lg < 0:
        raise ValueError("sigma must be >= 0")
    return 10.0 ** (mu_lg + sigma_lg * sigma_lg / 2.0)


def summarize(
    values_deg: Sequence[float],
    metric: Metric,
    scope: Scope,
    condition: Condition,
    frequency_ghz: float,
) -> Optional[LogNormalSummary]:
    """Fit a log-normal summary, dropping zero spreads (single-direction lobes).

    Returns ``None`` when nothing positive is left to fit.
    """
    v = np.asarray(values_deg, dtype=float)
    keep = v[v > 0]
    dropped = v.size - keep.size
    if dropped:
        log.info("%s %s %s %.2f GHz: excluded %d zero-valued spread(s) from the fit",
                 Metric(metric).value, Scope(scope).value, Condition(condition).value, frequency_ghz, dropped)
    if keep.size == 0:
        log.warning("%s %s %s %.2f GHz: no positive spreads, no summary",
                    Metric(metric).value, Scope(scope).value, Condition(condition).value, frequency_ghz)
        return None
    mu, sigma = lognormal_fit(keep)
    return LogNormalSummary(metric, condition, scope, frequency_ghz, mu, sigma, int(keep.size))


def empirical_cdf(values: Sequence[float]) -> List[Tuple[float, float]]:
    """Right-continuous empirical CDF: each distinct value with ``P(X <= value)``."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("empirical CDF of an empty sample")
    uniq, counts = np.unique(v, return_counts=True)
    cum = np.cumsum(counts) / v.size
    return list(zip(uniq.tolist(), cum.tolist()))
