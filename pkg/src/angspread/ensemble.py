"""Seeded Monte Carlo ensembles of synthetic links with prescribed spread laws.

Each link gets omnidirectional spread targets drawn from log-normal laws and a
set of spatial lobes built so that the pooled omni spread hits those targets.
Lobes sit on the PAS azimuth grid, stay within 10 dB of the link's peak and are
separated by at least one empty bin, so rendering them as directional records
and re-running lobe detection gives the same lobes back.

Random streams: ``SeedSequence(seed).spawn(n_links)`` gives every link its own
PCG64 generator, so links are independent of generation order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .core import Condition, DirectionalRecord, Metric, Plane, linear_to_db
from .lobes import SpatialLobe
from .stats import RESULTANT_FLOOR, spread_rad

log = logging.getLogger(__name__)

#: lobe members are kept at most this far below the link peak
MEMBER_FLOOR_DB = 9.5
#: fits closer than this count as exact; equal targets then give equal spreads
EXACT_DEG = 1e-9
#: extra layouts tried when a fit is only within tolerance
INEXACT_REDRAWS = 5
#: largest spread the estimator can return; larger draws are redrawn
MAX_TARGET_DEG = math.degrees(math.sqrt(-2.0 * math.log(RESULTANT_FLOOR)))
#: redraw cap before a target law is declared out of range
MAX_TARGET_REDRAWS = 1000


class UnreachableTargetError(ValueError):
    pass


class EnsembleError(RuntimeError):
    pass


def draw_as_target(rng: np.random.Generator, mu_lg: float, sigma_lg: float) -> float:
    if sigma_lg < 0:
        raise ValueError("sigma_lg must be >= 0")
    return 10.0 ** (mu_lg + sigma_lg * rng.standard_normal())


def _draw_bounded(rng: np.random.Generator, metric: Metric, mu_lg: float, sigma_lg: float) -> float:
    """Log-normal draw truncated at :data:`MAX_TARGET_DEG`."""
    for _ in range(MAX_TARGET_REDRAWS):
        value = draw_as_target(rng, mu_lg, sigma_lg)
        if value <= MAX_TARGET_DEG:
            return value
        log.info("%s target %.1f deg above the estimable %.1f deg, redrawn", metric.value, value, MAX_TARGET_DEG)
    raise UnreachableTargetError(
        f"{metric.value} law ({mu_lg}, {sigma_lg}) keeps drawing spreads above the estimable {MAX_TARGET_DEG:.2f} deg"
    )


def _spread(theta_rad: np.ndarray, w: np.ndarray) -> float:
    return math.degrees(spread_rad(theta_rad, w))


@dataclass
class _Structure:
    widths: np.ndarray
    base_db: np.ndarray  # per member, <= 0
    gap_weights: np.ndarray
    offset: int
    n_bins: int
    stacked: bool = False  # every lobe on the same arc, one cut each

    @property
    def free(self) -> int:
        if self.stacked:
            return 0
        return self.n_bins - int(self.widths.sum()) - len(self.widths)

    def bins(self, s: float) -> np.ndarray:
        """Member bins with gaps grown by ``s``; at ``s = 1`` the free space is shared evenly."""
        if self.stacked:
            return np.tile((self.offset + np.arange(self.widths[0])) % self.n_bins, len(self.widths))
        share = (1.0 - s) * self.gap_weights + s / len(self.widths)
        gaps = 1 + np.floor(s * share * self.free).astype(int)
        starts = self.offset + np.concatenate(([0], np.cumsum(self.widths + gaps)[:-1]))
        return np.concatenate([(st + np.arange(w)) % self.n_bins for st, w in zip(starts, self.widths)])

    def weights(self, t: float) -> np.ndarray:
        return 10.0 ** (t * self.base_db / 10.0)

    @property
    def t_max(self) -> float:
        worst = float(-self.base_db.min())
        return MEMBER_FLOOR_DB / worst if worst > 0 else 1.0


def _draw_structure(rng, lobe_count, members_hi, members_lo, power_spread_db, n_bins, stacked=False) -> _Structure:
    widths = rng.integers(members_lo, members_hi + 1, size=lobe_count)
    if stacked:
        widths[:] = widths[0]
    base = []
    lobe_db = np.concatenate(([0.0], -rng.uniform(0.0, power_spread_db, size=lobe_count - 1)))
    for w, ldb in zip(widths, lobe_db):
        m = -rng.uniform(0.0, power_spread_db, size=w)
        m[rng.integers(w)] = 0.0
        base.append(ldb + m)
    gap_weights = rng.dirichlet(np.full(lobe_count, 4.0))
    return _Structure(widths, np.concatenate(base), gap_weights, int(rng.integers(n_bins)), n_bins, stacked)


def _fit_azimuth(st: _Structure, target: float, tol: float, res: float, budget: List[int]):
    """Scale gaps, then reweight, until the pooled spread is within ``tol``."""

    theta_cache: Dict[float, np.ndarray] = {}

    def f(s, t):
        budget[0] -= 1
        if s not in theta_cache:
            theta_cache[s] = np.deg2rad(st.bins(s) * res)
        return _spread(theta_cache[s], st.weights(t))

    n_s = max(st.free, 0) + 1
    s_grid = np.linspace(0.0, 1.0, n_s) if n_s > 1 else np.array([0.0])

    # smallest grid scale whose spread reaches the target (spread grows with the gaps)
    lo, hi = 0, len(s_grid) - 1
    while lo < hi and budget[0] > 0:
        mid = (lo + hi) // 2
        if f(s_grid[mid], 1.0) >= target:
            hi = mid
        else:
            lo = mid + 1
    # neighbouring scales outward from there, since the floor of the gaps is not smooth
    order = [lo] + [lo + d * k for k in range(1, 9) for d in (-1, 1)]
    candidates = [i for i in order if 0 <= i < len(s_grid)]

    near = None  # closest sample within tolerance, used only if no scale brackets the target
    t_grid = np.linspace(0.0, st.t_max, 9)
    for i in candidates:
        s = s_grid[i]
        # spread need not be monotone in t, so look for a bracketing pair of samples
        vals = [f(s, t) for t in t_grid]
        for a, t in zip(vals, t_grid):
            if abs(a - target) <= tol and (near is None or abs(a - target) < near[0]):
                near = (abs(a - target), s, t)
        k = next((k for k in range(len(vals) - 1) if (vals[k] - target) * (vals[k + 1] - target) <= 0), None)
        if k is None:
            continue
        t_lo, t_hi = t_grid[k], t_grid[k + 1]
        sign = 1.0 if vals[k] > vals[k + 1] else -1.0
        # bisect to machine precision so equal targets give equal spreads
        best = (abs(vals[k] - target), t_lo)
        for _ in range(64):
            if budget[0] <= 0:
                break
            t = 0.5 * (t_lo + t_hi)
            a = f(s, t)
            best = min(best, (abs(a - target), t))
            if a == target or t in (t_lo, t_hi):
                break
            if sign * (a - target) > 0:
                t_lo = t
            else:
                t_hi = t
        if best[0] <= tol:
            return s, best[1], best[0] <= EXACT_DEG
    return None if near is None else (near[1], near[2], near[0] <= EXACT_DEG)


def _fit_zenith(lobe_w: np.ndarray, target: float, tol: float, rng) -> np.ndarray:
    """Lobe zenith angles ``90 + 90*s*y`` whose weighted spread matches ``target``."""
    n = len(lobe_w)
    if target <= tol:
        return np.full(n, 90.0)
    if n < 2:
        raise UnreachableTargetError("a non-zero zenith spread needs at least two lobes (one cut each)")
    y = rng.permutation(np.linspace(-1.0, 1.0, n))

    def f(s):
        return _spread(np.deg2rad(90.0 + 90.0 * s * y), lobe_w)

    # spread is increasing in s until the resultant bottoms out; coarse vectorised scan for that range
    s_grid = np.linspace(0.0, 1.0, 201)
    theta = np.deg2rad(90.0 + 90.0 * np.outer(s_grid, y))
    w = lobe_w / lobe_w.sum()
    r = np.maximum(np.hypot(np.cos(theta) @ w, np.sin(theta) @ w), 1e-300)
    vals = np.degrees(np.sqrt(np.maximum(-2.0 * np.log(np.minimum(r, 1.0)), 0.0)))
    top = int(np.argmax(vals))
    if vals[top] < target - tol:
        raise UnreachableTargetError(
            f"zenith target {target:.2f} deg above the reachable maximum {vals[top]:.2f} deg for these lobe powers"
        )
    lo, hi = 0.0, float(s_grid[top])
    if f(hi) < target:
        return 90.0 + 90.0 * hi * y
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return 90.0 + 90.0 * hi * y


def generate_link(
    rng: np.random.Generator,
    azimuth_target_deg: float,
    zenith_target_deg: float,
    lobe_count: int,
    *,
    plane: Plane = Plane.AOA,
    link_id: str = "",
    members_range: Tuple[int, int] = (1, 5),
    power_spread_db: float = 4.5,
    resolution_deg: float = 1.0,
    tol_deg: float = 0.1,
    max_iter: int = 1000,
    max_redraws: int = 50,
) -> List[SpatialLobe]:
    """Lobes for one side of a link whose omni spreads match the targets.

    Gap scaling followed by member reweighting is tried first on each drawn
    lobe layout; a layout that cannot reach the target within the iteration
    budget is rejected and a narrower one drawn. Azimuth targets below what
    disjoint lobes allow fall back to lobes stacked on one arc in separate
    elevation cuts, which needs a non-zero zenith target.
    """
    if azimuth_target_deg < 0 or zenith_target_deg < 0:
        raise ValueError("spread targets must be >= 0")
    if lobe_count < 1:
        raise ValueError("lobe_count must be >= 1")
    if 2.0 * power_spread_db > MEMBER_FLOOR_DB:
        raise ValueError(f"power_spread_db must be <= {MEMBER_FLOOR_DB / 2} to keep lobes above threshold")
    n_bins = int(round(360.0 / resolution_deg))
    lo_m, hi_m = members_range
    seen_lo, seen_hi = math.inf, 0.0
    zenith_error: Optional[UnreachableTargetError] = None
    fallback, fallback_attempt = None, 0

    for attempt in range(max_redraws):
        budget = [max_iter]
        hi = max(lo_m, hi_m - attempt // 3)
        lo = min(lo_m, hi)
        stacked = (
            lobe_count > 1 and zenith_target_deg > tol_deg and attempt >= 3 and azimuth_target_deg < seen_lo
        )
        st = _draw_structure(rng, lobe_count, hi, lo, power_spread_db, n_bins, stacked)
        if st.free < 0:
            continue
        fit = _fit_azimuth(st, azimuth_target_deg, tol_deg, resolution_deg, budget)
        for s, t in ((0.0, st.t_max), (1.0, 0.0)):
            a = _spread(np.deg2rad(st.bins(s) * resolution_deg), st.weights(t))
            seen_lo, seen_hi = min(seen_lo, a), max(seen_hi, a)
        if fit is None:
            continue
        if not fit[2] and (fallback is None or attempt - fallback_attempt < INEXACT_REDRAWS):
            # within tolerance but not exact: prefer a redraw that hits the target exactly
            if fallback is None:
                fallback, fallback_attempt = (st, fit), attempt
            continue
        try:
            return _realize(st, fit, zenith_target_deg, tol_deg, resolution_deg, link_id, plane, rng)
        except UnreachableTargetError as exc:
            if lobe_count < 2:
                raise
            zenith_error = exc

    if fallback is not None:
        try:
            return _realize(*fallback, zenith_target_deg, tol_deg, resolution_deg, link_id, plane, rng)
        except UnreachableTargetError as exc:
            zenith_error = exc
    if zenith_error is not None:
        raise zenith_error
    raise UnreachableTargetError(
        f"azimuth target {azimuth_target_deg:.2f} deg not reached with {lobe_count} lobe(s); "
        f"reachable range seen {seen_lo:.2f}-{seen_hi:.2f} deg"
    )


def _realize(st, fit, zenith_target, tol, res, link_id, plane, rng) -> List[SpatialLobe]:
    s, t, _ = fit
    w = st.weights(t)
    w = w / w.max()
    splits = np.cumsum(st.widths)[:-1]
    lobe_bins = np.split(st.bins(s), splits)
    lobe_w = np.split(w, splits)
    zeniths = _fit_zenith(np.array([x.sum() for x in lobe_w]), zenith_target, tol, rng)
    return _as_lobes(lobe_bins, lobe_w, zeniths, res, link_id, plane)


def _as_lobes(lobe_bins, lobe_w, zeniths, res, link_id, plane) -> List[SpatialLobe]:
    raw = []
    for b, w, z in zip(lobe_bins, lobe_w, zeniths):
        k = int(np.argmax(w))
        peak_bin = int(b[w == w[k]].min())
        raw.append((float(w[k]), peak_bin, float(z), b, w))
    raw.sort(key=lambda r: (-r[0], r[1], r[2]))
    return [
        SpatialLobe(
            start_deg=float(b[0] * res),
            end_deg=float(b[-1] * res),
            members=tuple(zip((b * res).tolist(), w.tolist())),
            peak_power_linear=peak,
            lobe_index=i,
            zenith_deg=z,
            link_id=link_id,
            plane=plane,
        )
        for i, (peak, _, z, b, w) in enumerate(raw)
    ]


@dataclass(frozen=True)
class EnsembleSpec:
    n_links: int
    targets: Mapping[Metric, Tuple[float, float]]
    condition: Condition
    frequency_ghz: float
    seed: int = 0
    lobe_count_range: Tuple[int, int] = (2, 4)
    members_range: Tuple[int, int] = (1, 5)
    power_spread_db: float = 4.5
    resolution_deg: float = 1.0

    def __post_init__(self) -> None:
        if self.n_links < 1:
            raise ValueError("n_links must be >= 1")
        targets = {Metric(k): (float(m), float(s)) for k, (m, s) in dict(self.targets).items()}
        if any(s < 0 for _, s in targets.values()):
            raise ValueError("sigma_lg must be >= 0")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "condition", Condition(self.condition))
        lo, hi = self.lobe_count_range
        if not 1 <= lo <= hi:
            raise ValueError("invalid lobe_count_range")


@dataclass
class EnsembleLink:
    link_id: str
    condition: Condition
    frequency_ghz: float
    targets: Dict[Metric, float]
    lobes: Dict[Plane, List[SpatialLobe]] = field(default_factory=dict)


@dataclass
class EnsembleDataset:
    spec: EnsembleSpec
    links: List[EnsembleLink]


_PLANE_METRICS = {Plane.AOA: (Metric.ASA, Metric.ZSA), Plane.AOD: (Metric.ASD, Metric.ZSD)}


def _generate_one(spec: EnsembleSpec, index: int, seed_seq: np.random.SeedSequence) -> EnsembleLink:
    rng = np.random.default_rng(seed_seq)
    link_id = f"link{index:04d}"
    targets = {m: _draw_bounded(rng, m, *spec.targets[m]) for m in Metric if m in spec.targets}
    link = EnsembleLink(link_id, spec.condition, spec.frequency_ghz, targets)
    for plane, (az_m, zen_m) in _PLANE_METRICS.items():
        if az_m not in targets:
            continue
        lo, hi = spec.lobe_count_range
        drawn = int(rng.integers(lo, hi + 1))
        # the drawn lobe count first, then the others nearest first
        counts = sorted(range(lo, hi + 1), key=lambda c: (c != drawn, abs(c - drawn), c))
        for k, lobe_count in enumerate(counts):
            try:
                link.lobes[plane] = generate_link(
                    rng,
                    targets[az_m],
                    targets.get(zen_m, 0.0),
                    lobe_count,
                    plane=plane,
                    link_id=link_id,
                    members_range=spec.members_range,
                    power_spread_db=spec.power_spread_db,
                    resolution_deg=spec.resolution_deg,
                )
                break
            except UnreachableTargetError:
                if k == len(counts) - 1:
                    raise
    return link


def generate_ensemble(spec: EnsembleSpec) -> EnsembleDataset:
    children = np.random.SeedSequence(spec.seed).spawn(spec.n_links)
    links = []
    for i, child in enumerate(children):
        try:
            links.append(_generate_one(spec, i, child))
        except (UnreachableTargetError, ValueError) as exc:
            raise EnsembleError(f"link {i}: {exc}") from exc
    return EnsembleDataset(spec, links)


def _peak_direction(lobes: Sequence[SpatialLobe]) -> Tuple[float, float]:
    top = lobes[0]
    for a, p in top.members:
        if p == top.peak_power_linear:
            return a, top.zenith_deg
    raise AssertionError("peak member missing")


def link_records(link: EnsembleLink, resolution_deg: float = 1.0) -> List[DirectionalRecord]:
    """Directional records that reproduce ``link``'s lobes through PAS synthesis.

    Each plane's members are laid out with the opposite antenna held on the
    other plane's peak direction; below-noise records bracket every lobe so
    interpolation cannot bridge lobes.
    """
    n_bins = int(round(360.0 / resolution_deg))
    peaks = {p: _peak_direction(lb) for p, lb in link.lobes.items() if lb}
    out: Dict[tuple, DirectionalRecord] = {}

    def put(plane, az, zen, power):
        other = peaks.get(Plane.AOD if plane is Plane.AOA else Plane.AOA, (0.0, 90.0))
        if plane is Plane.AOA:
            angles = (other[0], other[1], az, zen)
        else:
            angles = (az, zen, other[0], other[1])
        key = angles
        dbm = None if power is None else linear_to_db(power)
        if key in out and power is None:
            return
        out[key] = DirectionalRecord(link.link_id, link.frequency_ghz, link.condition, *angles, dbm)

    for plane, lobes in link.lobes.items():
        for lobe in lobes:
            for a, p in lobe.members:
                put(plane, a, lobe.zenith_deg, p)
        member_keys = {(lb.zenith_deg, round(a / resolution_deg) % n_bins) for lb in lobes for a, _ in lb.members}
        for lobe in lobes:
            for edge, step in ((lobe.start_deg, -1), (lobe.end_deg, 1)):
                b = (int(round(edge / resolution_deg)) + step) % n_bins
                if (lobe.zenith_deg, b) not in member_keys:
                    put(plane, b * resolution_deg, lobe.zenith_deg, None)
    return sorted(out.values(), key=lambda r: (r.tx_el_deg, r.tx_az_deg, r.rx_el_deg, r.rx_az_deg))
