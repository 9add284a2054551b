"""Per-link estimation (records -> PAS -> lobes -> spreads) and cross-link summaries."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .core import Condition, DirectionalRecord, Metric, Plane, Scope
from .lobes import DEFAULT_THRESHOLD_DB, SpatialLobe, lobes_from_pas
from .pas import PASError, collapse_to_plane, synthesize_pas
from .stats import ASValue, LogNormalSummary, empirical_cdf, lobe_as, omni_as, summarize

log = logging.getLogger(__name__)

_METRICS = {Plane.AOA: (Metric.ASA, Metric.ZSA), Plane.AOD: (Metric.ASD, Metric.ZSD)}


class PipelineError(ValueError):
    """A link failed to process; the message names the link."""


@dataclass
class LinkResult:
    link_id: str
    frequency_ghz: float
    condition: Condition
    lobes: Dict[Plane, List[SpatialLobe]] = field(default_factory=dict)
    values: List[ASValue] = field(default_factory=list)


def spreads_from_lobes(lobes: Mapping[Plane, Sequence[SpatialLobe]]) -> List[ASValue]:
    """Omni spreads for all four metrics and azimuth spreads per lobe.

    Lobes are found within one elevation cut, so a per-lobe zenith spread is
    identically zero and is not reported.
    """
    values: List[ASValue] = []
    for plane in (Plane.AOA, Plane.AOD):
        plane_lobes = lobes.get(plane) or []
        if not plane_lobes:
            continue
        az_metric, zen_metric = _METRICS[plane]
        values.append(omni_as(plane_lobes, az_metric))
        values.append(omni_as(plane_lobes, zen_metric))
        values.extend(lobe_as(lb, az_metric) for lb in plane_lobes)
    return values


def analyze_link(
    records: Sequence[DirectionalRecord],
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    resolution_deg: float = 1.0,
) -> LinkResult:
    """Run PAS synthesis, lobe detection and spread estimation for one link."""
    if not records:
        raise PipelineError("no records for link")
    first = records[0]
    link_id = first.link_id
    try:
        if any(r.link_id != link_id for r in records):
            raise ValueError("records from several links")
        if len({(r.frequency_ghz, r.condition) for r in records}) != 1:
            raise ValueError("records mix frequencies or conditions")
        result = LinkResult(link_id, first.frequency_ghz, first.condition)
        for plane in (Plane.AOA, Plane.AOD):
            collapsed = collapse_to_plane(records, plane)
            try:
                pas = synthesize_pas(collapsed, plane, resolution_deg)
            except PASError as exc:
                if "below the noise floor" not in str(exc):
                    raise
                log.warning("link %s: %s has no power above noise", link_id, plane.value)
                continue
            result.lobes[plane] = lobes_from_pas(pas, threshold_db)
        result.values = spreads_from_lobes(result.lobes)
    except (ValueError, ArithmeticError) as exc:
        raise PipelineError(f"link {link_id}: {exc}") from exc
    return result


def analyze_records(
    records: Iterable[DirectionalRecord],
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    resolution_deg: float = 1.0,
) -> List[LinkResult]:
    """:func:`analyze_link` for every link, in first-appearance order."""
    groups: Dict[str, List[DirectionalRecord]] = {}
    for r in records:
        groups.setdefault(r.link_id, []).append(r)
    if not groups:
        raise PipelineError("no links to analyze")
    return [analyze_link(recs, threshold_db, resolution_deg) for recs in groups.values()]


def analyze_lobe_sets(
    links: Iterable[Tuple[str, float, Condition, Mapping[Plane, Sequence[SpatialLobe]]]],
) -> List[LinkResult]:
    out = []
    for link_id, freq, cond, lobes in links:
        try:
            values = spreads_from_lobes(lobes)
        except (ValueError, ArithmeticError) as exc:
            raise PipelineError(f"link {link_id}: {exc}") from exc
        out.append(LinkResult(link_id, freq, Condition(cond), {p: list(v) for p, v in lobes.items()}, values))
    if not out:
        raise PipelineError("no links to analyze")
    return out


GroupKey = Tuple[Condition, float, Metric, Scope]


def _group_key(k: GroupKey):
    cond, freq, metric, scope = k
    return (freq, cond.value, list(Metric).index(metric), scope is Scope.LOBE)


def group_values(
    values: Iterable[Tuple[float, Condition, ASValue]],
    frequency_ghz: Optional[float] = None,
) -> Dict[GroupKey, List[float]]:
    groups: Dict[GroupKey, List[float]] = {}
    for freq, cond, v in values:
        if frequency_ghz is not None and freq != frequency_ghz:
            continue
        groups.setdefault((Condition(cond), freq, v.metric, v.scope), []).append(v.value_deg)
    return {k: groups[k] for k in sorted(groups, key=_group_key)}


def flatten(results: Iterable[LinkResult]) -> List[Tuple[float, Condition, ASValue]]:
    return [(r.frequency_ghz, r.condition, v) for r in results for v in r.values]


def summarize_values(
    values: Iterable[Tuple[float, Condition, ASValue]],
    frequency_ghz: Optional[float] = None,
) -> List[LogNormalSummary]:
    """One log-normal summary per (condition, frequency, metric, scope) group."""
    out = []
    for (cond, freq, metric, scope), vals in group_values(values, frequency_ghz).items():
        s = summarize(vals, metric, scope, cond, freq)
        if s is not None:
            out.append(s)
    return out


def cdfs(
    values: Iterable[Tuple[float, Condition, ASValue]],
    frequency_ghz: Optional[float] = None,
) -> Dict[GroupKey, List[Tuple[float, float]]]:
    return {k: empirical_cdf(v) for k, v in group_values(values, frequency_ghz).items()}
