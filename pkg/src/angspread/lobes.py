"""Spatial lobe detection on a power angular spectrum."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .core import Plane
from .pas import PASError, PowerAngularSpectrum

DEFAULT_THRESHOLD_DB = 10.0


@dataclass(frozen=True)
class SpatialLobe:
    """A maximal run of contiguous azimuth bins at or above the lobe threshold.

    ``members`` lists ``(azimuth_deg, power_mw)`` for every bin of the arc in
    order from ``start_deg`` to ``end_deg`` (the arc may wrap through 0).
    Interpolated bins are members too.
    """

    start_deg: float
    end_deg: float
    members: Tuple[Tuple[float, float], ...]
    peak_power_linear: float
    lobe_index: int = 0
    zenith_deg: float = 90.0
    link_id: str = ""
    plane: Plane = Plane.AOA

    def __post_init__(self) -> None:
        members = tuple((float(a), float(p)) for a, p in self.members)
        if not members:
            raise ValueError("a spatial lobe needs at least one member")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "plane", Plane(self.plane))

    @property
    def angles_deg(self) -> np.ndarray:
        return np.array([a for a, _ in self.members])

    @property
    def powers(self) -> np.ndarray:
        return np.array([p for _, p in self.members])

    @property
    def total_power(self) -> float:
        return float(self.powers.sum())

    def to_dict(self) -> dict:
        return {
            "lobe_index": self.lobe_index,
            "start_deg": self.start_deg,
            "end_deg": self.end_deg,
            "peak_power_mw": self.peak_power_linear,
            "zenith_deg": self.zenith_deg,
            "members": [[a, p] for a, p in self.members],
        }

    @classmethod
    def from_dict(cls, d: dict, link_id: str = "", plane: Plane = Plane.AOA) -> "SpatialLobe":
        return cls(
            start_deg=float(d["start_deg"]),
            end_deg=float(d["end_deg"]),
            members=tuple((float(a), float(p)) for a, p in d["members"]),
            peak_power_linear=float(d["peak_power_mw"]),
            lobe_index=int(d["lobe_index"]),
            zenith_deg=float(d.get("zenith_deg", 90.0)),
            link_id=link_id,
            plane=plane,
        )


def spatial_lobe_threshold(pas: PowerAngularSpectrum, threshold_db: float = DEFAULT_THRESHOLD_DB) -> float:
    """Linear power ``threshold_db`` below the strongest bin of the PAS."""
    if not threshold_db > 0:
        raise ValueError("threshold_db must be positive")
    return pas.peak_power() / 10.0 ** (threshold_db / 10.0)


def _runs(above: np.ndarray) -> List[np.ndarray]:
    """Index runs of a circular boolean mask; a fully-set mask yields one run from 0."""
    n = len(above)
    if above.all():
        return [np.arange(n)]
    if not above.any():
        return []
    first_gap = int(np.flatnonzero(~above)[0])
    order = (first_gap + 1 + np.arange(n)) % n
    runs, cur = [], []
    for i in order:
        if above[i]:
            cur.append(i)
        elif cur:
            runs.append(np.array(cur))
            cur = []
    if cur:
        runs.append(np.array(cur))
    return runs


def segment_lobes(pas: PowerAngularSpectrum, slt: float) -> List[SpatialLobe]:
    """Split every elevation cut of ``pas`` into spatial lobes at power ``slt``.

    Lobes come back ordered by descending peak power; ties go to the lower
    azimuth, then lower zenith. Absent bins end a lobe like sub-threshold ones.
    """
    if not slt > 0:
        raise ValueError("spatial lobe threshold must be positive")
    res = pas.resolution_deg
    found = []
    for cut in pas.cuts:
        bins = cut.bins
        above = cut.present & (np.nan_to_num(bins, nan=-np.inf) >= slt)
        for run in _runs(above):
            powers = bins[run]
            if len(run) == len(bins):
                # full circle: start the arc at the (first) strongest bin
                run = np.roll(run, -int(np.argmax(powers)))
                powers = bins[run]
            k = int(np.argmax(powers))
            peak_idx = int(run[powers == powers[k]].min())
            found.append((float(powers[k]), peak_idx, cut.zenith_deg, run, powers))

    found.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [
        SpatialLobe(
            start_deg=float(run[0] * res),
            end_deg=float(run[-1] * res),
            members=tuple(zip((run * res).tolist(), powers.tolist())),
            peak_power_linear=peak,
            lobe_index=i,
            zenith_deg=zen,
            link_id=pas.link_id,
            plane=pas.plane,
        )
        for i, (peak, _, zen, run, powers) in enumerate(found)
    ]


def count_lobes(pas: PowerAngularSpectrum, threshold_db: float = DEFAULT_THRESHOLD_DB) -> int:
    return len(segment_lobes(pas, spatial_lobe_threshold(pas, threshold_db)))


def lobes_from_pas(pas: PowerAngularSpectrum, threshold_db: float = DEFAULT_THRESHOLD_DB) -> List[SpatialLobe]:
    try:
        slt = spatial_lobe_threshold(pas, threshold_db)
    except PASError:
        return []
    return segment_lobes(pas, slt)


def member_union(lobes: Sequence[SpatialLobe]) -> set:
    """``(zenith, azimuth)`` keys of all lobe members, for partition checks."""
    return {(lobe.zenith_deg, a) for lobe in lobes for a, _ in lobe.members}
