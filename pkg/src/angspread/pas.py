"""Power angular spectrum (PAS) synthesis from directional sweep records."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import DirectionalRecord, Plane, db_to_linear, linear_to_db


class PASError(ValueError):
    pass


def remove_antenna_gain(record: DirectionalRecord, plane: Optional[Plane] = None) -> DirectionalRecord:
    """Strip antenna gain from a record's received power.

    With ``plane=AOA`` only the RX gain is removed, with ``plane=AOD`` only the
    TX gain, and with ``plane=None`` both (omnidirectional bookkeeping). Removed
    gains are zeroed in the returned record. Below-noise records pass through
    with their power still absent.
    """
    strip_tx = plane is None or Plane(plane) is Plane.AOD
    strip_rx = plane is None or Plane(plane) is Plane.AOA
    removed = (record.tx_gain_dbi if strip_tx else 0.0) + (record.rx_gain_dbi if strip_rx else 0.0)
    power = None if record.power_dbm is None else record.power_dbm - removed
    return dataclasses.replace(
        record,
        power_dbm=power,
        tx_gain_dbi=0.0 if strip_tx else record.tx_gain_dbi,
        rx_gain_dbi=0.0 if strip_rx else record.rx_gain_dbi,
    )


def collapse_to_plane(records: Iterable[DirectionalRecord], plane: Plane) -> List[DirectionalRecord]:
    """Reduce records to one per pointing direction on ``plane``.

    Every RX pointing (for AOA) keeps the strongest gain-removed observation
    over all TX pointings, and vice versa for AOD. A direction with only
    below-noise observations stays below-noise.
    """
    plane = Plane(plane)
    best: Dict[tuple, DirectionalRecord] = {}
    for rec in records:
        rec = remove_antenna_gain(rec)
        d = rec.pointing(plane)
        key = (rec.link_id, d.azimuth_deg, d.zenith_deg)
        cur = best.get(key)
        if cur is None or (
            rec.power_dbm is not None and (cur.power_dbm is None or rec.power_dbm > cur.power_dbm)
        ):
            best[key] = rec
    return [best[k] for k in sorted(best, key=lambda k: (k[0], k[2], k[1]))]


@dataclass(frozen=True)
class ElevationCut:
    """Azimuth power profile at one zenith angle.

    ``bins`` holds linear power in mW with NaN for absent bins; ``measured``
    flags bins filled directly from a record (including below-noise ones).
    """

    zenith_deg: float
    bins: np.ndarray
    measured: np.ndarray

    def __post_init__(self) -> None:
        bins = np.array(self.bins, dtype=float)
        measured = np.array(self.measured, dtype=bool)
        if bins.shape != measured.shape or bins.ndim != 1:
            raise PASError("bins and measured mask must be 1-D and the same length")
        bins.setflags(write=False)
        measured.setflags(write=False)
        object.__setattr__(self, "bins", bins)
        object.__setattr__(self, "measured", measured)

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.bins)


@dataclass(frozen=True)
class PowerAngularSpectrum:
    link_id: str
    plane: Plane
    resolution_deg: float
    cuts: Tuple[ElevationCut, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "plane", Plane(self.plane))
        cuts = tuple(sorted(self.cuts, key=lambda c: c.zenith_deg))
        n = grid_size(self.resolution_deg)
        if any(len(c.bins) != n for c in cuts):
            raise PASError(f"every cut must have {n} bins at {self.resolution_deg} deg resolution")
        object.__setattr__(self, "cuts", cuts)

    @property
    def n_bins(self) -> int:
        return grid_size(self.resolution_deg)

    def azimuths(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.resolution_deg

    def peak_power(self) -> float:
        present = [c.bins[c.present] for c in self.cuts]
        values = np.concatenate(present) if present else np.empty(0)
        if values.size == 0:
            raise PASError("PAS has no present bins")
        return float(values.max())

    def to_dict(self) -> dict:
        return {
            "link_id": self.link_id,
            "plane": self.plane.value,
            "resolution_deg": self.resolution_deg,
            "cuts": [
                {
                    "zenith_deg": c.zenith_deg,
                    "bins": [None if math.isnan(v) else float(v) for v in c.bins],
                    "measured": [bool(m) for m in c.measured],
                }
                for c in self.cuts
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PowerAngularSpectrum":
        cuts = tuple(
            ElevationCut(
                float(c["zenith_deg"]),
                np.array([np.nan if v is None else v for v in c["bins"]], dtype=float),
                np.array(c["measured"], dtype=bool),
            )
            for c in d["cuts"]
        )
        return cls(d["link_id"], Plane(d["plane"]), float(d["resolution_deg"]), cuts)


def grid_size(resolution_deg: float) -> int:
    if not resolution_deg > 0:
        raise PASError("resolution must be positive")
    n = int(round(360.0 / resolution_deg))
    if n < 1 or abs(n * resolution_deg - 360.0) > 1e-9:
        raise PASError(f"resolution {resolution_deg} deg does not divide 360")
    return n


def _interpolate_cut(bins: np.ndarray, measured: np.ndarray) -> np.ndarray:
    """Fill bins between circularly adjacent measured bins that both carry power."""
    out = bins.copy()
    n = len(bins)
    idx = np.flatnonzero(measured)
    if len(idx) < 2:
        return out
    for k, i in enumerate(idx):
        j = idx[(k + 1) % len(idx)]
        gap = (j - i) % n
        if gap <= 1 or np.isnan(bins[i]) or np.isnan(bins[j]):
            continue
        frac = np.arange(1, gap) / gap
        out[(i + np.arange(1, gap)) % n] = bins[i] + (bins[j] - bins[i]) * frac
    return out


def synthesize_pas(
    records: Sequence[DirectionalRecord],
    plane: Plane,
    resolution_deg: float = 1.0,
) -> PowerAngularSpectrum:
    """Build a gridded, gain-removed PAS for one link.

    Records must already be unique per pointing direction on ``plane`` (see
    :func:`collapse_to_plane`). Each elevation cut is interpolated along
    azimuth independently, in linear power.
    """
    plane = Plane(plane)
    if not records:
        raise PASError("no records to synthesize")
    links = {r.link_id for r in records}
    freqs = {r.frequency_ghz for r in records}
    if len(links) != 1 or len(freqs) != 1:
        raise PASError("records must share one link_id and frequency")
    if all(r.power_dbm is None for r in records):
        raise PASError("all records are below the noise floor")

    n = grid_size(resolution_deg)
    cuts: Dict[float, Tuple[np.ndarray, np.ndarray]] = {}
    for rec in records:
        rec = remove_antenna_gain(rec)
        d = rec.pointing(plane)
        bins, measured = cuts.setdefault(d.zenith_deg, (np.full(n, np.nan), np.zeros(n, dtype=bool)))
        i = int(math.floor(d.azimuth_deg / resolution_deg + 0.5)) % n
        if measured[i]:
            raise PASError(
                f"duplicate record for {plane.value} direction az={d.azimuth_deg} zen={d.zenith_deg} "
                f"(grid bin {i})"
            )
        measured[i] = True
        if rec.power_dbm is not None:
            bins[i] = db_to_linear(rec.power_dbm)

    return PowerAngularSpectrum(
        link_id=next(iter(links)),
        plane=plane,
        resolution_deg=resolution_deg,
        cuts=tuple(
            ElevationCut(z, _interpolate_cut(bins, measured), measured) for z, (bins, measured) in cuts.items()
        ),
    )


def measured_records(pas: PowerAngularSpectrum, frequency_ghz: float, condition) -> List[DirectionalRecord]:
    """Records for the measured bins of ``pas`` (the other side's angles set to boresight)."""
    out = []
    for cut in pas.cuts:
        for i in np.flatnonzero(cut.measured):
            p = cut.bins[i]
            dbm = None if np.isnan(p) else linear_to_db(float(p))
            az = float(i * pas.resolution_deg)
            if pas.plane is Plane.AOA:
                angles = (0.0, 90.0, az, cut.zenith_deg)
            else:
                angles = (az, cut.zenith_deg, 0.0, 90.0)
            out.append(DirectionalRecord(pas.link_id, frequency_ghz, condition, *angles, dbm))
    return out


def total_omni_power(pas_set: Sequence[PowerAngularSpectrum]) -> float:
    """Linear sum (mW) of all measured, present bins across cuts; interpolated bins excluded."""
    if not pas_set:
        raise PASError("no PAS given")
    total = 0.0
    found = False
    for pas in pas_set:
        for cut in pas.cuts:
            sel = cut.measured & cut.present
            if sel.any():
                found = True
                total += float(cut.bins[sel].sum())
    if not found:
        raise PASError("no measured bins with power")
    return total
