"""Digital twin of a rotating-horn channel sounder measurement procedure.

Given ground-truth multipath and horn antenna models, produce the
:class:`DirectionalRecord` stream the sounder would log. A one-degree search
finds the strongest TX/RX pointing. A rapid TX azimuth scan then picks the
significant departure directions, and each of them gets HPBW-stepped RX
azimuth sweeps over several elevation cuts and TX tilts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .core import (
    Condition,
    DirectionalRecord,
    Direction,
    Subpath,
    circular_distance,
    db_to_linear,
    linear_to_db,
)

# antenna gains listed for the two measured bands; HPBW has no such default
HORN_GAIN_DBI = {6.75: 15.0, 16.95: 20.0}


@dataclass(frozen=True)
class AntennaModel:
    """Horn with a Gaussian main lobe and a flat sidelobe floor."""

    boresight_gain_dbi: float
    hpbw_az_deg: float
    hpbw_el_deg: float
    sidelobe_floor_db: float = 30.0

    def __post_init__(self) -> None:
        if not (self.hpbw_az_deg > 0 and self.hpbw_el_deg > 0):
            raise ValueError("HPBW must be positive")
        if not self.sidelobe_floor_db > 0:
            raise ValueError("sidelobe floor must be a positive dB value below boresight")


@dataclass(frozen=True)
class SyntheticEnvironment:
    truth_subpaths: Tuple[Subpath, ...]
    frequency_ghz: float
    condition: Condition
    noise_floor_dbm: float = -100.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "truth_subpaths", tuple(self.truth_subpaths))
        object.__setattr__(self, "condition", Condition(self.condition))
        if not math.isfinite(self.noise_floor_dbm):
            raise ValueError("noise floor must be finite")
        if not self.frequency_ghz > 0:
            raise ValueError("frequency must be positive")


@dataclass(frozen=True)
class SweepConfig:
    """Procedure settings.

    Elevation steps are in units of the antenna elevation HPBW; positive steps
    tilt up (smaller zenith angle). ``rx_elevation_steps_tilted`` applies to
    the sweeps made with the TX tilted away from its boresight cut.
    """

    search_step_deg: float = 1.0
    rx_elevation_steps: Tuple[int, ...] = (0, 1, -1)
    tx_tilt_steps: Tuple[int, ...] = (0, -1)
    rx_elevation_steps_tilted: Tuple[int, ...] = (0, -1)
    significance_margin_db: float = 20.0

    def __post_init__(self) -> None:
        for name in ("rx_elevation_steps", "tx_tilt_steps", "rx_elevation_steps_tilted"):
            object.__setattr__(self, name, tuple(int(s) for s in getattr(self, name)))
        if not self.tx_tilt_steps or not self.rx_elevation_steps:
            raise ValueError("need at least one TX tilt and one RX elevation cut")
        steps = 360.0 / self.search_step_deg
        if not self.search_step_deg > 0 or abs(steps - round(steps)) > 1e-9:
            raise ValueError("search step must divide 360 degrees")
        if self.significance_margin_db < 0:
            raise ValueError("significance margin must be >= 0 dB")


def azimuth_steps(hpbw_deg: float) -> Tuple[int, float]:
    """Number of HPBW-sized azimuth steps in a full turn and the exact step.

    The step is stretched or shrunk so that a whole number of steps covers
    360 degrees.
    """
    n = max(1, int(round(360.0 / hpbw_deg)))
    return n, 360.0 / n


def antenna_gain_db(offset_az: float, offset_el: float, model: AntennaModel) -> float:
    loss = 12.0 * ((offset_az / model.hpbw_az_deg) ** 2 + (offset_el / model.hpbw_el_deg) ** 2)
    return model.boresight_gain_dbi - min(loss, model.sidelobe_floor_db)


def _gain_linear(subpath_dirs: np.ndarray, pointing: Direction, model: AntennaModel) -> np.ndarray:
    # subpath_dirs: (n, 2) azimuth, zenith
    d_az = np.array([circular_distance(a, pointing.azimuth_deg) for a in subpath_dirs[:, 0]])
    d_el = subpath_dirs[:, 1] - pointing.zenith_deg
    loss = 12.0 * ((d_az / model.hpbw_az_deg) ** 2 + (d_el / model.hpbw_el_deg) ** 2)
    return 10.0 ** ((model.boresight_gain_dbi - np.minimum(loss, model.sidelobe_floor_db)) / 10.0)


def measure_direction(
    env: SyntheticEnvironment,
    tx_dir: Direction,
    rx_dir: Direction,
    tx_ant: AntennaModel,
    rx_ant: AntennaModel,
    link_id: str = "sim",
) -> DirectionalRecord:
    """Non-coherent received power for one TX/RX pointing pair."""
    power_mw = 0.0
    if env.truth_subpaths:
        p = np.array([sp.power_linear for sp in env.truth_subpaths])
        dep = np.array([(sp.departure.azimuth_deg, sp.departure.zenith_deg) for sp in env.truth_subpaths])
        arr = np.array([(sp.arrival.azimuth_deg, sp.arrival.zenith_deg) for sp in env.truth_subpaths])
        # fsum is exactly rounded, so subpath order cannot change the result
        power_mw = math.fsum(p * _gain_linear(dep, tx_dir, tx_ant) * _gain_linear(arr, rx_dir, rx_ant))
    dbm = linear_to_db(power_mw) if power_mw > db_to_linear(env.noise_floor_dbm) else None
    return DirectionalRecord(
        link_id,
        env.frequency_ghz,
        env.condition,
        tx_dir.azimuth_deg,
        tx_dir.zenith_deg,
        rx_dir.azimuth_deg,
        rx_dir.zenith_deg,
        dbm,
        tx_ant.boresight_gain_dbi,
        rx_ant.boresight_gain_dbi,
    )


@dataclass
class ProcedureResult:
    search: List[DirectionalRecord]
    rapid_scan: List[DirectionalRecord]
    sweeps: List[DirectionalRecord]
    strongest_tx: Direction
    strongest_rx: Direction
    aods: List[float] = field(default_factory=list)

    @property
    def records(self) -> List[DirectionalRecord]:
        return self.search + self.rapid_scan + self.sweeps

    @property
    def analysis_records(self) -> List[DirectionalRecord]:
        """Records that feed PAS synthesis (rapid scan and sweeps)."""
        return self.rapid_scan + self.sweeps


def _power_key(rec: DirectionalRecord) -> float:
    return -math.inf if rec.power_dbm is None else rec.power_dbm


def _best(records: Sequence[DirectionalRecord]) -> DirectionalRecord:
    # first maximum wins, which keeps ties deterministic
    best = records[0]
    for r in records[1:]:
        if _power_key(r) > _power_key(best):
            best = r
    return best


def _clamp_zenith(z: float) -> float:
    return min(180.0, max(0.0, z))


def _canonical(records: List[DirectionalRecord]) -> List[DirectionalRecord]:
    return sorted(records, key=lambda r: (r.tx_el_deg, r.tx_az_deg, r.rx_el_deg, r.rx_az_deg))


def run_procedure(
    env: SyntheticEnvironment,
    config: SweepConfig,
    tx_ant: AntennaModel,
    rx_ant: AntennaModel,
    link_id: str = "sim",
) -> ProcedureResult:
    """Simulate one TX-RX location's full measurement.

    The strongest-direction search runs once (coordinate ascent over TX
    azimuth, RX azimuth, RX zenith, TX zenith, then both azimuths again) and
    is reused for every TX tilt.
    """

    def measure(tx: Direction, rx: Direction) -> DirectionalRecord:
        return measure_direction(env, tx, rx, tx_ant, rx_ant, link_id)

    step = config.search_step_deg
    az_grid = np.arange(int(round(360.0 / step))) * step
    zen_grid = np.arange(0.0, 180.0 + 1e-9, step)

    search: List[DirectionalRecord] = []

    tx = Direction(0.0, 90.0)
    rx = Direction(0.0, 90.0)
    for phase in ("tx_az", "rx_az", "rx_zen", "tx_zen", "tx_az", "rx_az"):
        if phase == "tx_az":
            best = _scan(search, measure, [(Direction(a, tx.zenith_deg), rx) for a in az_grid])
            tx = Direction(best.tx_az_deg, best.tx_el_deg)
        elif phase == "rx_az":
            best = _scan(search, measure, [(tx, Direction(a, rx.zenith_deg)) for a in az_grid])
            rx = Direction(best.rx_az_deg, best.rx_el_deg)
        elif phase == "rx_zen":
            best = _scan(search, measure, [(tx, Direction(rx.azimuth_deg, z)) for z in zen_grid])
            rx = Direction(best.rx_az_deg, best.rx_el_deg)
        else:
            best = _scan(search, measure, [(Direction(tx.azimuth_deg, z), rx) for z in zen_grid])
            tx = Direction(best.tx_az_deg, best.tx_el_deg)

    n_tx, tx_step = azimuth_steps(tx_ant.hpbw_az_deg)
    rapid = [measure(Direction(tx.azimuth_deg + k * tx_step, tx.zenith_deg), rx) for k in range(n_tx)]
    strongest = _power_key(_best(rapid))
    aods = [r.tx_az_deg for r in rapid if r.power_dbm is not None
            and r.power_dbm >= strongest - config.significance_margin_db]
    if not aods:
        aods = [tx.azimuth_deg]

    n_rx, rx_step = azimuth_steps(rx_ant.hpbw_az_deg)
    sweeps = []
    for tilt in config.tx_tilt_steps:
        tx_zen = _clamp_zenith(tx.zenith_deg - tilt * tx_ant.hpbw_el_deg)
        cuts = config.rx_elevation_steps if tilt == 0 else config.rx_elevation_steps_tilted
        for aod in aods:
            for cut in cuts:
                rx_zen = _clamp_zenith(rx.zenith_deg - cut * rx_ant.hpbw_el_deg)
                for k in range(n_rx):
                    sweeps.append(measure(Direction(aod, tx_zen), Direction(rx.azimuth_deg + k * rx_step, rx_zen)))

    return ProcedureResult(
        search=search,
        rapid_scan=_canonical(rapid),
        sweeps=_canonical(sweeps),
        strongest_tx=tx,
        strongest_rx=rx,
        aods=sorted(aods),
    )


def _scan(log: List[DirectionalRecord], measure, pointings) -> DirectionalRecord:
    recs = [measure(t, r) for t, r in pointings]
    log.extend(recs)
    return _best(recs)
