"""Domain types and angle / power-unit helpers shared by every module.

Angle conventions
-----------------
* Azimuths are degrees in ``[0, 360)``. The zero reference is arbitrary but
  must be consistent within a data set; no module subtracts azimuths directly,
  all circular arithmetic goes through :func:`wrap_azimuth` and
  :func:`circular_distance`.
* Zenith angles are degrees in ``[0, 180]`` with 90 meaning the horizon
  (antenna boresight elevation). The ``*_el_deg`` columns of the record CSV
  carry zenith angles in this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple


class Condition(str, Enum):
    LOS = "LOS"
    NLOS = "NLOS"


class Plane(str, Enum):
    """Side of the link a power angular spectrum describes."""

    AOA = "AOA"
    AOD = "AOD"


class Metric(str, Enum):
    ASA = "ASA"
    ASD = "ASD"
    ZSA = "ZSA"
    ZSD = "ZSD"

    @property
    def plane(self) -> Plane:
        return Plane.AOA if self in (Metric.ASA, Metric.ZSA) else Plane.AOD

    @property
    def is_zenith(self) -> bool:
        return self in (Metric.ZSA, Metric.ZSD)


class Scope(str, Enum):
    OMNI = "omni"
    LOBE = "lobe"


def _require_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite value: {v!r}")


def wrap_azimuth(x: float) -> float:
    """Wrap an azimuth in degrees into ``[0, 360)``."""
    _require_finite(x)
    w = math.fmod(x, 360.0)
    if w < 0.0:
        w += 360.0
    # fmod of a tiny negative number can round up to exactly 360
    if w >= 360.0:
        w = 0.0
    return w


def circular_distance(a: float, b: float) -> float:
    """Smallest absolute angular separation between two azimuths, in ``[0, 180]``."""
    _require_finite(a, b)
    d = math.fmod(abs(a - b), 360.0)
    return min(d, 360.0 - d)


def db_to_linear(p_db: float) -> float:
    _require_finite(p_db)
    return 10.0 ** (p_db / 10.0)


def linear_to_db(p: float) -> float:
    _require_finite(p)
    if p <= 0.0:
        raise ValueError(f"linear power must be positive, got {p!r}")
    return 10.0 * math.log10(p)


def validate_zenith(z: float) -> float:
    _require_finite(z)
    if not 0.0 <= z <= 180.0:
        raise ValueError(f"zenith angle {z!r} outside [0, 180] degrees")
    return float(z)


@dataclass(frozen=True)
class Direction:
    """A pointing direction; the azimuth is wrapped on construction."""

    azimuth_deg: float
    zenith_deg: float = 90.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "azimuth_deg", wrap_azimuth(self.azimuth_deg))
        object.__setattr__(self, "zenith_deg", validate_zenith(self.zenith_deg))


@dataclass(frozen=True)
class Subpath:
    """One multipath component of a double-directional impulse response.

    ``amplitude`` is the linear voltage magnitude, so the component power in
    mW is ``amplitude ** 2``.
    """

    amplitude: float
    phase_rad: float
    delay_ns: float
    departure: Direction
    arrival: Direction

    def __post_init__(self) -> None:
        _require_finite(self.amplitude, self.phase_rad, self.delay_ns)
        if self.amplitude < 0:
            raise ValueError("subpath amplitude must be >= 0")
        if self.delay_ns < 0:
            raise ValueError("subpath delay must be >= 0")

    @property
    def power_linear(self) -> float:
        return self.amplitude * self.amplitude

    @classmethod
    def from_power(
        cls,
        power_mw: float,
        departure: Direction,
        arrival: Direction,
        delay_ns: float = 0.0,
        phase_rad: float = 0.0,
    ) -> "Subpath":
        if power_mw < 0:
            raise ValueError("subpath power must be >= 0")
        return cls(math.sqrt(power_mw), phase_rad, delay_ns, departure, arrival)


@dataclass(frozen=True)
class TimeCluster:
    subpaths: Tuple[Subpath, ...]

    def __post_init__(self) -> None:
        subpaths = tuple(self.subpaths)
        if not subpaths:
            raise ValueError("a time cluster needs at least one subpath")
        delays = [sp.delay_ns for sp in subpaths]
        if any(b < a for a, b in zip(delays, delays[1:])):
            raise ValueError("time cluster subpaths must be ordered by delay")
        object.__setattr__(self, "subpaths", subpaths)


@dataclass(frozen=True)
class DoubleDirectionalCIR:
    clusters: Tuple[TimeCluster, ...]
    frequency_ghz: float
    condition: Condition
    link_id: str = ""

    def __post_init__(self) -> None:
        clusters = tuple(self.clusters)
        if not clusters:
            raise ValueError("a channel impulse response needs at least one cluster")
        if not self.frequency_ghz > 0:
            raise ValueError("frequency must be positive")
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "condition", Condition(self.condition))

    @property
    def subpaths(self) -> Tuple[Subpath, ...]:
        return tuple(sp for tc in self.clusters for sp in tc.subpaths)


@dataclass(frozen=True)
class DirectionalRecord:
    """Power received for one TX/RX antenna pointing pair.

    ``power_dbm`` is ``None`` when the dwell was below the noise floor.
    """

    link_id: str
    frequency_ghz: float
    condition: Condition
    tx_az_deg: float
    tx_el_deg: float
    rx_az_deg: float
    rx_el_deg: float
    power_dbm: Optional[float]
    tx_gain_dbi: float = 0.0
    rx_gain_dbi: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "condition", Condition(self.condition))
        object.__setattr__(self, "tx_az_deg", wrap_azimuth(self.tx_az_deg))
        object.__setattr__(self, "rx_az_deg", wrap_azimuth(self.rx_az_deg))
        validate_zenith(self.tx_el_deg)
        validate_zenith(self.rx_el_deg)
        _require_finite(self.frequency_ghz, self.tx_gain_dbi, self.rx_gain_dbi)
        if not self.frequency_ghz > 0:
            raise ValueError("frequency must be positive")
        if self.power_dbm is not None:
            _require_finite(self.power_dbm)

    @property
    def below_noise(self) -> bool:
        return self.power_dbm is None

    @property
    def power_mw(self) -> Optional[float]:
        return None if self.power_dbm is None else db_to_linear(self.power_dbm)

    def pointing(self, plane: Plane) -> Direction:
        if Plane(plane) is Plane.AOA:
            return Direction(self.rx_az_deg, self.rx_el_deg)
        return Direction(self.tx_az_deg, self.tx_el_deg)


RECORD_FIELDS: Sequence[str] = (
    "link_id",
    "frequency_ghz",
    "condition",
    "tx_az_deg",
    "tx_el_deg",
    "rx_az_deg",
    "rx_el_deg",
    "power_dbm",
    "tx_gain_dbi",
    "rx_gain_dbi",
)
