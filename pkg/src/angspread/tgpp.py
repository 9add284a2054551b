"""3GPP TR 38.901 InH-Office angular spread model.

Coefficients live in ``data/tr38901_inh_office.csv``; each parameter is
``a * log10(1 + fc_GHz) + b`` (``a = 0`` for frequency-constant cells).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from .core import Condition, Metric, Scope
from .stats import LogNormalSummary, lognormal_expectation_deg

FC_MIN_GHZ = 0.5
FC_MAX_GHZ = 100.0
#: Published comparison tables carry mu/sigma to two decimals
TABLE_DECIMALS = 2


class FrequencyRangeError(ValueError):
    pass


@dataclass(frozen=True)
class TgppCoefficients:
    metric: Metric
    condition: Condition
    mu_a: float
    mu_b: float
    sigma_a: float
    sigma_b: float
    source: str = ""

    def evaluate(self, fc_ghz: float) -> Tuple[float, float]:
        x = math.log10(1.0 + fc_ghz)
        return self.mu_a * x + self.mu_b, self.sigma_a * x + self.sigma_b


class TgppParamTable:
    def __init__(self, entries: Dict[Tuple[Metric, Condition], TgppCoefficients], version: str = ""):
        self.entries = dict(entries)
        self.version = version

    @classmethod
    def parse(cls, text: str) -> "TgppParamTable":
        version = ""
        body = []
        for line in text.splitlines():
            if line.startswith("#"):
                if "version:" in line:
                    version = line.split("version:", 1)[1].strip()
                continue
            if line.strip():
                body.append(line)
        entries = {}
        for row in csv.DictReader(io.StringIO("\n".join(body))):
            c = TgppCoefficients(
                Metric(row["metric"]),
                Condition(row["condition"]),
                float(row["mu_a"]),
                float(row["mu_b"]),
                float(row["sigma_a"]),
                float(row["sigma_b"]),
                row.get("source", ""),
            )
            key = (c.metric, c.condition)
            if key in entries:
                raise ValueError(f"duplicate coefficient row for {c.metric.value} {c.condition.value}")
            entries[key] = c
        return cls(entries, version)

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> "TgppParamTable":
        if path is None:
            text = resources.files("angspread").joinpath("data/tr38901_inh_office.csv").read_text()
        else:
            text = Path(path).read_text()
        return cls.parse(text)

    def params(self, fc_ghz: float, metric: Metric, condition: Condition) -> Tuple[float, float]:
        check_frequency(fc_ghz)
        key = (Metric(metric), Condition(condition))
        if key not in self.entries:
            raise KeyError(f"no 3GPP coefficients for {key[0].value} {key[1].value}")
        return self.entries[key].evaluate(fc_ghz)


@lru_cache(maxsize=1)
def default_table() -> TgppParamTable:
    return TgppParamTable.load()


def check_frequency(fc_ghz: float) -> None:
    if not (math.isfinite(fc_ghz) and FC_MIN_GHZ <= fc_ghz <= FC_MAX_GHZ):
        raise FrequencyRangeError(f"carrier {fc_ghz} GHz outside the model range [{FC_MIN_GHZ}, {FC_MAX_GHZ}] GHz")


def tgpp_as_params(
    fc_ghz: float, metric: Metric, condition: Condition, table: Optional[TgppParamTable] = None
) -> Tuple[float, float]:
    """Unrounded ``(mu_lg, sigma_lg)`` of the InH-Office model at ``fc_ghz``."""
    return (table or default_table()).params(fc_ghz, metric, condition)


def tgpp_expectation_deg(
    fc_ghz: float,
    metric: Metric,
    condition: Condition,
    decimals: Optional[int] = TABLE_DECIMALS,
    table: Optional[TgppParamTable] = None,
) -> float:
    """Log-normal expectation of the model spread in degrees.

    By default mu and sigma are rounded to ``decimals`` first, which is how
    the published comparison tables derive their degree values. Pass
    ``decimals=None`` for the unrounded model.
    """
    mu, sigma = tgpp_as_params(fc_ghz, metric, condition, table)
    if decimals is not None:
        mu, sigma = round(mu, decimals), round(sigma, decimals)
    return lognormal_expectation_deg(mu, sigma)


def compare_measured_vs_tgpp(
    measured: LogNormalSummary,
    fc_ghz: float,
    decimals: Optional[int] = TABLE_DECIMALS,
    table: Optional[TgppParamTable] = None,
) -> float:
    """Absolute difference in degrees between measured and model expectations.

    ``decimals`` rounds both sides' mu/sigma before taking expectations.
    """
    if measured.scope is not Scope.OMNI:
        raise ValueError("the 3GPP model only describes omnidirectional spreads")
    if not math.isclose(measured.frequency_ghz, fc_ghz, rel_tol=0, abs_tol=1e-9):
        raise ValueError(f"summary is for {measured.frequency_ghz} GHz, not {fc_ghz} GHz")
    return abs(measured_expectation_deg(measured, decimals) -
               tgpp_expectation_deg(fc_ghz, measured.metric, measured.condition, decimals, table))


def measured_expectation_deg(measured: LogNormalSummary, decimals: Optional[int] = TABLE_DECIMALS) -> float:
    mu, sigma = measured.mu_lg, measured.sigma_lg
    if decimals is not None:
        mu, sigma = round(mu, decimals), round(sigma, decimals)
    return lognormal_expectation_deg(mu, sigma)
