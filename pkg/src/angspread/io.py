"""File formats: record CSV, lobe JSON, environment JSON and report tables.

Floats are written with ``repr`` so machine-readable outputs keep full
precision and round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .core import (
    RECORD_FIELDS,
    Condition,
    DirectionalRecord,
    Direction,
    Metric,
    Plane,
    Scope,
    Subpath,
    db_to_linear,
    validate_zenith,
)
from .lobes import SpatialLobe
from .stats import ASValue, LogNormalSummary

log = logging.getLogger(__name__)

PathLike = Union[str, Path]

SUMMARY_FIELDS = ("metric", "scope", "condition", "frequency_ghz", "mu_lg", "sigma_lg", "expectation_deg", "n_samples")
AS_FIELDS = ("link_id", "frequency_ghz", "condition", "metric", "scope", "lobe_index", "value_deg")
CDF_FIELDS = ("metric", "scope", "condition", "frequency_ghz", "value_deg", "probability")
COMPARISON_FIELDS = (
    "metric",
    "condition",
    "frequency_ghz",
    "mu_lg",
    "sigma_lg",
    "tgpp_mu_lg",
    "tgpp_sigma_lg",
    "expectation_deg",
    "tgpp_expectation_deg",
    "delta_deg",
)


class SchemaError(ValueError):
    """Header or structure of an input file does not match its format."""


class RecordError(ValueError):
    """A data row failed validation; the message carries row and column."""

    def __init__(self, path: PathLike, row: int, column: str, reason: str):
        super().__init__(f"{path}: row {row}, column {column!r}: {reason}")
        self.row = row
        self.column = column


def fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def _read_table(path: PathLike, fields: Sequence[str]) -> Tuple[List[dict], int]:
    """Rows of a CSV whose header must hold exactly ``fields``; also the first data line number."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if not header:
            raise SchemaError(f"{path}: empty file")
        missing = [f for f in fields if f not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s): {', '.join(missing)}")
        extra = [f for f in header if f not in fields]
        if extra:
            raise SchemaError(f"{path}: unknown column(s): {', '.join(extra)}")
        rows = list(reader)
    for i, row in enumerate(rows, start=2):
        if None in row or any(v is None for v in row.values()):
            raise SchemaError(f"{path}: row {i} has the wrong number of fields")
    return rows, 2


def write_table(path: PathLike, fields: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        w.writerows(rows)


def _float(path, row_no, row, column, allow_empty=False) -> Optional[float]:
    text = row[column].strip()
    if text == "" and allow_empty:
        return None
    try:
        value = float(text)
    except ValueError:
        raise RecordError(path, row_no, column, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise RecordError(path, row_no, column, f"not finite: {text!r}")
    return value


def read_records(path: PathLike) -> List[DirectionalRecord]:
    """Validated records from a record CSV, in file order.

    Azimuths outside ``[0, 360)`` are wrapped with a warning; every other
    violation raises :class:`RecordError` naming the row and column.
    """
    rows, first = _read_table(path, RECORD_FIELDS)
    if not rows:
        raise SchemaError(f"{path}: no records")
    out = []
    for row_no, row in enumerate(rows, start=first):
        link_id = row["link_id"].strip()
        if not link_id:
            raise RecordError(path, row_no, "link_id", "empty link id")
        try:
            condition = Condition(row["condition"].strip())
        except ValueError:
            raise RecordError(path, row_no, "condition", f"expected LOS or NLOS, got {row['condition']!r}") from None
        freq = _float(path, row_no, row, "frequency_ghz")
        if not freq > 0:
            raise RecordError(path, row_no, "frequency_ghz", "must be positive")
        angles = {}
        for col in ("tx_az_deg", "tx_el_deg", "rx_az_deg", "rx_el_deg"):
            v = _float(path, row_no, row, col)
            if col.endswith("_az_deg") and not 0.0 <= v < 360.0:
                log.warning("%s: row %d, column %r: azimuth %s wrapped into [0, 360)", path, row_no, col, v)
            if col.endswith("_el_deg"):
                try:
                    validate_zenith(v)
                except ValueError as exc:
                    raise RecordError(path, row_no, col, str(exc)) from None
            angles[col] = v
        out.append(
            DirectionalRecord(
                link_id,
                freq,
                condition,
                angles["tx_az_deg"],
                angles["tx_el_deg"],
                angles["rx_az_deg"],
                angles["rx_el_deg"],
                _float(path, row_no, row, "power_dbm", allow_empty=True),
                _float(path, row_no, row, "tx_gain_dbi"),
                _float(path, row_no, row, "rx_gain_dbi"),
            )
        )
    return out


def write_records(path: PathLike, records: Iterable[DirectionalRecord]) -> None:
    write_table(
        path,
        RECORD_FIELDS,
        (
            (
                r.link_id,
                fmt(r.frequency_ghz),
                r.condition.value,
                fmt(r.tx_az_deg),
                fmt(r.tx_el_deg),
                fmt(r.rx_az_deg),
                fmt(r.rx_el_deg),
                fmt(r.power_dbm),
                fmt(r.tx_gain_dbi),
                fmt(r.rx_gain_dbi),
            )
            for r in records
        ),
    )


def group_by_link(records: Iterable[DirectionalRecord]) -> Dict[str, List[DirectionalRecord]]:
    """Records per link id, links in first-appearance order."""
    groups: Dict[str, List[DirectionalRecord]] = {}
    for r in records:
        groups.setdefault(r.link_id, []).append(r)
    return groups


# lobe JSON: {"links": [{"link_id", "frequency_ghz", "condition", "planes": {"AOA": [lobe, ...], ...}}]}


def lobes_to_json(links: Sequence[Tuple[str, float, Condition, Mapping[Plane, Sequence[SpatialLobe]]]]) -> dict:
    return {
        "links": [
            {
                "link_id": link_id,
                "frequency_ghz": freq,
                "condition": Condition(cond).value,
                "planes": {Plane(p).value: [lb.to_dict() for lb in lobes] for p, lobes in sorted(planes.items())},
            }
            for link_id, freq, cond, planes in links
        ]
    }


def lobes_from_json(doc: dict) -> List[Tuple[str, float, Condition, Dict[Plane, List[SpatialLobe]]]]:
    if not isinstance(doc, dict) or "links" not in doc:
        raise SchemaError("lobe JSON must be an object with a 'links' list")
    out = []
    for i, entry in enumerate(doc["links"]):
        try:
            link_id = str(entry["link_id"])
            planes = {
                Plane(p): [SpatialLobe.from_dict(d, link_id=link_id, plane=Plane(p)) for d in lobes]
                for p, lobes in entry["planes"].items()
            }
            out.append((link_id, float(entry["frequency_ghz"]), Condition(entry["condition"]), planes))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"lobe JSON link entry {i}: {exc}") from None
    return out


def write_json(path: PathLike, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def read_json(path: PathLike):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None


def environment_from_json(doc: dict):
    """Ground-truth environment for the sounder simulator.

    Layout: ``{"frequency_ghz", "condition", "noise_floor_dbm"?, "subpaths":
    [{"power_mw" | "power_dbm", "aod_deg", "zod_deg"?, "aoa_deg", "zoa_deg"?,
    "delay_ns"?}]}``; zenith angles default to 90.
    """
    from .sounder import SyntheticEnvironment

    allowed = {"frequency_ghz", "condition", "noise_floor_dbm", "subpaths", "link_id"}
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(f"environment JSON: unknown key(s): {', '.join(sorted(unknown))}")
    subpaths = []
    sp_keys = {"power_mw", "power_dbm", "aod_deg", "zod_deg", "aoa_deg", "zoa_deg", "delay_ns"}
    for i, sp in enumerate(doc.get("subpaths", [])):
        try:
            extra = set(sp) - sp_keys
            if extra:
                raise ValueError(f"unknown key(s): {', '.join(sorted(extra))}")
            if ("power_dbm" in sp) == ("power_mw" in sp):
                raise ValueError("give exactly one of power_dbm and power_mw")
            p = db_to_linear(float(sp["power_dbm"])) if "power_dbm" in sp else float(sp["power_mw"])
            subpaths.append(
                Subpath.from_power(
                    p,
                    Direction(float(sp["aod_deg"]), float(sp.get("zod_deg", 90.0))),
                    Direction(float(sp["aoa_deg"]), float(sp.get("zoa_deg", 90.0))),
                    delay_ns=float(sp.get("delay_ns", 0.0)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"environment JSON subpath {i}: {exc}") from None
    try:
        return SyntheticEnvironment(
            tuple(subpaths),
            float(doc["frequency_ghz"]),
            Condition(doc["condition"]),
            float(doc.get("noise_floor_dbm", -100.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"environment JSON: {exc}") from None


def _summary_row(s: LogNormalSummary) -> Tuple[str, ...]:
    return (
        s.metric.value,
        s.scope.value,
        s.condition.value,
        fmt(s.frequency_ghz),
        fmt(s.mu_lg),
        fmt(s.sigma_lg),
        fmt(s.expectation_deg),
        str(s.n_samples),
    )


def write_summary(path: PathLike, summaries: Sequence[LogNormalSummary], fmt_name: str = "csv") -> None:
    if fmt_name == "json":
        write_json(path, [dict(zip(SUMMARY_FIELDS, _typed(_summary_row(s), SUMMARY_FIELDS))) for s in summaries])
    else:
        write_table(path, SUMMARY_FIELDS, (_summary_row(s) for s in summaries))


def _typed(row: Sequence[str], fields: Sequence[str]) -> list:
    text = {"metric", "scope", "condition", "link_id"}
    out = []
    for f, v in zip(fields, row):
        if f in text:
            out.append(v)
        elif v == "":
            out.append(None)
        elif f in ("n_samples", "lobe_index"):
            out.append(int(v))
        else:
            out.append(float(v))
    return out


def read_summary(path: PathLike) -> List[LogNormalSummary]:
    """Summaries from a summary CSV or JSON; ``expectation_deg`` and ``n_samples`` are optional."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        rows = read_json(path)
        if not isinstance(rows, list):
            raise SchemaError(f"{path}: expected a list of summary rows")
        first = 1
    else:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            required = SUMMARY_FIELDS[:6]
            missing = [f for f in required if f not in header]
            if missing:
                raise SchemaError(f"{path}: missing column(s): {', '.join(missing)}")
            extra = [f for f in header if f not in SUMMARY_FIELDS]
            if extra:
                raise SchemaError(f"{path}: unknown column(s): {', '.join(extra)}")
            rows = list(reader)
        first = 2
    out = []
    for row_no, row in enumerate(rows, start=first):
        try:
            n = row.get("n_samples")
            out.append(
                LogNormalSummary(
                    Metric(row["metric"]),
                    Condition(row["condition"]),
                    Scope(row["scope"]),
                    float(row["frequency_ghz"]),
                    float(row["mu_lg"]),
                    float(row["sigma_lg"]),
                    int(n) if n not in (None, "") else 0,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: row {row_no}: {exc}") from None
    if not out:
        raise SchemaError(f"{path}: no summary rows")
    return out


def write_as_values(
    path: PathLike, values: Sequence[Tuple[float, Condition, ASValue]], fmt_name: str = "csv"
) -> None:
    rows = [
        (
            v.link_id,
            fmt(freq),
            Condition(cond).value,
            v.metric.value,
            v.scope.value,
            "" if v.lobe_index is None else str(v.lobe_index),
            fmt(v.value_deg),
        )
        for freq, cond, v in values
    ]
    if fmt_name == "json":
        write_json(path, [dict(zip(AS_FIELDS, _typed(r, AS_FIELDS))) for r in rows])
    else:
        write_table(path, AS_FIELDS, rows)


def read_as_values(path: PathLike) -> List[Tuple[float, Condition, ASValue]]:
    rows, first = _read_table(path, AS_FIELDS)
    out = []
    for row_no, row in enumerate(rows, start=first):
        try:
            idx = row["lobe_index"].strip()
            out.append(
                (
                    float(row["frequency_ghz"]),
                    Condition(row["condition"]),
                    ASValue(
                        Metric(row["metric"]),
                        Scope(row["scope"]),
                        float(row["value_deg"]),
                        row["link_id"],
                        int(idx) if idx else None,
                    ),
                )
            )
        except ValueError as exc:
            raise SchemaError(f"{path}: row {row_no}: {exc}") from None
    return out


def write_cdf(
    path: PathLike, metric: Metric, scope: Scope, condition: Condition, frequency_ghz: float,
    cdf: Sequence[Tuple[float, float]], append: bool = False,
) -> None:
    mode = "a" if append else "w"
    with Path(path).open(mode, newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if not append:
            w.writerow(CDF_FIELDS)
        for v, p in cdf:
            w.writerow((metric.value, scope.value, condition.value, fmt(frequency_ghz), fmt(v), fmt(p)))


def write_comparison(path: PathLike, rows: Sequence[Mapping[str, object]], fmt_name: str = "csv") -> None:
    if fmt_name == "json":
        write_json(path, [dict(r) for r in rows])
    else:
        write_table(
            path,
            COMPARISON_FIELDS,
            ([r[f] if isinstance(r[f], str) else fmt(r[f]) for f in COMPARISON_FIELDS] for r in rows),
        )
