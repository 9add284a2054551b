"""Command-line entry point: ``angspread {stats,compare3gpp,simulate,ensemble,cdf}``.

Settings come from flags, then an optional ``--config`` JSON file, then
defaults. Unknown config keys are errors. Exit status is 0 on success and 2
on any reported error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import io
from .core import Condition, Metric, Scope
from .ensemble import EnsembleError, EnsembleSpec, generate_ensemble, link_records
from .lobes import DEFAULT_THRESHOLD_DB
from .pipeline import analyze_lobe_sets, analyze_records, cdfs, flatten, summarize_values
from .sounder import HORN_GAIN_DBI, AntennaModel, SweepConfig, run_procedure
from .tgpp import FrequencyRangeError, check_frequency, compare_measured_vs_tgpp, measured_expectation_deg
from .tgpp import tgpp_as_params, tgpp_expectation_deg

log = logging.getLogger("angspread")

DEFAULTS = {
    "input": None,
    "output_dir": ".",
    "frequency": None,
    "threshold_db": DEFAULT_THRESHOLD_DB,
    "resolution_deg": 1.0,
    "seed": 0,
    "format": "csv",
    # simulate
    "hpbw_az": None,
    "hpbw_el": None,
    "tx_gain": None,
    "rx_gain": None,
    "link_id": "sim",
    # ensemble
    "n_links": None,
    "target": None,
    "condition": None,
    "lobe_count_min": 2,
    "lobe_count_max": 4,
}


class ConfigError(ValueError):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of settings (flags override it)")
    p.add_argument("--input", help="input file")
    p.add_argument("--output-dir", help="directory for output files (default: current)")
    p.add_argument("--frequency", type=float, help="carrier frequency in GHz")
    p.add_argument("--threshold-db", type=float, help="spatial lobe threshold below the PAS peak (default 10)")
    p.add_argument("--resolution-deg", type=float, help="PAS azimuth grid step (default 1)")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--format", choices=("csv", "json"), help="report format (default csv)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="angspread", description="RMS angular spread statistics toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="records CSV or lobe JSON -> spreads, log-normal summary and CDFs")
    _common(p)

    p = sub.add_parser("compare3gpp", help="summary -> comparison with the 3GPP InH-Office model")
    _common(p)

    p = sub.add_parser("simulate", help="environment JSON -> simulated sounder records")
    _common(p)
    p.add_argument("--hpbw-az", type=float, help="horn azimuth HPBW in degrees (required)")
    p.add_argument("--hpbw-el", type=float, help="horn elevation HPBW in degrees (required)")
    p.add_argument("--tx-gain", type=float, help="TX horn gain in dBi (default by frequency)")
    p.add_argument("--rx-gain", type=float, help="RX horn gain in dBi (default by frequency)")
    p.add_argument("--link-id", help="link id for the records (default 'sim')")

    p = sub.add_parser("ensemble", help="generate a synthetic link ensemble")
    _common(p)
    p.add_argument("--n-links", type=int, help="number of links (required)")
    p.add_argument(
        "--target",
        nargs=3,
        action="append",
        metavar=("METRIC", "MU", "SIGMA"),
        help="log-normal target for ASA, ASD, ZSA or ZSD; repeat per metric",
    )
    p.add_argument("--condition", choices=[c.value for c in Condition], help="LOS or NLOS (required)")
    p.add_argument("--lobe-count-min", type=int, help="fewest lobes per side (default 2)")
    p.add_argument("--lobe-count-max", type=int, help="most lobes per side (default 4)")

    p = sub.add_parser("cdf", help="per-link spread CSV -> empirical CDFs")
    _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> Dict[str, object]:
    """Merge flags over the config file over defaults."""
    cfg = dict(DEFAULTS)
    if args.config:
        doc = io.read_json(args.config)
        if not isinstance(doc, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
        unknown = sorted(set(doc) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"{args.config}: unknown config key(s): {', '.join(unknown)}")
        cfg.update(doc)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg['format']!r}")
    return cfg


def _require_input(cfg) -> Path:
    if not cfg["input"]:
        raise ConfigError("--input is required")
    path = Path(cfg["input"])
    if not path.is_file():
        raise ConfigError(f"input file not found: {path}")
    return path


def _output_dir(cfg) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def _write_cdfs(out: Path, values, frequency) -> List[Path]:
    written: Dict[Metric, Path] = {}
    for (cond, freq, metric, scope), cdf in cdfs(values, frequency).items():
        path = out / f"cdf_{metric.value}.csv"
        io.write_cdf(path, metric, scope, cond, freq, cdf, append=metric in written)
        written[metric] = path
    return list(written.values())


def cmd_stats(cfg) -> int:
    path = _require_input(cfg)
    if path.suffix.lower() == ".json":
        results = analyze_lobe_sets(io.lobes_from_json(io.read_json(path)))
        out = _output_dir(cfg)
    else:
        results = analyze_records(io.read_records(path), float(cfg["threshold_db"]), float(cfg["resolution_deg"]))
        out = _output_dir(cfg)
        io.write_json(out / "lobes.json", io.lobes_to_json([(r.link_id, r.frequency_ghz, r.condition, r.lobes)
                                                            for r in results]))
    values = flatten(results)
    freq = cfg["frequency"]
    if freq is not None:
        values = [v for v in values if v[0] == freq]
        if not values:
            raise ConfigError(f"no links at {freq} GHz")
    summaries = summarize_values(values)
    ext = cfg["format"]
    io.write_summary(out / f"summary.{ext}", summaries, ext)
    io.write_as_values(out / f"as_values.{ext}", values, ext)
    _write_cdfs(out, values, None)
    print(
        _table(
            ["metric", "scope", "cond", "f_GHz", "mu_lg", "sigma_lg", "E_deg", "n"],
            [
                [s.metric.value, s.scope.value, s.condition.value, f"{s.frequency_ghz:.2f}", f"{s.mu_lg:.2f}",
                 f"{s.sigma_lg:.2f}", f"{s.expectation_deg:.2f}", str(s.n_samples)]
                for s in summaries
            ],
        )
    )
    return 0


def comparison_rows(summaries, frequency: Optional[float] = None) -> List[dict]:
    """Comparison rows for the omni summaries (lobe rows have no 3GPP counterpart)."""
    rows = []
    for s in summaries:
        if frequency is not None and s.frequency_ghz != frequency:
            continue
        if s.scope is not Scope.OMNI:
            log.info("skipping %s %s %s row: 3GPP has no per-lobe spreads", s.metric.value, s.scope.value,
                     s.condition.value)
            continue
        check_frequency(s.frequency_ghz)
        mu_3, sigma_3 = tgpp_as_params(s.frequency_ghz, s.metric, s.condition)
        rows.append(
            {
                "metric": s.metric.value,
                "condition": s.condition.value,
                "frequency_ghz": s.frequency_ghz,
                "mu_lg": s.mu_lg,
                "sigma_lg": s.sigma_lg,
                "tgpp_mu_lg": mu_3,
                "tgpp_sigma_lg": sigma_3,
                "expectation_deg": measured_expectation_deg(s),
                "tgpp_expectation_deg": tgpp_expectation_deg(s.frequency_ghz, s.metric, s.condition),
                "delta_deg": compare_measured_vs_tgpp(s, s.frequency_ghz),
            }
        )
    return rows


def cmd_compare3gpp(cfg) -> int:
    path = _require_input(cfg)
    if cfg["frequency"] is not None:
        check_frequency(float(cfg["frequency"]))
    rows = comparison_rows(io.read_summary(path), cfg["frequency"])
    if not rows:
        raise ConfigError("no omni summary rows to compare")
    out = _output_dir(cfg)
    ext = cfg["format"]
    io.write_comparison(out / f"comparison.{ext}", rows, ext)
    print(
        _table(
            ["metric", "cond", "f_GHz", "E_meas", "E_3gpp", "|delta|"],
            [
                [r["metric"], r["condition"], f"{r['frequency_ghz']:.2f}", f"{r['expectation_deg']:.2f}",
                 f"{r['tgpp_expectation_deg']:.2f}", f"{r['delta_deg']:.2f}"]
                for r in rows
            ],
        )
    )
    return 0


def _default_gain(freq: float, given) -> float:
    if given is not None:
        return float(given)
    for f, g in HORN_GAIN_DBI.items():
        if abs(f - freq) < 1e-9:
            return g
    raise ConfigError(f"no default horn gain at {freq} GHz; pass --tx-gain and --rx-gain")


def cmd_simulate(cfg) -> int:
    path = _require_input(cfg)
    if cfg["hpbw_az"] is None or cfg["hpbw_el"] is None:
        raise ConfigError("--hpbw-az and --hpbw-el are required")
    doc = io.read_json(path)
    env = io.environment_from_json(doc)
    link_id = str(doc.get("link_id", cfg["link_id"]))
    if cfg["frequency"] is not None and cfg["frequency"] != env.frequency_ghz:
        raise ConfigError(f"--frequency {cfg['frequency']} disagrees with the environment ({env.frequency_ghz} GHz)")
    f = env.frequency_ghz
    tx = AntennaModel(_default_gain(f, cfg["tx_gain"]), float(cfg["hpbw_az"]), float(cfg["hpbw_el"]))
    rx = AntennaModel(_default_gain(f, cfg["rx_gain"]), float(cfg["hpbw_az"]), float(cfg["hpbw_el"]))
    result = run_procedure(env, SweepConfig(), tx, rx, link_id)
    out = _output_dir(cfg)
    io.write_records(out / "records.csv", result.analysis_records)
    io.write_records(out / "search.csv", result.search)
    print(f"{len(result.analysis_records)} records, {len(result.aods)} departure direction(s); "
          f"strongest TX az {result.strongest_tx.azimuth_deg:.2f}, RX az {result.strongest_rx.azimuth_deg:.2f}")
    return 0


def cmd_ensemble(cfg) -> int:
    if cfg["n_links"] is None or not cfg["target"] or cfg["condition"] is None or cfg["frequency"] is None:
        raise ConfigError("--n-links, --target, --condition and --frequency are required")
    targets = {}
    for metric, mu, sigma in cfg["target"]:
        try:
            targets[Metric(str(metric).upper())] = (float(mu), float(sigma))
        except ValueError as exc:
            raise ConfigError(f"bad --target {metric} {mu} {sigma}: {exc}") from None
    spec = EnsembleSpec(
        n_links=int(cfg["n_links"]),
        targets=targets,
        condition=Condition(cfg["condition"]),
        frequency_ghz=float(cfg["frequency"]),
        seed=int(cfg["seed"]),
        lobe_count_range=(int(cfg["lobe_count_min"]), int(cfg["lobe_count_max"])),
        resolution_deg=float(cfg["resolution_deg"]),
    )
    ds = generate_ensemble(spec)
    out = _output_dir(cfg)
    io.write_json(out / "lobes.json", io.lobes_to_json([(l.link_id, l.frequency_ghz, l.condition, l.lobes)
                                                        for l in ds.links]))
    io.write_records(out / "records.csv", [r for l in ds.links for r in link_records(l, spec.resolution_deg)])
    metrics = [m for m in Metric if m in targets]
    io.write_table(
        out / "targets.csv",
        ["link_id"] + [f"{m.value}_deg" for m in metrics],
        ([l.link_id] + [io.fmt(l.targets[m]) for m in metrics] for l in ds.links),
    )
    print(f"{len(ds.links)} links written to {out}")
    return 0


def cmd_cdf(cfg) -> int:
    path = _require_input(cfg)
    values = io.read_as_values(path)
    freq = cfg["frequency"]
    written = _write_cdfs(_output_dir(cfg), values, freq)
    if not written:
        raise ConfigError("no spread values to summarize")
    for p in written:
        print(p)
    return 0


COMMANDS = {
    "stats": cmd_stats,
    "compare3gpp": cmd_compare3gpp,
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "cdf": cmd_cdf,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ValueError, OSError, KeyError, EnsembleError, FrequencyRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
