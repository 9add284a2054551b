from __future__ import annotations

import csv
import filecmp
import json
from pathlib import Path

import pytest

from angspread import io
from angspread.cli import main
from angspread.core import RECORD_FIELDS, Metric, Scope

GOLDEN = Path(__file__).parent / "data" / "golden"


def run(*argv):
    return main([str(a) for a in argv])


def env_file(tmp_path, subpaths, freq=6.75, cond="LOS"):
    p = tmp_path / "env.json"
    p.write_text(json.dumps({"frequency_ghz": freq, "condition": cond, "subpaths": subpaths}))
    return p


def summary_file(tmp_path, rows, name="summary.csv"):
    p = tmp_path / name
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "scope", "condition", "frequency_ghz", "mu_lg", "sigma_lg"])
        w.writerows(rows)
    return p


def test_simulate_then_stats_single_subpath(tmp_path, capsys):
    env = env_file(tmp_path, [{"power_mw": 1e-6, "aod_deg": 30, "aoa_deg": 210}])
    assert run("simulate", "--input", env, "--output-dir", tmp_path / "sim", "--hpbw-az", 30, "--hpbw-el", 30) == 0
    assert (tmp_path / "sim" / "records.csv").read_text().splitlines()[0] == ",".join(RECORD_FIELDS)
    assert run("stats", "--input", tmp_path / "sim" / "records.csv", "--output-dir", tmp_path / "st") == 0
    lobes = io.lobes_from_json(io.read_json(tmp_path / "st" / "lobes.json"))
    assert [len(planes[p]) for _, _, _, planes in lobes for p in planes] == [1, 1]
    values = io.read_as_values(tmp_path / "st" / "as_values.csv")
    omni = {v.metric: v.value_deg for _, _, v in values if v.scope is Scope.OMNI}
    assert set(omni) == set(Metric)
    assert omni[Metric.ASA] <= 30.0
    assert "metric" in capsys.readouterr().out


def test_simulate_requires_hpbw(tmp_path, capsys):
    env = env_file(tmp_path, [{"power_mw": 1e-6, "aod_deg": 30, "aoa_deg": 210}])
    assert run("simulate", "--input", env, "--output-dir", tmp_path) == 2
    assert "hpbw" in capsys.readouterr().err


def test_golden_dataset_is_byte_identical(tmp_path):
    assert run("stats", "--input", GOLDEN / "records.csv", "--output-dir", tmp_path) == 0
    expected = sorted(p.name for p in (GOLDEN / "expected").iterdir())
    assert sorted(p.name for p in tmp_path.iterdir()) == expected
    for name in expected:
        assert filecmp.cmp(tmp_path / name, GOLDEN / "expected" / name, shallow=False), name


def test_outputs_round_trip(tmp_path):
    assert run("stats", "--input", GOLDEN / "records.csv", "--output-dir", tmp_path) == 0
    summaries = io.read_summary(tmp_path / "summary.csv")
    assert summaries == io.read_summary(GOLDEN / "expected" / "summary.csv")
    values = io.read_as_values(tmp_path / "as_values.csv")
    assert run("cdf", "--input", tmp_path / "as_values.csv", "--output-dir", tmp_path / "c") == 0
    for m in Metric:
        assert filecmp.cmp(tmp_path / f"cdf_{m.value}.csv", tmp_path / "c" / f"cdf_{m.value}.csv", shallow=False)
    assert len(values) > 0


def test_stats_from_lobes_json_matches_records(tmp_path):
    assert run("stats", "--input", GOLDEN / "expected" / "lobes.json", "--output-dir", tmp_path) == 0
    assert filecmp.cmp(tmp_path / "summary.csv", GOLDEN / "expected" / "summary.csv", shallow=False)


def test_stats_json_format(tmp_path):
    assert run("stats", "--input", GOLDEN / "records.csv", "--output-dir", tmp_path, "--format", "json") == 0
    assert io.read_summary(tmp_path / "summary.json") == io.read_summary(GOLDEN / "expected" / "summary.csv")


def test_stats_frequency_filter(tmp_path):
    assert run("stats", "--input", GOLDEN / "records.csv", "--output-dir", tmp_path, "--frequency", 16.95) == 0
    assert {s.frequency_ghz for s in io.read_summary(tmp_path / "summary.csv")} == {16.95}


@pytest.mark.parametrize("content", ["", ",".join(RECORD_FIELDS) + "\n"])
def test_stats_empty_input_fails(tmp_path, capsys, content):
    p = tmp_path / "empty.csv"
    p.write_text(content)
    assert run("stats", "--input", p, "--output-dir", tmp_path / "o") == 2
    assert "error:" in capsys.readouterr().err


def test_stats_empty_lobe_json_fails(tmp_path):
    p = tmp_path / "lobes.json"
    p.write_text('{"links": []}')
    assert run("stats", "--input", p, "--output-dir", tmp_path / "o") == 2


def test_missing_input_fails(tmp_path, capsys):
    assert run("stats", "--input", tmp_path / "nope.csv") == 2
    assert "not found" in capsys.readouterr().err
    assert run("stats") == 2


def test_compare3gpp_published_rows(tmp_path):
    p = summary_file(tmp_path, [["ZSA", "omni", "NLOS", 6.75, 1.01, 0.29], ["ASA", "lobe", "LOS", 6.75, 1.02, 0.15]])
    assert run("compare3gpp", "--input", p, "--output-dir", tmp_path) == 0
    (row,) = list(csv.DictReader((tmp_path / "comparison.csv").open()))
    assert float(row["delta_deg"]) == pytest.approx(18.54, abs=0.05)


@pytest.mark.xfail(strict=True, reason="model-side sigma 0.2257 rounds to 0.23, not the tabulated 0.22")
def test_compare3gpp_asa_los(tmp_path):
    p = summary_file(tmp_path, [["ASA", "omni", "LOS", 6.75, 1.54, 0.39]])
    assert run("compare3gpp", "--input", p, "--output-dir", tmp_path) == 0
    (row,) = list(csv.DictReader((tmp_path / "comparison.csv").open()))
    assert float(row["delta_deg"]) == pytest.approx(1.76, abs=0.05)


def test_compare3gpp_identical_is_zero(tmp_path):
    from angspread.tgpp import tgpp_as_params

    mu, sigma = tgpp_as_params(16.95, Metric.ZSD, "NLOS")
    p = summary_file(tmp_path, [["ZSD", "omni", "NLOS", 16.95, mu, sigma]])
    assert run("compare3gpp", "--input", p, "--output-dir", tmp_path, "--format", "json") == 0
    (row,) = io.read_json(tmp_path / "comparison.json")
    assert row["delta_deg"] == 0.0


def test_compare3gpp_frequency_range(tmp_path, capsys):
    p = summary_file(tmp_path, [["ASA", "omni", "LOS", 140.0, 1.0, 0.1]])
    assert run("compare3gpp", "--input", p, "--output-dir", tmp_path) == 2
    assert "outside" in capsys.readouterr().err


def test_ensemble_sigma_zero_then_stats(tmp_path):
    out = tmp_path / "ens"
    assert run("ensemble", "--n-links", 5, "--target", "ASA", 1.5, 0, "--target", "ZSA", 1.0, 0,
               "--condition", "NLOS", "--frequency", 6.75, "--output-dir", out) == 0
    assert run("stats", "--input", out / "records.csv", "--output-dir", tmp_path / "st") == 0
    omni = {s.metric: s for s in io.read_summary(tmp_path / "st" / "summary.csv") if s.scope is Scope.OMNI}
    assert omni[Metric.ASA].sigma_lg == pytest.approx(0.0, abs=1e-9)
    assert omni[Metric.ZSA].sigma_lg == pytest.approx(0.0, abs=1e-9)
    assert omni[Metric.ASA].mu_lg == pytest.approx(1.5, abs=1e-9)


def test_ensemble_same_seed_identical_files(tmp_path):
    args = ["ensemble", "--n-links", 8, "--target", "ASD", 1.6, 0.2, "--condition", "LOS", "--frequency", 16.95,
            "--seed", 4]
    assert run(*args, "--output-dir", tmp_path / "a") == 0
    assert run(*args, "--output-dir", tmp_path / "b") == 0
    for name in ("lobes.json", "records.csv", "targets.csv"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)


def test_ensemble_missing_arguments(tmp_path, capsys):
    assert run("ensemble", "--n-links", 3, "--output-dir", tmp_path) == 2
    assert "required" in capsys.readouterr().err
    assert run("ensemble", "--n-links", 1, "--target", "XYZ", 1, 0, "--condition", "LOS", "--frequency", 6.75,
               "--output-dir", tmp_path) == 2


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"input": str(GOLDEN / "records.csv"), "output_dir": str(tmp_path / "from_cfg"),
                               "format": "json", "frequency": 6.75}))
    assert run("stats", "--config", cfg, "--format", "csv") == 0
    summaries = io.read_summary(tmp_path / "from_cfg" / "summary.csv")
    assert {s.frequency_ghz for s in summaries} == {6.75}
    assert not (tmp_path / "from_cfg" / "summary.json").exists()


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"input": str(GOLDEN / "records.csv"), "thresold_db": 5}))
    assert run("stats", "--config", cfg, "--output-dir", tmp_path) == 2
    assert "thresold_db" in capsys.readouterr().err


def test_threshold_flag_changes_lobes(tmp_path):
    assert run("stats", "--input", GOLDEN / "records.csv", "--output-dir", tmp_path / "t3", "--threshold-db", 3) == 0
    tight = io.lobes_from_json(io.read_json(tmp_path / "t3" / "lobes.json"))
    loose = io.lobes_from_json(io.read_json(GOLDEN / "expected" / "lobes.json"))
    count = lambda links: sum(len(v) for *_, planes in links for v in planes.values())
    n_members = lambda links: sum(len(lb.members) for *_, planes in links for v in planes.values() for lb in v)
    assert n_members(tight) < n_members(loose)
    assert count(tight) >= 1


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "angspread", "cdf", "--input", str(tmp_path / "x.csv")],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "error:" in proc.stderr
