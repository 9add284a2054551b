"""Regenerate the frozen golden dataset (run only when the output format changes on purpose)."""

from __future__ import annotations

import tempfile
from pathlib import Path

from angspread import io
from angspread.cli import main

HERE = Path(__file__).parent / "golden"

ENVS = [
    ("g1", 6.75, "LOS", [(1e-6, 40, 90, 120, 90), (2e-7, 40, 90, 250, 85), (5e-8, 100, 95, 10, 90)]),
    ("g2", 6.75, "NLOS", [(3e-7, 10, 90, 300, 92), (2e-7, 10, 90, 330, 90), (1e-7, 190, 88, 60, 90)]),
    ("g3", 16.95, "LOS", [(1e-6, 200, 90, 20, 90), (1e-7, 200, 90, 140, 90)]),
    ("g4", 16.95, "NLOS", [(4e-7, 300, 92, 180, 90), (3e-7, 300, 92, 230, 95), (2e-7, 300, 92, 90, 90)]),
    ("g5", 6.75, "LOS", [(1e-6, 0, 90, 180, 90), (4e-7, 0, 90, 200, 60), (2e-7, 330, 90, 90, 120)]),
    ("g6", 6.75, "NLOS", [(5e-7, 120, 90, 45, 90), (4e-7, 150, 90, 45, 60), (3e-7, 120, 90, 300, 90)]),
    ("g7", 16.95, "LOS", [(1e-6, 80, 90, 260, 90), (3e-7, 80, 60, 100, 90), (1e-7, 80, 90, 350, 120)]),
    ("g8", 16.95, "NLOS", [(3e-7, 220, 90, 15, 90), (3e-7, 250, 90, 75, 60), (2e-7, 220, 90, 200, 90)]),
]


def build() -> None:
    HERE.mkdir(exist_ok=True)
    records = []
    with tempfile.TemporaryDirectory() as tmp:
        for link_id, freq, cond, paths in ENVS:
            env = {
                "link_id": link_id,
                "frequency_ghz": freq,
                "condition": cond,
                "subpaths": [
                    {"power_mw": p, "aod_deg": a, "zod_deg": z, "aoa_deg": b, "zoa_deg": y}
                    for p, a, z, b, y in paths
                ],
            }
            src = Path(tmp) / f"{link_id}.json"
            io.write_json(src, env)
            out = Path(tmp) / link_id
            assert main(["simulate", "--input", str(src), "--output-dir", str(out),
                         "--hpbw-az", "30", "--hpbw-el", "30"]) == 0
            records += io.read_records(out / "records.csv")
    io.write_records(HERE / "records.csv", records)
    assert main(["stats", "--input", str(HERE / "records.csv"), "--output-dir", str(HERE / "expected")]) == 0


if __name__ == "__main__":
    build()
