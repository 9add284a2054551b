from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from angspread.core import Condition, Metric, Plane, Scope
from angspread.ensemble import (
    EnsembleError,
    EnsembleSpec,
    UnreachableTargetError,
    draw_as_target,
    generate_ensemble,
    generate_link,
    link_records,
)
from angspread.lobes import spatial_lobe_threshold
from angspread.pipeline import analyze_records, flatten, summarize_values
from angspread.stats import omni_as


def test_draw_sigma_zero_is_constant():
    rng = np.random.default_rng(0)
    assert {draw_as_target(rng, 1.3, 0.0) for _ in range(20)} == {10**1.3}
    assert draw_as_target(rng, 1.0, 0.0) == pytest.approx(10.0)


def test_draw_log_mean():
    rng = np.random.default_rng(7)
    draws = np.array([draw_as_target(rng, 1.54, 0.39) for _ in range(100_000)])
    assert abs(np.log10(draws).mean() - 1.54) <= 0.004


def test_draw_rejects_negative_sigma():
    with pytest.raises(ValueError):
        draw_as_target(np.random.default_rng(0), 1.0, -0.1)


def test_zero_target_single_lobe():
    (lobe,) = generate_link(np.random.default_rng(1), 0.0, 0.0, 1)
    assert len(lobe.members) == 1
    assert omni_as([lobe], Metric.ASA).value_deg == 0.0


def test_two_point_inversion():
    lobes = generate_link(np.random.default_rng(1), 47.71, 0.0, 2, members_range=(1, 1), power_spread_db=0.0)
    (a, _), (b, _) = lobes[0].members[0], lobes[1].members[0]
    assert abs((a - b + 180) % 360 - 180) == pytest.approx(90.0)
    assert omni_as(lobes, Metric.ASA).value_deg == pytest.approx(47.71, abs=0.1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.5, 90.0), st.floats(0.0, 30.0), st.integers(1, 4))
def test_postcondition_and_lobe_invariants(seed, az, zen, count):
    rng = np.random.default_rng(seed)
    try:
        lobes = generate_link(rng, az, zen, count)
    except UnreachableTargetError as exc:
        assert "deg" in str(exc) or "lobe" in str(exc)
        return
    assert len(lobes) == count
    assert omni_as(lobes, Metric.ASA).value_deg == pytest.approx(az, abs=0.1)
    assert omni_as(lobes, Metric.ZSA).value_deg == pytest.approx(zen, abs=0.1)
    assert [lb.lobe_index for lb in lobes] == list(range(count))
    peak = max(lb.peak_power_linear for lb in lobes)
    floor = peak * 10 ** (-1.0)
    for lb in lobes:
        assert all(p >= floor for _, p in lb.members)
        assert 0.0 <= lb.zenith_deg <= 180.0


def test_unreachable_target_names_bound():
    with pytest.raises(UnreachableTargetError, match="reachable range"):
        generate_link(np.random.default_rng(0), 150.0, 0.0, 1, members_range=(1, 2))


@pytest.mark.parametrize("kwargs", [dict(azimuth_target_deg=-1.0), dict(lobe_count=0)])
def test_generate_link_rejects_bad_input(kwargs):
    args = dict(azimuth_target_deg=10.0, zenith_target_deg=0.0, lobe_count=1, **{})
    args.update(kwargs)
    with pytest.raises(ValueError):
        generate_link(np.random.default_rng(0), **args)


def test_single_link_sigma_zero_is_exact():
    targets = {"ASA": (1.5, 0.0), "ZSA": (1.0, 0.0), "ASD": (1.7, 0.0), "ZSD": (0.9, 0.0)}
    ds = generate_ensemble(EnsembleSpec(1, targets, "LOS", 6.75, seed=3))
    (link,) = ds.links
    for m, (mu, _) in targets.items():
        metric = Metric(m)
        assert link.targets[metric] == 10**mu
        assert omni_as(link.lobes[metric.plane], metric).value_deg == pytest.approx(10**mu, abs=1e-9)


def test_same_seed_is_bit_identical():
    spec = EnsembleSpec(15, {"ASA": (1.54, 0.39), "ZSA": (1.21, 0.07)}, "LOS", 6.75, seed=11)
    a, b = generate_ensemble(spec), generate_ensemble(spec)
    assert [(l.targets, l.lobes) for l in a.links] == [(l.targets, l.lobes) for l in b.links]
    c = generate_ensemble(EnsembleSpec(15, spec.targets, "LOS", 6.75, seed=12))
    assert [l.targets for l in c.links] != [l.targets for l in a.links]


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(0, {"ASA": (1, 0)}, "LOS", 6.75)
    with pytest.raises(ValueError):
        EnsembleSpec(1, {"ASA": (1, -1)}, "LOS", 6.75)
    with pytest.raises(ValueError):
        EnsembleSpec(1, {"ASA": (1, 0)}, "LOS", 6.75, lobe_count_range=(3, 2))


def test_errors_carry_link_index():
    with pytest.raises(EnsembleError, match=r"^link 0:"):
        generate_ensemble(EnsembleSpec(1, {"ASA": (2.5, 0.0)}, "LOS", 6.75, lobe_count_range=(1, 1)))


def _pipeline(ds):
    records = [r for link in ds.links for r in link_records(link)]
    return analyze_records(records)


def test_link_records_reproduce_lobes():
    spec = EnsembleSpec(20, {"ASA": (1.4, 0.3), "ZSA": (1.0, 0.2), "ASD": (1.6, 0.2), "ZSD": (0.9, 0.1)},
                        "NLOS", 16.95, seed=5)
    ds = generate_ensemble(spec)
    for link, result in zip(ds.links, _pipeline(ds)):
        assert result.link_id == link.link_id
        for plane in Plane:
            got = {(a, lb.zenith_deg, p) for lb in result.lobes[plane] for a, p in lb.members}
            want = {(a, lb.zenith_deg, p) for lb in link.lobes[plane] for a, p in lb.members}
            assert {(a, z) for a, z, _ in got} == {(a, z) for a, z, _ in want}
            for m in (plane is Plane.AOA and (Metric.ASA, Metric.ZSA) or (Metric.ASD, Metric.ZSD)):
                v = next(x for x in result.values if x.metric is m and x.scope is Scope.OMNI)
                assert v.value_deg == pytest.approx(link.targets[m], abs=0.1)


def test_generated_lobes_survive_threshold():
    ds = generate_ensemble(EnsembleSpec(10, {"ASA": (1.7, 0.2)}, "LOS", 6.75, seed=2))
    for link, result in zip(ds.links, _pipeline(ds)):
        assert len(result.lobes[Plane.AOA]) == len(link.lobes[Plane.AOA])


def test_nlos_asa_round_trip_mean():
    ds = generate_ensemble(EnsembleSpec(500, {"ASA": (1.74, 0.22)}, "NLOS", 6.75, seed=0))
    (s,) = [x for x in summarize_values(flatten(_pipeline(ds))) if x.metric is Metric.ASA and x.scope is Scope.OMNI]
    assert s.n_samples == 500
    assert abs(s.mu_lg - 1.74) <= 0.03


def test_targets_above_estimable_bound_are_redrawn():
    from angspread.ensemble import MAX_TARGET_DEG

    ds = generate_ensemble(EnsembleSpec(40, {"ASA": (2.45, 0.3)}, "LOS", 6.75, seed=1))
    values = [link.targets[Metric.ASA] for link in ds.links]
    assert max(values) <= MAX_TARGET_DEG
    assert MAX_TARGET_DEG == pytest.approx(425.93, abs=0.01)
    with pytest.raises(EnsembleError, match="estimable"):
        generate_ensemble(EnsembleSpec(1, {"ASA": (2.7, 0.0)}, "LOS", 6.75))
