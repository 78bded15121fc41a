"""Outage scan: monitored vs recomputed angles, flags, ratio statistics."""

import math

import numpy as np
import pytest

from areaangle import (
    AreaSpec,
    Bus,
    DegenerateAreaError,
    Line,
    Network,
    ValidationError,
    apply_outage,
    monitored_angle,
    partition_area,
    ratio_statistics,
    recomputed_angle,
    reduce_area,
    scan_outages,
    solve_angles,
    generate_case,
)
from test_network import small_net

# hand-derived five-bus expectations, one row per outage
FIVE_BUS_EXPECTED = {
    1: (9.0 / 4.0, 19.0 / 9.0, 900.0 / 19.0),
    2: (9.0 / 4.0, 19.0 / 9.0, 900.0 / 19.0),
    3: (9.0 / 4.0, 19.0 / 9.0, 900.0 / 19.0),
    4: (9.0 / 4.0, 19.0 / 9.0, 900.0 / 19.0),
    5: (61.0 / 30.0, 35.0 / 18.0, 360.0 / 7.0),
    6: (61.0 / 30.0, 35.0 / 18.0, 360.0 / 7.0),
    7: (79.0 / 30.0, 5.0 / 2.0, 40.0),
    8: (79.0 / 30.0, 5.0 / 2.0, 40.0),
}


def test_five_bus_scan_values(five_bus_net, five_bus_part, five_bus_base):
    results = scan_outages(five_bus_net, five_bus_part, five_bus_base)
    assert [r.line_id for r in results] == list(range(1, 9))
    for res in results:
        mon, rec, b_post = FIVE_BUS_EXPECTED[res.line_id]
        assert not res.islanding and not res.degenerate
        assert res.evaluated
        assert res.theta_monitored == pytest.approx(mon, abs=1e-9)
        assert res.theta_recomputed == pytest.approx(rec, abs=1e-9)
        assert res.b_area_post == pytest.approx(b_post, abs=1e-9)
        assert res.p_area_post == pytest.approx(100.0, abs=1e-9)
        assert res.ratio == pytest.approx(mon / rec, abs=1e-9)
        assert res.note is None


def test_five_bus_ratio_statistics(five_bus_net, five_bus_part, five_bus_base):
    results = scan_outages(five_bus_net, five_bus_part, five_bus_base)
    stats = ratio_statistics(results)
    assert stats.count == 8
    assert stats.mean == pytest.approx(1.05765664160401, abs=1e-11)
    assert stats.std_dev == pytest.approx(0.008567332926436482, abs=1e-11)
    assert stats.minimum == pytest.approx(1.0457142857142856, abs=1e-12)
    assert stats.maximum == pytest.approx(1.0657894736842104, abs=1e-12)


def test_scan_computes_base_when_not_given(five_bus_net, five_bus_part, five_bus_base):
    explicit = scan_outages(five_bus_net, five_bus_part, five_bus_base)
    implicit = scan_outages(five_bus_net, five_bus_part)
    for a, b in zip(explicit, implicit):
        assert a.line_id == b.line_id
        assert a.theta_monitored == b.theta_monitored
        assert a.ratio == b.ratio


def test_three_parallel_closed_form(three_parallel):
    net, part = three_parallel
    results = scan_outages(net, part)
    by_id = {r.line_id: r for r in results}
    assert by_id[3].theta_monitored == pytest.approx(2.0, abs=1e-12)
    assert by_id[3].theta_recomputed == pytest.approx(2.0, abs=1e-12)
    assert by_id[3].b_area_post == pytest.approx(2.0, abs=1e-12)
    assert by_id[3].ratio == pytest.approx(1.0, abs=1e-12)
    assert by_id[1].theta_recomputed == pytest.approx(4.0 / 3.0, abs=1e-12)
    assert by_id[1].b_area_post == pytest.approx(3.0, abs=1e-12)


def spur_case():
    """Five-bus fixture plus a radial bus 6 hanging inside the area."""
    net = Network(
        buses=(
            Bus(1, injection=50.0), Bus(2, injection=50.0), Bus(3),
            Bus(4, injection=-20.0), Bus(5, injection=-80.0),
            Bus(6, injection=0.0),
        ),
        lines=(
            Line(1, 1, 3, 30.0), Line(2, 1, 3, 30.0),
            Line(3, 2, 3, 30.0), Line(4, 2, 3, 30.0),
            Line(5, 3, 4, 10.0), Line(6, 3, 4, 10.0),
            Line(7, 3, 5, 40.0), Line(8, 3, 5, 40.0),
            Line(9, 3, 6, 12.0),
        ),
        slack_bus=3,
    )
    spec = AreaSpec(area_buses=[1, 2, 3, 4, 5, 6], side_a=[1, 2], side_b=[4, 5])
    return net, partition_area(net, spec)


def test_islanding_outage_is_flagged_without_numbers():
    net, part = spur_case()
    results = scan_outages(net, part)
    by_id = {r.line_id: r for r in results}
    spur = by_id[9]
    assert spur.islanding
    for field in ("theta_monitored", "theta_recomputed", "b_area_post",
                  "p_area_post", "ratio", "severity"):
        assert getattr(spur, field) is None
    # the rest of the scan is unaffected
    assert by_id[7].theta_recomputed == pytest.approx(2.5, abs=1e-9)


def degenerate_case():
    """Single internal line whose loss splits the area but not the network."""
    lines = [
        Line(1, 1, 2, 5.0),
        Line(2, 1, 3, 2.0),
        Line(3, 3, 2, 2.0),
    ]
    net = small_net(lines, slack=3, injections={1: 3.0, 2: -3.0})
    spec = AreaSpec(area_buses=[1, 2], side_a=[1], side_b=[2])
    return net, partition_area(net, spec)


def test_degenerate_outage_is_flagged_without_numbers():
    net, part = degenerate_case()
    results = scan_outages(net, part)
    assert len(results) == 1
    res = results[0]
    assert res.degenerate and not res.islanding
    assert res.theta_monitored is None
    assert res.ratio is None


def test_recomputed_angle_raises_on_split_area():
    net, part = degenerate_case()
    post = apply_outage(net, 1)
    with pytest.raises(DegenerateAreaError, match="disconnected after the outage"):
        recomputed_angle(post, part, solve_angles(post))


def test_monitored_angle_checks_length():
    with pytest.raises(ValidationError, match="border angles"):
        monitored_angle([0.5, 0.5], [1.0, 2.0, 3.0])


def test_zero_power_area_has_undefined_ratio():
    # dead-end area: no power crosses it, so every angle is zero
    lines = [
        Line(1, 1, 2, 4.0),
        Line(2, 1, 2, 6.0),
        Line(3, 3, 1, 2.0),
        Line(4, 3, 4, 2.0),
    ]
    net = small_net(lines, slack=3, injections={3: 5.0, 4: -5.0})
    spec = AreaSpec(area_buses=[1, 2], side_a=[1], side_b=[2])
    part = partition_area(net, spec)
    results = scan_outages(net, part)
    for res in results:
        assert res.evaluated
        assert res.ratio is None
        assert "ratio undefined" in res.note
        assert res.theta_monitored == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError, match="no evaluated outages"):
        ratio_statistics(results)


def test_parallel_twins_give_identical_results(five_bus_net, five_bus_part):
    results = scan_outages(five_bus_net, five_bus_part)
    by_id = {r.line_id: r for r in results}
    for a, b in ((1, 2), (3, 4), (5, 6), (7, 8)):
        assert by_id[a].theta_monitored == pytest.approx(by_id[b].theta_monitored, abs=1e-12)
        assert by_id[a].b_area_post == pytest.approx(by_id[b].b_area_post, abs=1e-12)


def test_outage_never_raises_susceptance(five_bus_base, five_bus_net, five_bus_part):
    results = scan_outages(five_bus_net, five_bus_part, five_bus_base)
    for res in results:
        assert res.b_area_post <= five_bus_base.susceptance + 1e-9


def test_fast_and_slow_paths_agree():
    for seed, kwargs in (
        (4, dict(buses=24, topology="mesh")),
        (9, dict(buses=36, topology="ladder", paths=3)),
        (2, dict(buses=40, topology="bypass", paths=4, extra_lines=10)),
    ):
        net, spec = generate_case(seed, **kwargs)
        part = partition_area(net, spec)
        base = reduce_area(net, part, solve_angles(net))
        fast = scan_outages(net, part, base, fast_path=True)
        slow = scan_outages(net, part, base, fast_path=False)
        assert [r.line_id for r in fast] == [r.line_id for r in slow]
        for f, s in zip(fast, slow):
            assert f.islanding == s.islanding and f.degenerate == s.degenerate
            if not f.evaluated:
                continue
            assert f.theta_monitored == pytest.approx(s.theta_monitored, abs=1e-9)
            assert f.theta_recomputed == pytest.approx(s.theta_recomputed, abs=1e-9)
            assert f.b_area_post == pytest.approx(s.b_area_post, abs=1e-9)
            assert f.p_area_post == pytest.approx(s.p_area_post, abs=1e-9)


def test_worker_count_does_not_change_results():
    net, spec = generate_case(31, buses=45, topology="ladder", paths=4)
    part = partition_area(net, spec)
    base = reduce_area(net, part, solve_angles(net))
    serial = scan_outages(net, part, base, jobs=1)
    threaded = scan_outages(net, part, base, jobs=4)
    assert len(serial) == len(threaded)
    for a, b in zip(serial, threaded):
        assert a.line_id == b.line_id
        assert a.islanding == b.islanding
        # bitwise identical, not merely close
        assert a.theta_monitored == b.theta_monitored
        assert a.theta_recomputed == b.theta_recomputed
        assert a.b_area_post == b.b_area_post
        assert a.ratio == b.ratio


def test_scan_matches_definitional_recomputation():
    """Every scanned number must equal the one-outage-at-a-time pipeline."""
    checked = 0
    for seed in (3, 14, 25):
        net, spec = generate_case(seed, buses=30)
        part = partition_area(net, spec)
        base = reduce_area(net, part, solve_angles(net))
        for res in scan_outages(net, part, base):
            if not res.evaluated:
                continue
            post = apply_outage(net, res.line_id)
            sol_post = solve_angles(post)
            mon = monitored_angle(base.weights, sol_post.select(part.border))
            rec, b_post, p_post = recomputed_angle(post, part, sol_post)
            assert res.theta_monitored == pytest.approx(mon, abs=1e-9)
            assert res.theta_recomputed == pytest.approx(rec, abs=1e-9)
            assert res.b_area_post == pytest.approx(b_post, abs=1e-9)
            assert res.p_area_post == pytest.approx(p_post, abs=1e-9)
            checked += 1
    assert checked > 10
