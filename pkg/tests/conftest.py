"""Shared fixtures: the two hand-checked fixtures plus file paths."""

from pathlib import Path

import pytest

from areaangle import (
    AreaSpec,
    Bus,
    Line,
    Network,
    load_area_spec,
    load_case,
    partition_area,
    reduce_area,
    solve_angles,
)

DATA = Path(__file__).parent / "data"
FIVE_BUS_CASE = DATA / "five_bus_case.json"
FIVE_BUS_AREA = DATA / "five_bus_area.json"


@pytest.fixture(scope="session")
def five_bus_net():
    return load_case(FIVE_BUS_CASE)


@pytest.fixture(scope="session")
def five_bus_part(five_bus_net):
    spec = load_area_spec(FIVE_BUS_AREA, five_bus_net)
    return partition_area(five_bus_net, spec)


@pytest.fixture(scope="session")
def five_bus_sol(five_bus_net):
    return solve_angles(five_bus_net)


@pytest.fixture(scope="session")
def five_bus_base(five_bus_net, five_bus_part, five_bus_sol):
    return reduce_area(five_bus_net, five_bus_part, five_bus_sol)


def three_parallel_network() -> Network:
    """Two buses joined by three parallel lines, 4 pu transferred.

    Closed forms: base angle 1.0 rad, area susceptance 4 pu; dropping
    line 3 doubles the angle to 2.0 rad and halves the susceptance.
    """
    return Network(
        buses=(Bus(1, "send", 4.0), Bus(2, "recv", -4.0)),
        lines=(
            Line(1, 1, 2, susceptance=1.0, limit=5.0),
            Line(2, 1, 2, susceptance=1.0, limit=5.0),
            Line(3, 1, 2, susceptance=2.0, limit=8.0),
        ),
        slack_bus=2,
    )


@pytest.fixture()
def three_parallel():
    net = three_parallel_network()
    spec = AreaSpec(area_buses=[1, 2], side_a=[1], side_b=[2])
    part = partition_area(net, spec)
    return net, part
