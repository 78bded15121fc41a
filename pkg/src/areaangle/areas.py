"""Area definitions and the border/interior partition.

An area is a set of buses watched as one block, with two declared sides:
side a where power enters under stress and side b where it leaves. The
partition splits the area into border buses (declared sides plus any
area bus touched by a tie line) and interior buses, and fixes the
canonical border ordering used by every downstream matrix: side-a buses
ascending, then the remaining border buses ascending.

A tie-incident border bus that was declared on neither side is folded
into the side-b group for weighting purposes: the side selector alone
drives the reduced-network formulas, and its zero entries are exactly
the non-side-a border buses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ParseError, ValidationError
from .network import Network, _connected, _read_source


@dataclass(frozen=True)
class AreaSpec:
    """Declared area: bus set plus the two monitored sides."""

    area_buses: frozenset[int]
    side_a: frozenset[int]
    side_b: frozenset[int]

    def __post_init__(self):
        for field in ("area_buses", "side_a", "side_b"):
            object.__setattr__(self, field, frozenset(getattr(self, field)))


@dataclass(frozen=True)
class AreaPartition:
    """Canonical split of an area against a concrete network.

    border holds side-a buses first (ascending id), then all remaining
    border buses (ascending id). sigma_a marks the side-a positions with
    ones. ties lists in-service lines with exactly one endpoint inside
    the area.
    """

    border: tuple[int, ...]
    interior: tuple[int, ...]
    ties: tuple[int, ...]
    sigma_a: tuple[int, ...]

    @property
    def side_a(self) -> tuple[int, ...]:
        return tuple(b for b, s in zip(self.border, self.sigma_a) if s == 1)

    @property
    def side_b(self) -> tuple[int, ...]:
        return tuple(b for b, s in zip(self.border, self.sigma_a) if s == 0)

    @property
    def area_buses(self) -> frozenset[int]:
        return frozenset(self.border) | frozenset(self.interior)


def validate_area_spec(spec: AreaSpec, net: Network) -> None:
    """Check an AreaSpec against a network, naming the offending bus on failure."""
    if not spec.area_buses:
        raise ValidationError("area has no buses")
    for bid in sorted(spec.area_buses):
        if not net.has_bus(bid):
            raise ValidationError(f"area bus {bid} does not exist in the network")
    if not spec.side_a:
        raise ValidationError("side_a is empty")
    if not spec.side_b:
        raise ValidationError("side_b is empty")
    overlap = spec.side_a & spec.side_b
    if overlap:
        raise ValidationError(f"bus {min(overlap)} appears in both side_a and side_b")
    for side_name, side in (("side_a", spec.side_a), ("side_b", spec.side_b)):
        for bid in sorted(side):
            if bid not in spec.area_buses:
                raise ValidationError(f"{side_name} bus {bid} is not an area bus")


def parse_area_spec(text: str | bytes, net: Network) -> AreaSpec:
    """Build a validated AreaSpec from JSON text."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"area file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("area file must contain a JSON object")
    for key in ("area_buses", "side_a", "side_b"):
        if key not in obj:
            raise ParseError(f"area file: missing key '{key}'")
        if not isinstance(obj[key], list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in obj[key]
        ):
            raise ParseError(f"area file: '{key}' must be a list of integers")
    spec = AreaSpec(
        area_buses=frozenset(obj["area_buses"]),
        side_a=frozenset(obj["side_a"]),
        side_b=frozenset(obj["side_b"]),
    )
    validate_area_spec(spec, net)
    return spec


def load_area_spec(source: Any, net: Network) -> AreaSpec:
    """Load an area spec from a path or an open stream and validate it against net."""
    return parse_area_spec(_read_source(source, "area"), net)


def dump_area(spec: AreaSpec) -> dict:
    return {
        "area_buses": sorted(spec.area_buses),
        "side_a": sorted(spec.side_a),
        "side_b": sorted(spec.side_b),
    }


def save_area(spec: AreaSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dump_area(spec), indent=2) + "\n")


def tie_line_ids(net: Network, area_buses: frozenset[int]) -> tuple[int, ...]:
    """In-service lines with exactly one endpoint inside the area, ascending id."""
    ids = [
        l.id
        for l in net.in_service_lines()
        if (l.from_bus in area_buses) != (l.to_bus in area_buses)
    ]
    return tuple(sorted(ids))


def partition_area(net: Network, spec: AreaSpec) -> AreaPartition:
    """Split the area into border and interior buses for one network.

    Border buses are the declared sides plus any area bus incident to a
    tie line. The area's internal subgraph (in-service lines with both
    endpoints inside) must connect every area bus, otherwise the area
    cannot be reduced and a ValidationError is raised.
    """
    validate_area_spec(spec, net)
    area = spec.area_buses

    ties = tie_line_ids(net, area)
    tie_incident: set[int] = set()
    for lid in ties:
        line = net.line(lid)
        inside = line.from_bus if line.from_bus in area else line.to_bus
        tie_incident.add(inside)

    side_a = sorted(spec.side_a)
    rest = sorted((spec.side_b | tie_incident) - spec.side_a)
    border = tuple(side_a + rest)
    interior = tuple(sorted(area - set(border)))

    internal_pairs = [
        (l.from_bus, l.to_bus)
        for l in net.in_service_lines()
        if l.from_bus in area and l.to_bus in area
    ]
    if not _connected(area, internal_pairs):
        raise ValidationError(
            "area internal subgraph is disconnected: the area buses are not "
            "all joined by in-service lines lying inside the area"
        )

    sigma = tuple([1] * len(side_a) + [0] * len(rest))
    return AreaPartition(border=border, interior=interior, ties=ties, sigma_a=sigma)
