"""Network data model and JSON case files for DC studies.

A case holds buses with fixed real-power injections and lines with
per-unit susceptances and optional symmetric flow limits. Validation
enforces the structural preconditions of the lossless DC formulation:
unique ids, a connected in-service graph, and injections that sum to
zero. Networks are canonicalized (buses and lines sorted by id) so two
instances built from the same data compare equal regardless of input
ordering.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

from .errors import ParseError, ValidationError

BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class Bus:
    """Single network node. Positive injection is generation, negative is load."""

    id: int
    name: str = ""
    injection: float = 0.0


@dataclass(frozen=True)
class Line:
    """Branch between two buses with a positive per-unit susceptance.

    limit is a symmetric per-unit flow bound, None when the line is
    unconstrained. Parallel lines between the same pair of buses are
    permitted and stay distinct by id.
    """

    id: int
    from_bus: int
    to_bus: int
    susceptance: float
    limit: float | None = None
    in_service: bool = True


@dataclass(frozen=True)
class Network:
    """Validated, immutable snapshot of one DC case."""

    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    slack_bus: int

    def __post_init__(self) -> None:
        buses = tuple(sorted(self.buses, key=lambda b: b.id))
        lines = tuple(sorted(self.lines, key=lambda l: l.id))
        object.__setattr__(self, "buses", buses)
        object.__setattr__(self, "lines", lines)
        _validate_network(self)
        object.__setattr__(self, "_bus_by_id", {b.id: b for b in buses})
        object.__setattr__(self, "_line_by_id", {l.id: l for l in lines})

    def bus(self, bus_id: int) -> Bus:
        try:
            return self._bus_by_id[bus_id]
        except KeyError:
            raise ValidationError(f"unknown bus id {bus_id}") from None

    def line(self, line_id: int) -> Line:
        try:
            return self._line_by_id[line_id]
        except KeyError:
            raise ValidationError(f"unknown line id {line_id}") from None

    def has_bus(self, bus_id: int) -> bool:
        return bus_id in self._bus_by_id

    def bus_ids(self) -> tuple[int, ...]:
        return tuple(b.id for b in self.buses)

    def in_service_lines(self) -> tuple[Line, ...]:
        return tuple(l for l in self.lines if l.in_service)


def _validate_network(net: Network) -> None:
    if not net.buses:
        raise ValidationError("network has no buses")

    seen_buses: set[int] = set()
    for bus in net.buses:
        if bus.id in seen_buses:
            raise ValidationError(f"duplicate bus id {bus.id}")
        seen_buses.add(bus.id)
        if not math.isfinite(bus.injection):
            raise ValidationError(f"bus {bus.id}: injection is not finite")

    if net.slack_bus not in seen_buses:
        raise ValidationError(f"slack bus {net.slack_bus} is not a network bus")

    seen_lines: set[int] = set()
    for line in net.lines:
        if line.id in seen_lines:
            raise ValidationError(f"duplicate line id {line.id}")
        seen_lines.add(line.id)
        for end in (line.from_bus, line.to_bus):
            if end not in seen_buses:
                raise ValidationError(f"line {line.id}: endpoint bus {end} does not exist")
        if line.from_bus == line.to_bus:
            raise ValidationError(f"line {line.id}: connects bus {line.from_bus} to itself")
        if not (math.isfinite(line.susceptance) and line.susceptance > 0.0):
            raise ValidationError(f"line {line.id}: susceptance must be positive, got {line.susceptance}")
        if line.limit is not None and not (math.isfinite(line.limit) and line.limit > 0.0):
            raise ValidationError(f"line {line.id}: flow limit must be positive, got {line.limit}")

    total = math.fsum(b.injection for b in net.buses)
    if abs(total) > BALANCE_TOL:
        raise ValidationError(
            f"injections sum to {total:.6e}, outside the +/-{BALANCE_TOL:g} balance tolerance"
        )

    pairs = [(l.from_bus, l.to_bus) for l in net.lines if l.in_service]
    if not _connected(seen_buses, pairs):
        raise ValidationError("in-service network graph is not connected")


# ---------------------------------------------------------------------------
# graph utilities


def _connected(node_ids: Iterable[int], pairs: Iterable[tuple[int, int]]) -> bool:
    """True when the undirected graph on node_ids with the given edges is connected."""
    nodes = list(node_ids)
    if len(nodes) <= 1:
        return True
    parent = {n: n for n in nodes}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv

    roots = {find(n) for n in nodes}
    return len(roots) == 1


def _bridges(node_ids: Iterable[int], edges: Iterable[tuple[int, int, int]]) -> frozenset[int]:
    """Ids of edges whose removal disconnects the graph.

    edges are (edge_id, u, v) triples. Parallel edges are handled: only
    the single edge used to enter a node is excluded from its back-edge
    scan, so a parallel twin still provides the cycle that keeps both
    off the bridge list. Iterative DFS, safe for long paths.
    """
    adj: dict[int, list[tuple[int, int]]] = {n: [] for n in node_ids}
    for eid, u, v in edges:
        adj[u].append((v, eid))
        adj[v].append((u, eid))

    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    bridges: set[int] = set()
    counter = 0

    for root in adj:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        stack: list[tuple[int, int, Any]] = [(root, -1, iter(adj[root]))]
        while stack:
            node, in_edge, neighbors = stack[-1]
            descended = False
            for nbr, eid in neighbors:
                if eid == in_edge:
                    continue
                if nbr not in disc:
                    disc[nbr] = low[nbr] = counter
                    counter += 1
                    stack.append((nbr, eid, iter(adj[nbr])))
                    descended = True
                    break
                low[node] = min(low[node], disc[nbr])
            if not descended:
                stack.pop()
                if stack:
                    parent_node = stack[-1][0]
                    low[parent_node] = min(low[parent_node], low[node])
                    if low[node] > disc[parent_node]:
                        bridges.add(in_edge)
    return frozenset(bridges)


def find_bridges(net: Network) -> frozenset[int]:
    """Line ids whose outage would disconnect the in-service graph."""
    edges = [(l.id, l.from_bus, l.to_bus) for l in net.lines if l.in_service]
    return _bridges(net.bus_ids(), edges)


def is_islanding(net: Network, line_id: int) -> bool:
    """True when taking the line out of service would island part of the network.

    The line must exist and be in service. Parallel lines are never
    islanding because the twin keeps the endpoints connected.
    """
    line = net.line(line_id)
    if not line.in_service:
        raise ValidationError(f"line {line_id} is already out of service")
    return line_id in find_bridges(net)


# ---------------------------------------------------------------------------
# JSON case files


def parse_case(text: str | bytes) -> Network:
    """Build a validated Network from JSON case text."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"case file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("case file must contain a JSON object")

    for key in ("slack_bus", "buses", "lines"):
        if key not in obj:
            raise ParseError(f"case file: missing key '{key}'")

    slack = _as_int(obj["slack_bus"], "slack_bus")

    raw_buses = obj["buses"]
    if not isinstance(raw_buses, list):
        raise ParseError("case file: 'buses' must be a list")
    buses = []
    for k, entry in enumerate(raw_buses):
        where = f"bus entry {k}"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: must be an object")
        if "id" not in entry:
            raise ParseError(f"{where}: missing 'id'")
        bid = _as_int(entry["id"], f"{where}: id")
        name = entry.get("name", f"bus{bid}")
        if not isinstance(name, str):
            raise ParseError(f"bus {bid}: 'name' must be a string")
        injection = _as_number(entry.get("injection", 0.0), f"bus {bid}: injection")
        buses.append(Bus(id=bid, name=name, injection=injection))

    raw_lines = obj["lines"]
    if not isinstance(raw_lines, list):
        raise ParseError("case file: 'lines' must be a list")
    lines = []
    for k, entry in enumerate(raw_lines):
        where = f"line entry {k}"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: must be an object")
        if "id" not in entry:
            raise ParseError(f"{where}: missing 'id'")
        lid = _as_int(entry["id"], f"{where}: id")
        for key in ("from", "to", "susceptance"):
            if key not in entry:
                raise ParseError(f"line {lid}: missing '{key}'")
        limit_raw = entry.get("limit")
        limit = None if limit_raw is None else _as_number(limit_raw, f"line {lid}: limit")
        in_service = entry.get("in_service", True)
        if not isinstance(in_service, bool):
            raise ParseError(f"line {lid}: 'in_service' must be a boolean")
        lines.append(
            Line(
                id=lid,
                from_bus=_as_int(entry["from"], f"line {lid}: from"),
                to_bus=_as_int(entry["to"], f"line {lid}: to"),
                susceptance=_as_number(entry["susceptance"], f"line {lid}: susceptance"),
                limit=limit,
                in_service=in_service,
            )
        )

    return Network(buses=tuple(buses), lines=tuple(lines), slack_bus=slack)


def load_case(source: Any) -> Network:
    """Load a case from a path or an open text/binary stream."""
    return parse_case(_read_source(source, "case"))


def dump_case(net: Network) -> dict:
    """JSON-ready dict for a Network; inverse of parse_case."""
    return {
        "slack_bus": net.slack_bus,
        "buses": [
            {"id": b.id, "name": b.name, "injection": b.injection} for b in net.buses
        ],
        "lines": [
            {
                "id": l.id,
                "from": l.from_bus,
                "to": l.to_bus,
                "susceptance": l.susceptance,
                "limit": l.limit,
                "in_service": l.in_service,
            }
            for l in net.lines
        ],
    }


def save_case(net: Network, path: str | Path) -> None:
    Path(path).write_text(json.dumps(dump_case(net), indent=2) + "\n")


def _read_source(source: Any, what: str) -> str | bytes:
    if hasattr(source, "read"):
        return source.read()
    if isinstance(source, (str, Path)):
        p = Path(source)
        try:
            return p.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {what} file {p}: {exc}") from exc
    raise ParseError(f"unsupported {what} source type {type(source).__name__}")


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _as_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    val = float(value)
    if not math.isfinite(val):
        raise ParseError(f"{where}: value is not finite")
    return val
