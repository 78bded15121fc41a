"""Seeded random network generation for property tests and benchmarks.

Three layouts are available. "ladder" builds parallel chains from a
generating row to a loading row with cross braces, and declares the
whole network as the area: a cutset area with zero interior injection,
the setting where tie inflows are outage-invariant. "mesh" builds a
random connected graph with noise injections and grows an area by
breadth-first search, splitting its border by base-flow direction.
"bypass" takes a ladder and adds one weak external corridor around the
area, so a small share of the transfer can dodge the area.

Everything is driven by one numpy Generator, so a seed pins the output
byte for byte.
"""

from __future__ import annotations

import math

import numpy as np

from .areas import AreaSpec, partition_area
from .dcflow import line_flows, solve_angles
from .errors import ValidationError
from .network import Bus, Line, Network
from .reduction import area_susceptance, border_inflow

BRACE_PROB = 0.8
DUPLICATE_PROB = 0.08
UNLIMITED_SHARE = 0.22
BYPASS_SERIES_SHARE = 0.03
_SIGN_TOL = 1e-9


def _balanced(values: list[float]) -> list[float]:
    """Shift the largest-magnitude entry so the list sums to ~0 exactly."""
    residual = math.fsum(values)
    k = max(range(len(values)), key=lambda i: abs(values[i]))
    values[k] -= residual
    return values


def _ladder(rng: np.random.Generator, buses: int, paths: int, extra_lines: int):
    if paths < 2:
        raise ValidationError("ladder needs at least 2 parallel paths")
    if buses < 3 * paths:
        raise ValidationError(
            f"ladder with {paths} paths needs at least {3 * paths} buses, got {buses}"
        )
    base_len = buses // paths
    remainder = buses % paths
    chains: list[list[int]] = []
    next_id = 1
    for k in range(paths):
        length = base_len + (1 if k < remainder else 0)
        chains.append(list(range(next_id, next_id + length)))
        next_id += length

    lines: list[tuple[int, int, float]] = []  # (from, to, susceptance)

    def draw_b() -> float:
        return float(rng.uniform(10.0, 40.0))

    for chain in chains:
        for a, b in zip(chain, chain[1:]):
            lines.append((a, b, draw_b()))
    chain_edge_count = len(lines)

    for k in range(paths - 1):
        left, right = chains[k], chains[k + 1]
        levels = min(len(left), len(right)) - 2
        forced = int(rng.integers(1, levels + 1))
        for lvl in range(1, levels + 1):
            if lvl == forced or rng.random() < BRACE_PROB:
                lines.append((left[lvl], right[lvl], draw_b()))

    for e in range(chain_edge_count):
        if rng.random() < DUPLICATE_PROB:
            a, b, _ = lines[e]
            lines.append((a, b, draw_b()))

    for _ in range(extra_lines):
        k = int(rng.integers(0, paths - 1))
        left, right = chains[k], chains[k + 1]
        lvl = int(rng.integers(1, min(len(left), len(right)) - 1))
        lines.append((left[lvl], right[lvl], draw_b()))

    tops = [chain[0] for chain in chains]
    bottoms = [chain[-1] for chain in chains]
    generation = [float(rng.uniform(10.0, 50.0)) for _ in tops]
    shares = np.asarray([rng.uniform(0.5, 1.5) for _ in bottoms])
    shares /= shares.sum()
    loads = [-sum(generation) * s for s in shares.tolist()]
    injections = {bid: 0.0 for bid in range(1, next_id)}
    for bid, g in zip(tops, generation):
        injections[bid] = g
    for bid, d in zip(bottoms, loads):
        injections[bid] = d
    balanced = _balanced([injections[b] for b in sorted(injections)])
    injections = dict(zip(sorted(injections), balanced))

    all_buses = sorted(injections)
    spec = AreaSpec(area_buses=all_buses, side_a=tops, side_b=bottoms)
    return all_buses, injections, lines, tops[0], spec


def _mesh(rng: np.random.Generator, buses: int, extra_lines: int | None):
    if buses < 8:
        raise ValidationError(f"mesh needs at least 8 buses, got {buses}")
    n = buses
    lines: list[tuple[int, int, float]] = []

    def draw_b() -> float:
        return float(rng.uniform(5.0, 50.0))

    for i in range(2, n + 1):
        j = int(rng.integers(1, i))
        lines.append((j, i, draw_b()))
    extras = extra_lines if extra_lines is not None else int(0.7 * n)
    for _ in range(extras):
        a = int(rng.integers(1, n + 1))
        b = int(rng.integers(1, n))
        if b >= a:
            b += 1
        lines.append((min(a, b), max(a, b), draw_b()))

    raw = rng.normal(0.0, 15.0, size=n)
    raw -= raw.mean()
    injections = dict(zip(range(1, n + 1), _balanced(raw.tolist())))
    all_buses = list(range(1, n + 1))
    return all_buses, injections, lines, 1


def _grow_area(rng: np.random.Generator, net: Network) -> AreaSpec:
    """BFS-grown area whose border sides follow the base flow direction."""
    adjacency: dict[int, set[int]] = {b: set() for b in net.bus_ids()}
    for line in net.in_service_lines():
        adjacency[line.from_bus].add(line.to_bus)
        adjacency[line.to_bus].add(line.from_bus)

    n = len(adjacency)
    target = min(max(6, n // 3), n - 2)
    sol = solve_angles(net)

    for _ in range(50):
        start = int(rng.integers(1, n + 1))
        area = [start]
        seen = {start}
        queue = [start]
        while queue and len(area) < target:
            u = queue.pop(0)
            for v in sorted(adjacency[u]):
                if v not in seen and len(area) < target:
                    seen.add(v)
                    area.append(v)
                    queue.append(v)
        area_set = set(area)
        borders = sorted(
            b for b in area if any(v not in area_set for v in adjacency[b])
        )
        if len(borders) < 2:
            continue

        trial = AreaSpec(area_buses=area, side_a=[borders[0]], side_b=borders[1:])
        try:
            part = partition_area(net, trial)
        except ValidationError:
            continue
        inflow = border_inflow(net, part, sol)
        totals = dict(zip(part.border, inflow.total.tolist()))
        side_a = [b for b in borders if totals[b] > _SIGN_TOL]
        side_b = [b for b in borders if totals[b] < -_SIGN_TOL]
        if not side_a or not side_b:
            continue
        return AreaSpec(area_buses=area, side_a=side_a, side_b=side_b)
    raise ValidationError("could not grow a usable area; try another seed or size")


def _with_limits(rng: np.random.Generator, net: Network, factor: float) -> Network:
    sol = solve_angles(net)
    flows = line_flows(net, sol)
    magnitudes = [abs(flows.of(l.id)) for l in net.lines]
    nonzero = [m for m in magnitudes if m > 1e-9]
    floor = 0.4 * (sum(nonzero) / len(nonzero)) if nonzero else 1.0
    lines = []
    for line, mag in zip(net.lines, magnitudes):
        if rng.random() < UNLIMITED_SHARE:
            lines.append(line)
        else:
            limit = factor * max(mag, floor)
            lines.append(Line(line.id, line.from_bus, line.to_bus,
                              line.susceptance, limit=limit,
                              in_service=line.in_service))
    return Network(buses=net.buses, lines=lines, slack_bus=net.slack_bus)


def generate_case(seed: int, *, buses: int = 30, topology: str = "mesh",
                  paths: int = 3, extra_lines: int | None = None,
                  limit_factor: float | None = None):
    """Build a connected, balanced random case and a matching area spec.

    Returns (Network, AreaSpec). The same seed and parameters always
    produce the same pair. limit_factor, when given, puts a flow limit
    of factor times the base loading (with a floor for lightly loaded
    lines) on roughly three quarters of the lines, leaving the rest
    unconstrained; the base case never violates these limits.
    """
    rng = np.random.default_rng(seed)
    if topology == "ladder":
        bus_ids, injections, raw_lines, slack, spec = _ladder(
            rng, buses, paths, extra_lines or 0
        )
    elif topology == "mesh":
        bus_ids, injections, raw_lines, slack = _mesh(rng, buses, extra_lines)
        spec = None
    elif topology == "bypass":
        bus_ids, injections, raw_lines, slack, spec = _ladder(
            rng, buses, paths, extra_lines or 0
        )
    else:
        raise ValidationError(f"unknown topology {topology!r}")

    bus_objs = [Bus(b, name=f"bus{b}", injection=injections[b]) for b in bus_ids]
    line_objs = [
        Line(i + 1, a, b, susceptance=s) for i, (a, b, s) in enumerate(raw_lines)
    ]
    net = Network(buses=bus_objs, lines=line_objs, slack_bus=slack)

    if topology == "mesh":
        spec = _grow_area(rng, net)

    if topology == "bypass":
        part = partition_area(net, spec)
        b_area = area_susceptance(net, part)
        hops = int(rng.integers(3, 7))
        per_edge = BYPASS_SERIES_SHARE * b_area * (hops + 1)
        first_ext = max(bus_ids) + 1
        ext_ids = list(range(first_ext, first_ext + hops))
        bus_objs = bus_objs + [Bus(b, name=f"bus{b}") for b in ext_ids]
        anchor_a = sorted(spec.side_a)[0]
        anchor_b = sorted(spec.side_b)[0]
        path = [anchor_a] + ext_ids + [anchor_b]
        next_line = len(line_objs) + 1
        for a, b in zip(path, path[1:]):
            line_objs.append(Line(next_line, a, b, susceptance=per_edge))
            next_line += 1
        net = Network(buses=bus_objs, lines=line_objs, slack_bus=slack)

    if limit_factor is not None:
        if limit_factor <= 1.0:
            raise ValidationError("limit factor must exceed 1 to keep the base case feasible")
        net = _with_limits(rng, net, limit_factor)
    return net, spec
