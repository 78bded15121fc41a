"""DC power flow: susceptance matrix assembly, angle solves, line flows.

The network susceptance matrix is the weighted graph Laplacian of the
in-service lines. Angles are solved from the slack-deleted system with
a direct sparse factorization; the slack angle is exactly zero. All
angles are radians; degree conversion happens only in reports.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import NumericError, ValidationError
from .network import Network, is_islanding

RESIDUAL_TOL = 1e-9


def _read_only(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SusceptanceMatrix:
    """Network Laplacian over buses ordered by ascending id.

    Diagonal entries are the summed susceptances at each bus, off
    diagonals the negated total susceptance between each pair, so every
    row sums to zero and parallel lines accumulate.
    """

    bus_order: tuple[int, ...]
    matrix: sp.csr_matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {b: i for i, b in enumerate(self.bus_order)})

    @property
    def dimension(self) -> int:
        return len(self.bus_order)

    def index_of(self, bus_id: int) -> int:
        try:
            return self._index[bus_id]
        except KeyError:
            raise ValidationError(f"unknown bus id {bus_id}") from None

    def at(self, bus_j: int, bus_k: int) -> float:
        return float(self.matrix[self.index_of(bus_j), self.index_of(bus_k)])

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True, eq=False)
class AngleSolution:
    """Bus voltage angles in radians, zero at the slack bus."""

    bus_order: tuple[int, ...]
    radians: np.ndarray
    slack_bus: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "radians", _read_only(self.radians))
        object.__setattr__(self, "_index", {b: i for i, b in enumerate(self.bus_order)})

    def angle(self, bus_id: int) -> float:
        try:
            return float(self.radians[self._index[bus_id]])
        except KeyError:
            raise ValidationError(f"unknown bus id {bus_id}") from None

    def select(self, bus_ids) -> np.ndarray:
        return np.array([self.angle(b) for b in bus_ids], dtype=float)


@dataclass(frozen=True)
class FlowSolution:
    """Per-line flows in per-unit, oriented from from_bus to to_bus."""

    flows: Mapping[int, float]

    def of(self, line_id: int) -> float:
        try:
            return self.flows[line_id]
        except KeyError:
            raise ValidationError(f"no flow for line id {line_id}") from None


def assemble_susceptance(net: Network) -> SusceptanceMatrix:
    """Build the bus susceptance matrix from the in-service lines."""
    order = net.bus_ids()
    index = {b: i for i, b in enumerate(order)}
    n = len(order)
    fr, to, sus = [], [], []
    for line in net.in_service_lines():
        fr.append(index[line.from_bus])
        to.append(index[line.to_bus])
        sus.append(line.susceptance)
    f = np.asarray(fr, dtype=np.intp)
    t = np.asarray(to, dtype=np.intp)
    b = np.asarray(sus, dtype=float)
    rows = np.concatenate([f, t, f, t])
    cols = np.concatenate([f, t, t, f])
    vals = np.concatenate([b, b, -b, -b])
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return SusceptanceMatrix(bus_order=order, matrix=mat)


def _angles_for_injections(net: Network, injections: np.ndarray) -> np.ndarray:
    """Solve the slack-deleted DC system for an arbitrary injection vector.

    injections is ordered like net.buses. The slack entry is dropped from
    the right hand side; the returned full-length vector has a zero slack
    angle.
    """
    sm = assemble_susceptance(net)
    n = sm.dimension
    slack = sm.index_of(net.slack_bus)
    if n == 1:
        return np.zeros(1)
    keep = np.arange(n) != slack
    reduced = sm.matrix[keep][:, keep].tocsc()
    try:
        lu = splu(reduced)
    except RuntimeError as exc:
        raise NumericError(f"slack-deleted system is singular: {exc}") from exc
    theta_reduced = lu.solve(np.asarray(injections, dtype=float)[keep])
    theta = np.zeros(n)
    theta[keep] = theta_reduced
    residual = np.abs(sm.matrix @ theta - injections).max()
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise NumericError(f"DC solve residual {residual:.3e} exceeds {RESIDUAL_TOL:g}")
    return theta


def solve_angles(net: Network) -> AngleSolution:
    """DC angle solution of the network, radians, slack angle exactly zero."""
    injections = np.array([b.injection for b in net.buses], dtype=float)
    theta = _angles_for_injections(net, injections)
    return AngleSolution(bus_order=net.bus_ids(), radians=theta, slack_bus=net.slack_bus)


def line_flows(net: Network, sol: AngleSolution) -> FlowSolution:
    """Per-unit flow on every in-service line, susceptance times angle difference."""
    flows = {
        l.id: l.susceptance * (sol.angle(l.from_bus) - sol.angle(l.to_bus))
        for l in net.in_service_lines()
    }
    return FlowSolution(flows=MappingProxyType(flows))


def apply_outage(net: Network, line_id: int) -> Network:
    """Copy of the network with one line switched out of service.

    The original network is untouched. Outages that would island part of
    the network are rejected; callers scanning many lines should screen
    with is_islanding or find_bridges first.
    """
    line = net.line(line_id)
    if not line.in_service:
        raise ValidationError(f"line {line_id} is already out of service")
    if is_islanding(net, line_id):
        from .errors import IslandingOutageError

        raise IslandingOutageError(f"removing line {line_id} would island part of the network")
    lines = tuple(
        dataclasses.replace(l, in_service=False) if l.id == line_id else l for l in net.lines
    )
    return Network(buses=net.buses, lines=lines, slack_bus=net.slack_bus)
