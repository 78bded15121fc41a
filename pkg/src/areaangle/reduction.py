"""Reduction of an area onto its border buses and the area angle quantities.

The area is isolated by dropping its tie lines, leaving the Laplacian of
the internal lines. Eliminating the interior buses (Schur complement)
gives an equivalent network on the border alone. From it come the area
susceptance (the effective two-terminal susceptance between the merged
side-a and merged side-b supernodes), the border weights, the area
angle, and the area power. The weights depend only on area topology and
susceptances, never on injections, which is what lets a base-case
weight vector be frozen and reused against post-outage measurements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .areas import AreaPartition
from .dcflow import AngleSolution, _read_only
from .errors import DegenerateAreaError, NumericError, ValidationError
from .network import Network

DEGENERATE_SUSCEPTANCE_TOL = 1e-12
SMALL_WEIGHT = 0.01


@dataclass(frozen=True, eq=False)
class BorderInflow:
    """Net power arriving at each border bus, split by origin.

    direct is the bus injection itself, tie_inflow the power entering
    over tie lines from outside the area, and total their sum. Arrays
    follow the partition's border ordering.
    """

    border: tuple[int, ...]
    direct: np.ndarray
    tie_inflow: np.ndarray
    total: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "direct", _read_only(self.direct))
        object.__setattr__(self, "tie_inflow", _read_only(self.tie_inflow))
        object.__setattr__(self, "total", _read_only(self.total))


@dataclass(frozen=True, eq=False)
class ReducedArea:
    """Border-equivalent network plus the scalar area quantities.

    matrix is the reduced susceptance matrix over the border ordering,
    injections the reduced border injections. susceptance, power and
    angle satisfy power = susceptance * angle to solver precision.
    """

    border: tuple[int, ...]
    sigma_a: tuple[int, ...]
    matrix: np.ndarray
    injections: np.ndarray
    weights: np.ndarray
    susceptance: float
    power: float
    angle: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _read_only(self.matrix))
        object.__setattr__(self, "injections", _read_only(self.injections))
        object.__setattr__(self, "weights", _read_only(self.weights))


def border_inflow(net: Network, part: AreaPartition, sol: AngleSolution) -> BorderInflow:
    """Direct injections and tie-line inflows at the border buses."""
    area = part.area_buses
    direct = np.array([net.bus(b).injection for b in part.border], dtype=float)
    tie = np.zeros(len(part.border))
    border_pos = {b: i for i, b in enumerate(part.border)}
    for lid in part.ties:
        line = net.line(lid)
        if line.from_bus in area:
            inside, outside = line.from_bus, line.to_bus
        else:
            inside, outside = line.to_bus, line.from_bus
        tie[border_pos[inside]] += line.susceptance * (sol.angle(outside) - sol.angle(inside))
    return BorderInflow(border=part.border, direct=direct, tie_inflow=tie, total=direct + tie)


def _isolated_blocks(
    net: Network, part: AreaPartition
) -> tuple[np.ndarray, np.ndarray, sp.csc_matrix]:
    """Susceptance blocks of the area with its tie lines removed.

    Returns the border-border block (dense), the border-interior block
    (dense) and the interior-interior block (sparse), all over the
    canonical border-then-interior ordering.
    """
    order = list(part.border) + list(part.interior)
    local = {b: i for i, b in enumerate(order)}
    m = len(part.border)
    n_total = len(order)
    area = part.area_buses
    fr, to, sus = [], [], []
    for line in net.in_service_lines():
        if line.from_bus in area and line.to_bus in area:
            fr.append(local[line.from_bus])
            to.append(local[line.to_bus])
            sus.append(line.susceptance)
    f = np.asarray(fr, dtype=np.intp)
    t = np.asarray(to, dtype=np.intp)
    b = np.asarray(sus, dtype=float)
    rows = np.concatenate([f, t, f, t])
    cols = np.concatenate([f, t, t, f])
    vals = np.concatenate([b, b, -b, -b])
    full = sp.coo_matrix((vals, (rows, cols)), shape=(n_total, n_total)).tocsr()
    b_mm = full[:m, :m].toarray()
    b_mn = full[:m, m:].toarray()
    b_nn = full[m:, m:].tocsc()
    return b_mm, b_mn, b_nn


def kron_reduce(
    net: Network, part: AreaPartition, inflow: BorderInflow
) -> tuple[np.ndarray, np.ndarray]:
    """Eliminate the interior buses of the isolated area.

    Returns the reduced susceptance matrix and the reduced injection
    vector over the border ordering. With no interior buses this is the
    identity reduction. A singular interior block means some interior
    component is detached from the border, which partitioning should
    have caught.
    """
    if tuple(inflow.border) != tuple(part.border):
        raise ValidationError("inflow border ordering does not match the partition")
    b_mm, b_mn, b_nn = _isolated_blocks(net, part)
    n = len(part.interior)
    if n == 0:
        return b_mm, np.array(inflow.total, dtype=float)
    p_n = np.array([net.bus(b).injection for b in part.interior], dtype=float)
    try:
        lu = splu(b_nn)
    except RuntimeError as exc:
        raise ValidationError(
            "interior susceptance block is singular: an interior component is "
            "detached from the border"
        ) from exc
    x = lu.solve(b_mn.T.copy())
    reduced_matrix = b_mm - b_mn @ x
    reduced_injections = inflow.total - b_mn @ lu.solve(p_n)
    return reduced_matrix, reduced_injections


def area_quantities(
    border: tuple[int, ...],
    reduced_matrix: np.ndarray,
    reduced_injections: np.ndarray,
    sigma_a: tuple[int, ...],
    border_angles: np.ndarray,
) -> ReducedArea:
    """Weights, area susceptance, area power and area angle from the reduction.

    The weights are the side-a selector row of the reduced matrix scaled
    by the area susceptance; they sum to +1 over side a and -1 over the
    rest of the border. An area susceptance at or below the degeneracy
    tolerance means the two sides are decoupled.
    """
    m = len(border)
    sigma = np.asarray(sigma_a, dtype=float)
    mat = np.asarray(reduced_matrix, dtype=float)
    inj = np.asarray(reduced_injections, dtype=float)
    angles = np.asarray(border_angles, dtype=float)
    if not (len(sigma) == m and mat.shape == (m, m) and len(inj) == m and len(angles) == m):
        raise ValidationError("reduced-area inputs disagree on border dimension")
    row = sigma @ mat
    susceptance = float(row @ sigma)
    if susceptance <= DEGENERATE_SUSCEPTANCE_TOL:
        raise DegenerateAreaError(
            f"area susceptance {susceptance:.3e} is not positive: the two sides "
            "of the area are electrically decoupled"
        )
    weights = row / susceptance
    angle = float(weights @ angles)
    power = float(sigma @ inj)
    return ReducedArea(
        border=tuple(border),
        sigma_a=tuple(int(s) for s in sigma_a),
        matrix=mat,
        injections=inj,
        weights=weights,
        susceptance=susceptance,
        power=power,
        angle=angle,
    )


def monitored_weights(reduced: ReducedArea) -> np.ndarray:
    """Frozen border weight vector of a base-case reduction.

    Weights are injection-independent, so the base-case vector stays
    valid for combining post-outage border measurements.
    """
    return reduced.weights


def reduce_area(net: Network, part: AreaPartition, sol: AngleSolution) -> ReducedArea:
    """Full pipeline: border inflow, interior elimination, area quantities."""
    inflow = border_inflow(net, part, sol)
    reduced_matrix, reduced_injections = kron_reduce(net, part, inflow)
    border_angles = sol.select(part.border)
    return area_quantities(part.border, reduced_matrix, reduced_injections, part.sigma_a, border_angles)


def area_susceptance(net: Network, part: AreaPartition) -> float:
    """Area susceptance alone, without needing an angle solution."""
    b_mm, b_mn, b_nn = _isolated_blocks(net, part)
    sigma = np.asarray(part.sigma_a, dtype=float)
    if len(part.interior) == 0:
        return float(sigma @ b_mm @ sigma)
    try:
        lu = splu(b_nn)
    except RuntimeError as exc:
        raise NumericError(f"interior block factorization failed: {exc}") from exc
    y = lu.solve(b_mn.T @ sigma)
    return float(sigma @ (b_mm @ sigma - b_mn @ y))
