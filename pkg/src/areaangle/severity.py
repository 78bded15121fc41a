"""Outage severity: maximum power the area can accept before a limit binds.

Severity stresses the network along one fixed axis, scaling power into
the side-a border buses proportionally to their base-case inflows and
absorbing it at the side-b borders proportionally to their base-case
outflows. DC flows are affine in the stress parameter, so the largest
feasible stress is a minimum-ratio test over the area's limited
internal lines. The reported value is the total side-a inflow at that
point. The stress axis is built once from the base case and reused for
every outage so severities are comparable across the scan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._engine import OutageEngine, run_per_line
from .areas import AreaPartition
from .dcflow import AngleSolution, solve_angles
from .errors import DegenerateAreaError
from .network import Network
from .reduction import border_inflow

_SIDE_FLOW_TOL = 1e-9
_FLAT_FLOW_TOL = 1e-12
_VIOLATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StressDirection:
    """Injection change per unit of stress, over all buses in id order."""

    bus_order: tuple
    delta: np.ndarray
    description: str

    def __post_init__(self):
        arr = np.ascontiguousarray(self.delta, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "delta", arr)


@dataclass(frozen=True)
class SeverityResult:
    """Outcome of the minimum-ratio test for one network state.

    line_id is None for the base (no outage) entry. When no limited
    internal line responds to the stress, unbounded is True and the
    numeric fields are None. start_inflow is the side-a inflow at zero
    stress, so max_power_in = start_inflow + lambda_star when bounded.
    """

    line_id: int | None
    lambda_star: float | None
    max_power_in: float | None
    binding_line: int | None
    unbounded: bool
    start_inflow: float


def stress_direction(net: Network, part: AreaPartition, sol: AngleSolution) -> StressDirection:
    """Proportional border stress axis from the base case.

    Each side-a bus gets a share of +1 proportional to its net inflow
    (direct injection plus tie inflow); each side-b bus a share of -1
    proportional to its net outflow. Entries sum to zero and interior
    and external buses are untouched.
    """
    inflow = border_inflow(net, part, sol)
    total = inflow.total
    sigma = np.asarray(part.sigma_a, dtype=float)
    side_a_total = float(sigma @ total)
    side_b_total = float((1.0 - sigma) @ total)
    if side_a_total <= _SIDE_FLOW_TOL:
        raise DegenerateAreaError(
            f"total base inflow at side-a borders is {side_a_total:.3e}; stress direction undefined"
        )
    if -side_b_total <= _SIDE_FLOW_TOL:
        raise DegenerateAreaError(
            f"total base outflow at side-b borders is {-side_b_total:.3e}; stress direction undefined"
        )

    bus_order = tuple(net.bus_ids())
    pos = {bid: i for i, bid in enumerate(bus_order)}
    delta = np.zeros(len(bus_order))
    for j, bid in enumerate(part.border):
        if sigma[j] == 1.0:
            delta[pos[bid]] = total[j] / side_a_total
        else:
            delta[pos[bid]] = -total[j] / side_b_total
    return StressDirection(
        bus_order=bus_order,
        delta=delta,
        description=(
            f"border inflow scaling, +1 over side a ({side_a_total:.6g} pu base), "
            f"-1 over side b ({-side_b_total:.6g} pu base)"
        ),
    )


def _ratio_test(ids: np.ndarray, f0: np.ndarray, df: np.ndarray, limits: np.ndarray,
                line_id: int | None, start_inflow: float) -> SeverityResult:
    """Largest stress before an internal limit binds, flows f0 + lambda*df.

    ids must be ascending so float ties resolve to the lowest line id.
    limits uses NaN for unconstrained lines.
    """
    limited = ~np.isnan(limits)
    violated = limited & (np.abs(f0) > limits + _VIOLATION_TOL)
    if violated.any():
        return SeverityResult(
            line_id=line_id,
            lambda_star=0.0,
            max_power_in=start_inflow,
            binding_line=int(ids[violated][0]),
            unbounded=False,
            start_inflow=start_inflow,
        )
    movable = limited & (np.abs(df) > _FLAT_FLOW_TOL)
    if not movable.any():
        return SeverityResult(
            line_id=line_id,
            lambda_star=None,
            max_power_in=None,
            binding_line=None,
            unbounded=True,
            start_inflow=start_inflow,
        )
    f = f0[movable]
    d = df[movable]
    lim = limits[movable]
    ratios = np.where(d > 0, (lim - f) / d, (-lim - f) / d)
    ratios = np.maximum(ratios, 0.0)
    lam = float(ratios.min())
    # exact ties land on the lowest id; the window keeps that choice stable
    # when round-off splits a mathematical tie by a few ulps
    near = ratios <= lam + max(1e-12, 1e-9 * lam)
    return SeverityResult(
        line_id=line_id,
        lambda_star=lam,
        max_power_in=start_inflow + lam,
        binding_line=int(ids[movable][near].min()),
        unbounded=False,
        start_inflow=start_inflow,
    )


def max_power_into_area(net: Network, part: AreaPartition,
                        direction: StressDirection) -> SeverityResult:
    """Severity of the given network state (outage already applied, if any)."""
    if tuple(net.bus_ids()) != direction.bus_order:
        raise DegenerateAreaError("stress direction was built for a different bus set")
    engine = OutageEngine(net, part, fast_path=False)
    engine.set_direction(direction.delta)
    theta = engine.theta0
    dtheta = engine.base_direction_response()
    ids, f0, limits = engine.internal_flows(theta)
    _, df, _ = engine.internal_flows(dtheta)
    return _ratio_test(ids, f0, df, limits, None, engine.side_a_inflow(theta))


def severity_scan(net: Network, part: AreaPartition, results,
                  *, direction: StressDirection | None = None,
                  fast_path: bool = True, jobs: int = 1):
    """Severity of the base case and of every non-islanding outage.

    Attaches max_power_in to each OutageResult's severity field and
    returns the SeverityResult list ordered most-severe first
    (ascending max power, unbounded entries after bounded ones, ties by
    line id) with the base entry appended last.
    """
    if direction is None:
        direction = stress_direction(net, part, solve_angles(net))
    delta = direction.delta
    if tuple(net.bus_ids()) != direction.bus_order:
        raise DegenerateAreaError("stress direction was built for a different bus set")

    def make_engine() -> OutageEngine:
        engine = OutageEngine(net, part, fast_path=fast_path)
        engine.set_direction(delta)
        return engine

    def work(engine: OutageEngine, line_id: int) -> SeverityResult:
        theta, dtheta = engine.post_network(line_id, with_direction=True)
        ids, f0, limits = engine.internal_flows(theta, exclude_line=line_id)
        _, df, _ = engine.internal_flows(dtheta, exclude_line=line_id)
        return _ratio_test(ids, f0, df, limits, line_id, engine.side_a_inflow(theta))

    line_ids = [r.line_id for r in results if not r.islanding]
    per_line = run_per_line(line_ids, make_engine, work, jobs)

    base_engine = make_engine()
    ids, f0, limits = base_engine.internal_flows(base_engine.theta0)
    _, df, _ = base_engine.internal_flows(base_engine.base_direction_response())
    base = _ratio_test(ids, f0, df, limits, None, base_engine.side_a_inflow(base_engine.theta0))

    for res in results:
        sev = per_line.get(res.line_id)
        if sev is not None:
            res.severity = sev.max_power_in

    def order(sev: SeverityResult):
        # sort on the 12-digit reported value, not the raw float, so
        # mathematically tied outages keep one order on every solve path
        power = 0.0
        if sev.max_power_in is not None:
            power = float(f"{sev.max_power_in:.12g}")
        return (1 if sev.unbounded else 0, power, sev.line_id)

    ordered = sorted(per_line.values(), key=order)
    ordered.append(base)
    return ordered
