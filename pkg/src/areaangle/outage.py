"""Single-line outage scanning for a monitored area.

For each in-service line inside the area this module computes the
monitored angle (base-case weights applied to post-outage border
angles), the recomputed angle (weights rebuilt from the post-outage
reduction), the post-outage area susceptance and power, and the
monitored/recomputed ratio. Lines whose removal disconnects the whole
network are flagged islanding and carry no numbers; lines whose removal
splits the area internally while the network survives are flagged
degenerate, likewise without numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._engine import OutageEngine, run_per_line
from .areas import AreaPartition
from .dcflow import AngleSolution, solve_angles
from .errors import DegenerateAreaError, ValidationError
from .network import Network, _connected
from .reduction import ReducedArea, reduce_area

_ZERO_ANGLE_TOL = 1e-12


class OutageResult:
    """Outcome of one line outage evaluation.

    Numeric fields hold None when the outage is flagged (islanding or
    degenerate) or when the per-line evaluation failed; `note` carries
    the failure text in that last case. The severity scan fills in
    `severity` afterwards.
    """

    def __init__(self, line_id, islanding=False, degenerate=False,
                 theta_monitored=None, theta_recomputed=None,
                 b_area_post=None, p_area_post=None, ratio=None, note=None):
        self.line_id = int(line_id)
        self.islanding = bool(islanding)
        self.degenerate = bool(degenerate)
        self.theta_monitored = theta_monitored
        self.theta_recomputed = theta_recomputed
        self.b_area_post = b_area_post
        self.p_area_post = p_area_post
        self.ratio = ratio
        self.note = note
        self.severity = None

    @property
    def evaluated(self) -> bool:
        """True when the numeric fields are populated."""
        return self.theta_recomputed is not None

    def __repr__(self):
        if self.islanding:
            return f"OutageResult(line {self.line_id}: islanding)"
        if self.degenerate:
            return f"OutageResult(line {self.line_id}: degenerate)"
        if not self.evaluated:
            return f"OutageResult(line {self.line_id}: failed, {self.note!r})"
        return (
            f"OutageResult(line {self.line_id}: monitored={self.theta_monitored:.6g}, "
            f"recomputed={self.theta_recomputed:.6g}, b={self.b_area_post:.6g})"
        )


@dataclass(frozen=True)
class RatioStats:
    """Population statistics of the monitored/recomputed angle ratio."""

    mean: float
    std_dev: float
    minimum: float
    maximum: float
    count: int


def monitored_angle(weights, border_angles) -> float:
    """Angle seen by a monitor holding base-case weights fixed."""
    w = np.asarray(weights, dtype=float)
    theta = np.asarray(border_angles, dtype=float)
    if w.shape != theta.shape:
        raise ValidationError(
            f"weight vector has {w.shape[0]} entries but {theta.shape[0]} border angles were given"
        )
    return float(w @ theta)


def recomputed_angle(net_post: Network, part: AreaPartition, sol_post: AngleSolution):
    """Self-consistent post-outage angle, susceptance, and power.

    Runs the full reduction on the post-outage network. Raises
    DegenerateAreaError when the outage has split the area's internal
    subgraph, since the reduction is then meaningless even though the
    rest of the network may still be connected.
    """
    area = part.area_buses
    pairs = [
        (l.from_bus, l.to_bus)
        for l in net_post.in_service_lines()
        if l.from_bus in area and l.to_bus in area
    ]
    if not _connected(area, pairs):
        raise DegenerateAreaError(
            "the area's internal subgraph is disconnected after the outage"
        )
    reduced = reduce_area(net_post, part, sol_post)
    return reduced.angle, reduced.susceptance, reduced.power


def scan_outages(net: Network, part: AreaPartition, base: ReducedArea | None = None,
                 *, fast_path: bool = True, jobs: int = 1) -> list[OutageResult]:
    """Evaluate every in-service line with both endpoints in the area.

    Results come back in ascending line-id order, one per area line.
    Monitored angles always use the weights of `base` (computed here
    from the intact network when not supplied). Per-line failures are
    recorded on the result instead of aborting the scan.
    """
    if base is None:
        base = reduce_area(net, part, solve_angles(net))
    weights = np.asarray(base.weights, dtype=float)

    def make_engine() -> OutageEngine:
        return OutageEngine(net, part, fast_path=fast_path)

    def work(engine: OutageEngine, line_id: int) -> OutageResult:
        kind = engine.classify(line_id)
        if kind == "islanding":
            return OutageResult(line_id, islanding=True)
        if kind == "degenerate":
            return OutageResult(line_id, degenerate=True)
        try:
            theta, _ = engine.post_network(line_id)
            theta_mon = float(weights @ theta[engine.border_pos])
            susceptance, theta_rec, power = engine.post_area(line_id, theta)
        except (DegenerateAreaError, ValidationError) as exc:
            return OutageResult(line_id, note=str(exc))
        if abs(theta_rec) <= _ZERO_ANGLE_TOL:
            ratio = None
            note = "recomputed angle is zero; ratio undefined"
        else:
            ratio = theta_mon / theta_rec
            note = None
        return OutageResult(
            line_id,
            theta_monitored=theta_mon,
            theta_recomputed=theta_rec,
            b_area_post=susceptance,
            p_area_post=power,
            ratio=ratio,
            note=note,
        )

    area = part.area_buses
    line_ids = [
        l.id for l in net.in_service_lines()
        if l.from_bus in area and l.to_bus in area
    ]
    results = run_per_line(line_ids, make_engine, work, jobs)
    return [results[lid] for lid in sorted(results)]


def ratio_statistics(results) -> RatioStats:
    """Population mean/std/min/max of the ratio over evaluated outages."""
    ratios = np.array(
        [r.ratio for r in results if not r.islanding and r.ratio is not None],
        dtype=float,
    )
    if ratios.size == 0:
        raise ValidationError("no evaluated outages with a defined ratio")
    return RatioStats(
        mean=float(ratios.mean()),
        std_dev=float(ratios.std()),
        minimum=float(ratios.min()),
        maximum=float(ratios.max()),
        count=int(ratios.size),
    )
