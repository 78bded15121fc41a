"""Package-private per-outage evaluation machinery.

One engine compiles a (network, partition) pair into index arrays and
base factorizations, then evaluates single-line outages of area lines.
Two strategies are supported. The reference strategy reassembles and
refactorizes every post-outage system. The fast strategy exploits the
fact that removing one line is a rank-one perturbation of a Laplacian,
so the base factorizations can be reused through Sherman-Morrison
updates. Both must agree to solver precision; the acceptance suite pins
them together within 1e-9.

Scans parallelize by giving each worker its own engine over identical
inputs, so results are bitwise reproducible regardless of worker count.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .areas import AreaPartition
from .errors import NumericError
from .network import Network, _bridges

_SM_TOL = 1e-12

# SuperLU factorization is not documented as reentrant; solves on separate
# factor objects are. Factorizations are serialized, solves run freely.
_FACTOR_LOCK = threading.Lock()


def _splu(matrix: sp.csc_matrix):
    with _FACTOR_LOCK:
        try:
            return splu(matrix)
        except RuntimeError as exc:
            raise NumericError(f"sparse factorization failed: {exc}") from exc


def _laplacian_csr(n: int, f: np.ndarray, t: np.ndarray, b: np.ndarray) -> sp.csr_matrix:
    rows = np.concatenate([f, t, f, t])
    cols = np.concatenate([f, t, t, f])
    vals = np.concatenate([b, b, -b, -b])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


class OutageEngine:
    """Evaluates single-line outages of one area against one base case."""

    def __init__(self, net: Network, part: AreaPartition, fast_path: bool = True):
        self.net = net
        self.part = part
        self.fast = fast_path

        ids = net.bus_ids()
        self.n_bus = len(ids)
        idx = {bid: i for i, bid in enumerate(ids)}
        self.idx = idx
        self.injections = np.array([b.injection for b in net.buses], dtype=float)
        self.slack = idx[net.slack_bus]

        lines = net.lines
        self.line_ids = np.array([l.id for l in lines], dtype=np.intp)
        self.lf = np.array([idx[l.from_bus] for l in lines], dtype=np.intp)
        self.lt = np.array([idx[l.to_bus] for l in lines], dtype=np.intp)
        self.lb = np.array([l.susceptance for l in lines], dtype=float)
        self.llim = np.array(
            [l.limit if l.limit is not None else np.nan for l in lines], dtype=float
        )
        self.svc = np.array([l.in_service for l in lines], dtype=bool)
        self.pos_of_line = {int(l): k for k, l in enumerate(self.line_ids)}

        area = part.area_buses
        in_area = np.array([bid in area for bid in ids], dtype=bool)
        self.internal_mask = self.svc & in_area[self.lf] & in_area[self.lt]
        self.tie_mask = self.svc & (in_area[self.lf] ^ in_area[self.lt])

        # slack-deleted base system
        self.keep = np.arange(self.n_bus) != self.slack
        self.red_pos = np.cumsum(self.keep) - 1  # full index -> reduced index
        full = _laplacian_csr(self.n_bus, self.lf[self.svc], self.lt[self.svc], self.lb[self.svc])
        if self.n_bus > 1:
            self.lu_net = _splu(full[self.keep][:, self.keep].tocsc())
            theta_red = self.lu_net.solve(self.injections[self.keep])
        else:
            self.lu_net = None
            theta_red = np.zeros(0)
        self.theta0 = self._expand(theta_red)
        self._theta0_red = theta_red
        self._direction_red: np.ndarray | None = None
        self._direction_full: np.ndarray | None = None

        # border and interior bookkeeping
        self.border_ids = part.border
        self.m = len(part.border)
        self.n_int = len(part.interior)
        self.border_pos = np.array([idx[b] for b in part.border], dtype=np.intp)
        self.interior_pos = np.array([idx[b] for b in part.interior], dtype=np.intp)
        self.sigma = np.array(part.sigma_a, dtype=float)
        self.p_border = self.injections[self.border_pos]
        self.p_interior = self.injections[self.interior_pos]
        border_local = {int(p): i for i, p in enumerate(self.border_pos)}
        interior_local = {int(p): i for i, p in enumerate(self.interior_pos)}
        self._border_local = border_local
        self._interior_local = interior_local

        # tie arrays: inflow at border bus = b * (theta_outside - theta_inside)
        t_loc, t_in, t_out, t_b = [], [], [], []
        for k in np.flatnonzero(self.tie_mask):
            u, v = int(self.lf[k]), int(self.lt[k])
            inside, outside = (u, v) if u in border_local else (v, u)
            t_loc.append(border_local[inside])
            t_in.append(inside)
            t_out.append(outside)
            t_b.append(self.lb[k])
        self.tie_local = np.array(t_loc, dtype=np.intp)
        self.tie_inside = np.array(t_in, dtype=np.intp)
        self.tie_outside = np.array(t_out, dtype=np.intp)
        self.tie_b = np.array(t_b, dtype=float)

        # isolated-area blocks and base reduction vectors
        self.b_mm, self.b_mn, b_nn = self._area_blocks()
        self.lu_area = _splu(b_nn) if self.n_int else None
        sigma = self.sigma
        self.s0 = self.b_mm @ sigma
        if self.n_int:
            self.y0 = self.lu_area.solve(self.b_mn.T @ sigma)
            self.z0 = self.lu_area.solve(self.p_interior)
        else:
            self.y0 = np.zeros(0)
            self.z0 = np.zeros(0)
        self.r0 = self.s0 - self.b_mn @ self.y0
        self.q0 = self.b_mn @ self.z0

        # outage classification
        svc_edges = [
            (int(self.line_ids[k]), int(self.lf[k]), int(self.lt[k]))
            for k in np.flatnonzero(self.svc)
        ]
        self.network_bridges = _bridges(range(self.n_bus), svc_edges)
        internal_edges = [
            (int(self.line_ids[k]), int(self.lf[k]), int(self.lt[k]))
            for k in np.flatnonzero(self.internal_mask)
        ]
        area_positions = [idx[b] for b in sorted(area)]
        self.internal_bridges = _bridges(area_positions, internal_edges)

    # -- helpers ---------------------------------------------------------

    def _expand(self, reduced: np.ndarray) -> np.ndarray:
        theta = np.zeros(self.n_bus)
        theta[self.keep] = reduced
        return theta

    def _area_blocks(self, exclude: int | None = None):
        """Isolated-area susceptance blocks, optionally minus one line position."""
        mask = self.internal_mask.copy()
        if exclude is not None:
            mask[exclude] = False
        ks = np.flatnonzero(mask)
        n_local = self.m + self.n_int
        loc = np.empty(self.n_bus, dtype=np.intp)
        for p, i in self._border_local.items():
            loc[p] = i
        for p, i in self._interior_local.items():
            loc[p] = self.m + i
        f = loc[self.lf[ks]]
        t = loc[self.lt[ks]]
        b = self.lb[ks]
        full = _laplacian_csr(n_local, f, t, b)
        b_mm = full[: self.m, : self.m].toarray()
        b_mn = full[: self.m, self.m:].toarray()
        b_nn = full[self.m:, self.m:].tocsc()
        return b_mm, b_mn, b_nn

    def area_line_ids(self) -> list[int]:
        """In-service lines with both endpoints inside the area, ascending id."""
        return [int(i) for i in self.line_ids[self.internal_mask]]

    def classify(self, line_id: int) -> str:
        """'islanding', 'degenerate' (splits the area internally), or 'ok'."""
        k = self.pos_of_line[line_id]
        if not self.internal_mask[k]:
            raise NumericError(f"line {line_id} is not an in-service area line")
        if line_id in self.network_bridges:
            return "islanding"
        if line_id in self.internal_bridges:
            return "degenerate"
        return "ok"

    # -- network solves --------------------------------------------------

    def set_direction(self, delta: np.ndarray) -> None:
        """Install a stress direction (full bus order) for severity solves."""
        delta = np.asarray(delta, dtype=float)
        self._direction_full = delta
        if self.lu_net is not None:
            self._direction_red = self.lu_net.solve(delta[self.keep])
        else:
            self._direction_red = np.zeros(0)

    def base_direction_response(self) -> np.ndarray:
        if self._direction_red is None:
            raise NumericError("no stress direction installed")
        return self._expand(self._direction_red)

    def post_network(self, line_id: int, with_direction: bool = False):
        """Post-outage angles, plus the direction response when asked.

        Returns (theta, dtheta). dtheta is None unless with_direction,
        in which case a stress direction must have been installed.
        """
        k = self.pos_of_line[line_id]
        if with_direction and self._direction_red is None:
            raise NumericError("no stress direction installed")
        if self.fast:
            u, v, b = int(self.lf[k]), int(self.lt[k]), float(self.lb[k])
            a = np.zeros(self.n_bus - 1)
            if u != self.slack:
                a[self.red_pos[u]] += 1.0
            if v != self.slack:
                a[self.red_pos[v]] -= 1.0
            g = self.lu_net.solve(a)
            den = 1.0 - b * float(a @ g)
            if abs(den) < _SM_TOL:
                raise NumericError(
                    f"rank-one update for line {line_id} is singular; outage islands the network"
                )

            def corrected(base_red: np.ndarray) -> np.ndarray:
                return base_red + (b * float(a @ base_red) / den) * g

            theta = self._expand(corrected(self._theta0_red))
            dtheta = self._expand(corrected(self._direction_red)) if with_direction else None
            return theta, dtheta

        mask = self.svc.copy()
        mask[k] = False
        full = _laplacian_csr(self.n_bus, self.lf[mask], self.lt[mask], self.lb[mask])
        lu = _splu(full[self.keep][:, self.keep].tocsc())
        theta = self._expand(lu.solve(self.injections[self.keep]))
        dtheta = None
        if with_direction:
            dtheta = self._expand(lu.solve(self._direction_full[self.keep]))
        return theta, dtheta

    # -- area reduction per outage ----------------------------------------

    def tie_inflow(self, theta: np.ndarray) -> np.ndarray:
        into = np.zeros(self.m)
        if len(self.tie_b):
            np.add.at(
                into,
                self.tie_local,
                self.tie_b * (theta[self.tie_outside] - theta[self.tie_inside]),
            )
        return into

    def post_area(self, line_id: int, theta: np.ndarray):
        """Post-outage area quantities from the post-outage network angles.

        Returns (susceptance, recomputed angle, power). The outage must
        be a non-bridge area line: the internal subgraph stays connected,
        which keeps the interior block nonsingular and the susceptance
        positive.
        """
        k = self.pos_of_line[line_id]
        sigma = self.sigma
        theta_border = theta[self.border_pos]
        p_total = self.p_border + self.tie_inflow(theta)

        if self.fast:
            r, reduced_inj = self._post_reduction_fast(k, p_total)
        else:
            b_mm, b_mn, b_nn = self._area_blocks(exclude=k)
            if self.n_int:
                lu = _splu(b_nn)
                y = lu.solve(b_mn.T @ sigma)
                z = lu.solve(self.p_interior)
            else:
                y = np.zeros(0)
                z = np.zeros(0)
            r = b_mm @ sigma - b_mn @ y
            reduced_inj = p_total - b_mn @ z

        susceptance = float(r @ sigma)
        if susceptance <= _SM_TOL:
            raise NumericError(
                f"post-outage area susceptance {susceptance:.3e} is not positive for line {line_id}"
            )
        angle = float(r @ theta_border) / susceptance
        power = float(sigma @ reduced_inj)
        return susceptance, angle, power

    def _post_reduction_fast(self, k: int, p_total: np.ndarray):
        """Rank-one update of the interior elimination for one removed line.

        Returns (r, reduced_inj) with r the side-a selector row of the
        post-outage reduced matrix (transposed) and reduced_inj the
        post-outage reduced injections.
        """
        u, v, b = int(self.lf[k]), int(self.lt[k]), float(self.lb[k])
        sigma = self.sigma
        u_border = u in self._border_local
        v_border = v in self._border_local

        if u_border and v_border:
            i, j = self._border_local[u], self._border_local[v]
            abar = np.zeros(self.m)
            abar[i] = 1.0
            abar[j] = -1.0
            r = self.r0 - b * float(abar @ sigma) * abar
            reduced_inj = p_total - self.q0
            return r, reduced_inj

        if not u_border and not v_border:
            p, q = self._interior_local[u], self._interior_local[v]
            a = np.zeros(self.n_int)
            a[p] = 1.0
            a[q] = -1.0
            g = self.lu_area.solve(a)
            den = 1.0 - b * float(a @ g)
            if abs(den) < _SM_TOL:
                raise NumericError(
                    f"rank-one interior update is singular for line {int(self.line_ids[k])}"
                )
            y = self.y0 + (b * float(a @ self.y0) / den) * g
            z = self.z0 + (b * float(a @ self.z0) / den) * g
            r = self.s0 - self.b_mn @ y
            reduced_inj = p_total - self.b_mn @ z
            return r, reduced_inj

        # mixed: one border endpoint, one interior endpoint
        m_loc = self._border_local[u] if u_border else self._border_local[v]
        p_loc = self._interior_local[v] if u_border else self._interior_local[u]
        e_p = np.zeros(self.n_int)
        e_p[p_loc] = 1.0
        g = self.lu_area.solve(e_p)
        den = 1.0 - b * float(g[p_loc])
        if abs(den) < _SM_TOL:
            raise NumericError(
                f"rank-one interior update is singular for line {int(self.line_ids[k])}"
            )
        y_hat = self.y0 + b * sigma[m_loc] * g
        y = y_hat + (b * float(y_hat[p_loc]) / den) * g
        z = self.z0 + (b * float(self.z0[p_loc]) / den) * g
        r = self.s0 - self.b_mn @ y
        r[m_loc] -= b * sigma[m_loc] + b * float(y[p_loc])
        reduced_inj = p_total - self.b_mn @ z
        reduced_inj[m_loc] -= b * float(z[p_loc])
        return r, reduced_inj

    # -- severity support --------------------------------------------------

    def internal_flows(self, theta: np.ndarray, exclude_line: int | None = None):
        """Flows on in-service area lines: (ids, flows, limits), ascending id."""
        mask = self.internal_mask
        if exclude_line is not None:
            mask = mask.copy()
            mask[self.pos_of_line[exclude_line]] = False
        ks = np.flatnonzero(mask)
        f = self.lb[ks] * (theta[self.lf[ks]] - theta[self.lt[ks]])
        return self.line_ids[ks], f, self.llim[ks]

    def side_a_inflow(self, theta: np.ndarray) -> float:
        p_total = self.p_border + self.tie_inflow(theta)
        return float(self.sigma @ p_total)


def run_per_line(
    line_ids: Iterable[int],
    make_engine: Callable[[], OutageEngine],
    work: Callable[[OutageEngine, int], object],
    jobs: int,
) -> dict[int, object]:
    """Evaluate work(engine, line) per line, one engine per worker.

    Every worker builds its engine from the same inputs, so results do
    not depend on how lines are split across workers.
    """
    ids = sorted(int(i) for i in line_ids)
    if jobs is None or jobs <= 1 or len(ids) < 2:
        engine = make_engine()
        return {lid: work(engine, lid) for lid in ids}

    jobs = min(jobs, len(ids))
    chunks = [list(c) for c in np.array_split(np.array(ids, dtype=int), jobs) if len(c)]

    def run_chunk(chunk: list[int]) -> list[tuple[int, object]]:
        engine = make_engine()
        return [(lid, work(engine, lid)) for lid in chunk]

    out: dict[int, object] = {}
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        for pairs in pool.map(run_chunk, chunks):
            for lid, res in pairs:
                out[lid] = res
    return out
