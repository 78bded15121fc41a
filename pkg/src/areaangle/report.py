"""Report assembly and rendering: tables for humans, CSV and JSON for tools.

Every number is rounded to 12 significant digits before serialization,
and both text formats are produced from the rounded values, so a value
parsed back from the CSV equals the value parsed from the JSON bit for
bit. Row order follows the severity sort (ascending maximum power into
the area, then unbounded entries, then rows without numbers) with the
base case as the final row. Timestamps honor SOURCE_DATE_EPOCH so runs
can be made byte-reproducible.
"""

from __future__ import annotations

import json
import math
import os
import time
from datetime import datetime, timezone

from .outage import OutageResult, RatioStats
from .reduction import SMALL_WEIGHT, ReducedArea
from .severity import SeverityResult

CSV_HEADER = (
    "line_id,islanding,theta_monitored_deg,theta_recomputed_deg,"
    "b_area_post,p_area_post,ratio,max_power_in,binding_line"
)


def round12(x: float) -> float:
    """The float closest to x's 12-significant-digit decimal form."""
    return float(f"{x:.12g}")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _jsonable(x):
    return round12(x) if isinstance(x, float) else x


def _timestamp() -> str:
    stamp = os.environ.get("SOURCE_DATE_EPOCH")
    try:
        moment = int(stamp) if stamp else time.time()
    except ValueError:
        moment = time.time()
    return datetime.fromtimestamp(moment, tz=timezone.utc).isoformat()


def report_meta(case_path, area_path, version: str) -> dict:
    return {
        "tool": "areaangle",
        "version": version,
        "case": str(case_path),
        "area": str(area_path),
        "generated_at": _timestamp(),
    }


class ScanReport:
    """A finished scan: base quantities, per-line results, ratio stats."""

    def __init__(self, meta: dict, base: ReducedArea,
                 base_severity: SeverityResult | None,
                 outages: list[OutageResult],
                 severities: list[SeverityResult],
                 ratio_stats: RatioStats | None):
        self.meta = dict(meta)
        self.base = base
        self.base_severity = base_severity
        self.outages = list(outages)
        self.severity_by_line = {
            s.line_id: s for s in severities if s.line_id is not None
        }
        self.ratio_stats = ratio_stats

    def ordered(self) -> list[tuple[OutageResult, SeverityResult | None]]:
        """Outage rows in reporting order (severity ascending, flagged last)."""

        def key(res: OutageResult):
            sev = self.severity_by_line.get(res.line_id)
            if sev is not None and sev.max_power_in is not None:
                # order by the reported 12-digit value so tied outages
                # sort identically on every solve path
                return (0, round12(sev.max_power_in), res.line_id)
            if sev is not None and sev.unbounded:
                return (1, 0.0, res.line_id)
            return (2, 0.0, res.line_id)

        return [
            (res, self.severity_by_line.get(res.line_id))
            for res in sorted(self.outages, key=key)
        ]


def build_scan_report(meta: dict, base: ReducedArea, outages, severities,
                      ratio_stats: RatioStats | None) -> ScanReport:
    base_entries = [s for s in severities if s.line_id is None]
    per_line = [s for s in severities if s.line_id is not None]
    base_severity = base_entries[0] if base_entries else None
    return ScanReport(meta, base, base_severity, outages, per_line, ratio_stats)


def _severity_cells(sev: SeverityResult | None):
    if sev is None:
        return None, None
    if sev.unbounded:
        return "unbounded", None
    return sev.max_power_in, sev.binding_line


def _outage_cells(res: OutageResult, sev: SeverityResult | None) -> list:
    max_power, binding = _severity_cells(sev)
    deg = math.degrees
    return [
        res.line_id,
        res.islanding,
        None if res.theta_monitored is None else deg(res.theta_monitored),
        None if res.theta_recomputed is None else deg(res.theta_recomputed),
        res.b_area_post,
        res.p_area_post,
        res.ratio,
        max_power,
        binding,
    ]


def _base_cells(report: ScanReport) -> list:
    base = report.base
    max_power, binding = _severity_cells(report.base_severity)
    deg = math.degrees(base.angle)
    return [
        "base", False, deg, deg, base.susceptance, base.power, None, max_power, binding,
    ]


def render_scan_csv(report: ScanReport) -> str:
    rows = [CSV_HEADER]
    for res, sev in report.ordered():
        rows.append(",".join(_cell(c) for c in _outage_cells(res, sev)))
    rows.append(",".join(_cell(c) for c in _base_cells(report)))
    return "\n".join(rows) + "\n"


def _weight_entries(base: ReducedArea) -> list[dict]:
    entries = []
    for j, bus in enumerate(base.border):
        w = float(base.weights[j])
        entries.append({
            "bus_id": bus,
            "side": "a" if base.sigma_a[j] else "b",
            "weight": round12(w),
            "small_weight": abs(w) < SMALL_WEIGHT,
        })
    return entries


def _severity_json(sev: SeverityResult | None) -> dict:
    if sev is None:
        return {"max_power_in": None, "binding_line": None,
                "lambda_star": None, "unbounded": False}
    return {
        "max_power_in": _jsonable(sev.max_power_in),
        "binding_line": sev.binding_line,
        "lambda_star": _jsonable(sev.lambda_star),
        "unbounded": sev.unbounded,
    }


def render_scan_json(report: ScanReport) -> str:
    base = report.base
    doc = {
        "meta": report.meta,
        "base": {
            "theta_area_rad": round12(base.angle),
            "theta_area_deg": round12(math.degrees(base.angle)),
            "b_area": round12(base.susceptance),
            "p_area": round12(base.power),
            "weights": _weight_entries(base),
            **_severity_json(report.base_severity),
        },
        "outages": [],
        "ratio_stats": None,
    }
    for res, sev in report.ordered():
        deg = math.degrees
        doc["outages"].append({
            "line_id": res.line_id,
            "islanding": res.islanding,
            "degenerate": res.degenerate,
            "theta_monitored_deg": _jsonable(
                None if res.theta_monitored is None else deg(res.theta_monitored)),
            "theta_recomputed_deg": _jsonable(
                None if res.theta_recomputed is None else deg(res.theta_recomputed)),
            "b_area_post": _jsonable(res.b_area_post),
            "p_area_post": _jsonable(res.p_area_post),
            "ratio": _jsonable(res.ratio),
            "note": res.note,
            **_severity_json(sev),
        })
    if report.ratio_stats is not None:
        stats = report.ratio_stats
        doc["ratio_stats"] = {
            "mean": round12(stats.mean),
            "std_dev": round12(stats.std_dev),
            "min": round12(stats.minimum),
            "max": round12(stats.maximum),
            "count": stats.count,
        }
    return json.dumps(doc, indent=2) + "\n"


def render_scan_table(report: ScanReport) -> str:
    header = CSV_HEADER.split(",")
    body = [[_cell(c) or "-" for c in _outage_cells(res, sev)]
            for res, sev in report.ordered()]
    body.append([_cell(c) or "-" for c in _base_cells(report)])
    widths = [max(len(h), *(len(row[j]) for row in body))
              for j, h in enumerate(header)]
    lines = [
        "  ".join(h.ljust(widths[j]) for j, h in enumerate(header)),
        "  ".join("-" * widths[j] for j in range(len(header))),
    ]
    for row in body:
        lines.append("  ".join(row[j].ljust(widths[j]) for j in range(len(header))))
    if report.ratio_stats is not None:
        s = report.ratio_stats
        lines.append("")
        lines.append(
            f"ratio over {s.count} outages: mean {_cell(s.mean)}, "
            f"std {_cell(s.std_dev)}, range [{_cell(s.minimum)}, {_cell(s.maximum)}]"
        )
    return "\n".join(lines) + "\n"


def render_baseline_csv(base: ReducedArea) -> str:
    rows = ["field,value"]
    rows.append(f"theta_area_rad,{_cell(base.angle)}")
    rows.append(f"theta_area_deg,{_cell(math.degrees(base.angle))}")
    rows.append(f"b_area,{_cell(base.susceptance)}")
    rows.append(f"p_area,{_cell(base.power)}")
    for entry in _weight_entries(base):
        rows.append(f"weight_bus_{entry['bus_id']},{_cell(entry['weight'])}")
    small = [str(e["bus_id"]) for e in _weight_entries(base) if e["small_weight"]]
    rows.append("small_weight_buses," + ";".join(small))
    return "\n".join(rows) + "\n"


def render_baseline_json(meta: dict, base: ReducedArea) -> str:
    doc = {
        "meta": meta,
        "theta_area_rad": round12(base.angle),
        "theta_area_deg": round12(math.degrees(base.angle)),
        "b_area": round12(base.susceptance),
        "p_area": round12(base.power),
        "weights": _weight_entries(base),
    }
    return json.dumps(doc, indent=2) + "\n"


def render_baseline_table(base: ReducedArea) -> str:
    lines = [
        "base area quantities",
        f"  theta_area  {_cell(math.degrees(base.angle))} deg"
        f"  ({_cell(base.angle)} rad)",
        f"  b_area      {_cell(base.susceptance)} pu",
        f"  p_area      {_cell(base.power)} pu",
        "",
        f"border weights (|w| < {SMALL_WEIGHT:g} marked small):",
        "  bus    side  weight",
    ]
    for entry in _weight_entries(base):
        mark = "  (small)" if entry["small_weight"] else ""
        lines.append(
            f"  {entry['bus_id']:<5}  {entry['side']:<4}  {_cell(entry['weight'])}{mark}"
        )
    return "\n".join(lines) + "\n"
