"""Area-angle monitoring for DC-modeled power networks.

The library reduces a designated area onto its border buses, forms the
area angle (a weighted combination of border voltage angles), scans
single line outages inside the area, and rates each outage by the
maximum power the area can accept before an internal flow limit binds.
"""

from .areas import (
    AreaPartition,
    AreaSpec,
    dump_area,
    load_area_spec,
    parse_area_spec,
    partition_area,
    save_area,
    tie_line_ids,
    validate_area_spec,
)
from .dcflow import (
    AngleSolution,
    FlowSolution,
    SusceptanceMatrix,
    apply_outage,
    assemble_susceptance,
    line_flows,
    solve_angles,
)
from .errors import (
    AreaAngleError,
    DegenerateAreaError,
    IslandingOutageError,
    NumericError,
    ParseError,
    ValidationError,
)
from .netgen import generate_case
from .network import (
    Bus,
    Line,
    Network,
    dump_case,
    find_bridges,
    is_islanding,
    load_case,
    parse_case,
    save_case,
)
from .outage import (
    OutageResult,
    RatioStats,
    monitored_angle,
    ratio_statistics,
    recomputed_angle,
    scan_outages,
)
from .reduction import (
    SMALL_WEIGHT,
    BorderInflow,
    ReducedArea,
    area_quantities,
    area_susceptance,
    border_inflow,
    kron_reduce,
    monitored_weights,
    reduce_area,
)
from .report import (
    CSV_HEADER,
    ScanReport,
    build_scan_report,
    render_baseline_csv,
    render_baseline_json,
    render_baseline_table,
    render_scan_csv,
    render_scan_json,
    render_scan_table,
    report_meta,
    round12,
)
from .severity import (
    SeverityResult,
    StressDirection,
    max_power_into_area,
    severity_scan,
    stress_direction,
)

__version__ = "0.1.0"

__all__ = [
    "AngleSolution", "AreaAngleError", "AreaPartition", "AreaSpec",
    "BorderInflow", "Bus", "CSV_HEADER", "DegenerateAreaError",
    "FlowSolution", "IslandingOutageError", "Line", "Network",
    "NumericError", "OutageResult", "ParseError", "RatioStats",
    "ReducedArea", "SMALL_WEIGHT", "ScanReport", "SeverityResult",
    "StressDirection", "SusceptanceMatrix", "ValidationError",
    "apply_outage", "area_quantities", "area_susceptance",
    "assemble_susceptance", "border_inflow", "build_scan_report",
    "dump_area", "dump_case", "find_bridges", "generate_case",
    "is_islanding", "kron_reduce", "line_flows", "load_area_spec",
    "load_case", "max_power_into_area", "monitored_angle",
    "monitored_weights", "parse_area_spec", "parse_case",
    "partition_area", "ratio_statistics", "recomputed_angle",
    "reduce_area", "render_baseline_csv", "render_baseline_json",
    "render_baseline_table", "render_scan_csv", "render_scan_json",
    "render_scan_table", "report_meta", "round12", "save_area",
    "save_case", "scan_outages", "severity_scan", "solve_angles",
    "stress_direction", "tie_line_ids", "validate_area_spec",
    "__version__",
]
