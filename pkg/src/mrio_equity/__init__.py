"""Footprint flows, the ecological economic equality index and trade networks
from environmentally extended multi-regional input-output tables."""

from .equity import (
    QUADRANTS,
    EeeiRecord,
    classify_quadrant,
    distance_matrix,
    eeei,
    eeei_distance,
    eeei_records,
    minmax_scale,
    net_flows,
)
from .errors import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    LabelMismatchError,
    MissingFileError,
    MrioError,
    NonNumericCellError,
    NumericalError,
    SingularSystemError,
    UnknownYearError,
    UnmappedRegionError,
)
from .export import GexfFormatError, read_gexf, write_gexf, write_results
from .flows import DEFAULT_PERIODS, Period, RegionFlowMatrix
from .footprint import (
    LeontiefSolver,
    RunReport,
    TechnologyModel,
    compute_footprints,
    compute_output,
    footprint_flows,
    intensity,
    leontief_inverse,
    period_aggregate,
    technical_coefficients,
)
from .ingest import (
    AggregationMap,
    MrioSnapshot,
    RegionSchema,
    aggregate_flows,
    exiobase_aggregation_map,
    load_aggregation_map,
    parse_mrio,
    validate_balance,
    write_canonical,
)
from .network import (
    Edge,
    Node,
    PageRankConvergenceWarning,
    TradeGraph,
    build_inequality_graph,
    build_net_flow_graph,
    clustering_coefficients,
    network_metrics,
    pagerank,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationMap",
    "ConfigError",
    "DataError",
    "DEFAULT_PERIODS",
    "DimensionMismatchError",
    "Edge",
    "EeeiRecord",
    "GexfFormatError",
    "LabelMismatchError",
    "LeontiefSolver",
    "MissingFileError",
    "MrioError",
    "MrioSnapshot",
    "Node",
    "NonNumericCellError",
    "NumericalError",
    "PageRankConvergenceWarning",
    "Period",
    "QUADRANTS",
    "RegionFlowMatrix",
    "RegionSchema",
    "RunReport",
    "SingularSystemError",
    "TechnologyModel",
    "TradeGraph",
    "UnknownYearError",
    "UnmappedRegionError",
    "aggregate_flows",
    "build_inequality_graph",
    "build_net_flow_graph",
    "classify_quadrant",
    "clustering_coefficients",
    "compute_footprints",
    "compute_output",
    "distance_matrix",
    "eeei",
    "eeei_distance",
    "eeei_records",
    "exiobase_aggregation_map",
    "footprint_flows",
    "intensity",
    "leontief_inverse",
    "load_aggregation_map",
    "minmax_scale",
    "net_flows",
    "network_metrics",
    "pagerank",
    "parse_mrio",
    "period_aggregate",
    "read_gexf",
    "technical_coefficients",
    "validate_balance",
    "write_canonical",
    "write_gexf",
    "write_results",
]
