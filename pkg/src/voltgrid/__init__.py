"""Storage dispatch from a piecewise-kernel integral model, with a day-ahead
load forecasting harness feeding it."""

from .errors import DataError, SolverError, VoltgridError
from .storage import (
    DispatchReport,
    StorageSpec,
    Violation,
    check_constraints,
    count_cycles,
    dispatch,
    imbalance,
    integrate_cumulative,
    lifetime,
    min_capacity,
    soc_trajectory,
    storage_spec_from_config,
)
from .timeseries import (
    AlignedFrame,
    CsvSpec,
    TimeSeries,
    align_hourly,
    block_split,
    calendar_features,
    ema,
    lag,
    load_holidays,
    parse_timeseries_csv,
    previous_day_stats,
    read_frame_csv,
    split_indices,
    write_frame_csv,
)
from .volterra import (
    BandPartition,
    Grid,
    KernelSpec,
    SolveResult,
    estimate_order,
    forward_apply,
    kernel_from_config,
    load_kernel,
    segment_cells,
    solve_apf,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "SolverError",
    "VoltgridError",
    "DispatchReport",
    "StorageSpec",
    "Violation",
    "check_constraints",
    "count_cycles",
    "dispatch",
    "imbalance",
    "integrate_cumulative",
    "lifetime",
    "min_capacity",
    "soc_trajectory",
    "storage_spec_from_config",
    "AlignedFrame",
    "CsvSpec",
    "TimeSeries",
    "align_hourly",
    "block_split",
    "calendar_features",
    "ema",
    "lag",
    "load_holidays",
    "parse_timeseries_csv",
    "previous_day_stats",
    "read_frame_csv",
    "split_indices",
    "write_frame_csv",
    "BandPartition",
    "Grid",
    "KernelSpec",
    "SolveResult",
    "estimate_order",
    "forward_apply",
    "kernel_from_config",
    "load_kernel",
    "segment_cells",
    "solve_apf",
    "__version__",
]
