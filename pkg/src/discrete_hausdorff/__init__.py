"""Discrete s-dimensional measure and Hausdorff-measure emulation on finite grids."""
from .generators import SetSpec, analytic_reference, cantor_intervals, load_spec, render
from .grid import (
    DeltaInterval,
    GridScale,
    GridSet,
    cardinality,
    complement,
    dilate,
    discrete_lebesgue,
    erode,
    intersect,
    make_gridset,
    union,
)
from .measure import (
    MeasureParams,
    MeasureReport,
    Partition,
    ScheduleEntry,
    box_count_estimate,
    classical_cover_measure,
    coarsen_partition,
    dimension_estimate,
    fattened_cover_superset,
    h_delta_s,
    h_delta_s_oracle,
    h_delta_s_value,
    lebesgue_bounds,
    standard_cover,
    theorem_rhs,
)

__version__ = "0.1.0"
