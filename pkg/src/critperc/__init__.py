"""Critical bond percolation on Z^2.

Lattice regions and reproducible configurations, open clusters and their
sizes, crossings and extremal circuits, the block construction used to steer
the largest cluster into a size window, Monte Carlo estimators and an exact
enumeration oracle.
"""

from importlib.metadata import PackageNotFoundError, version

from .clusters import (
    ClusterLabeling,
    annulus_reach_count,
    boundary_touch_count,
    c_in_out,
    circuit_cluster_size,
    circuit_reach,
    cluster_size_at,
    label_clusters,
    max_cluster_size,
)
from .estimate import Estimate
from .events import crossing_cluster_check, event_d, event_g, event_o
from .geometry import (
    ConstantsConfig,
    InfeasibleParameters,
    ParameterChoice,
    PartitionSpec,
    block_regions,
    build_partition,
    choose_parameters,
    parse_pi_model,
)
from .lattice import (
    Configuration,
    EdgeId,
    Region,
    RngSpec,
    SiteCoord,
    build_region,
    complete_outside,
    sample_configuration,
    transform_configuration,
)
from .oracle import (
    EnumerationTask,
    enumerate_conditional_expectation,
    enumerate_distribution,
    enumerate_expectation,
    enumerate_probability,
)
from .topology import (
    Circuit,
    has_dual_crossing,
    has_horizontal_crossing,
    has_open_circuit_in_annulus,
    has_vertical_crossing,
    innermost_closed_dual_circuit,
    outermost_open_circuit,
)

try:
    __version__ = version("critperc")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.0.0"

__all__ = [
    "Circuit",
    "ClusterLabeling",
    "Configuration",
    "ConstantsConfig",
    "EdgeId",
    "EnumerationTask",
    "Estimate",
    "InfeasibleParameters",
    "ParameterChoice",
    "PartitionSpec",
    "Region",
    "RngSpec",
    "SiteCoord",
    "annulus_reach_count",
    "block_regions",
    "boundary_touch_count",
    "build_partition",
    "build_region",
    "c_in_out",
    "choose_parameters",
    "circuit_cluster_size",
    "circuit_reach",
    "cluster_size_at",
    "complete_outside",
    "crossing_cluster_check",
    "enumerate_conditional_expectation",
    "enumerate_distribution",
    "enumerate_expectation",
    "enumerate_probability",
    "event_d",
    "event_g",
    "event_o",
    "has_dual_crossing",
    "has_horizontal_crossing",
    "has_open_circuit_in_annulus",
    "has_vertical_crossing",
    "innermost_closed_dual_circuit",
    "label_clusters",
    "max_cluster_size",
    "outermost_open_circuit",
    "parse_pi_model",
    "sample_configuration",
    "transform_configuration",
]
