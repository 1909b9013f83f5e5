"""Spatial discretizations of torus homeomorphisms.

Discretizes maps of the 2-torus onto uniform grids, analyzes the resulting
finite dynamical systems (maximal invariant set, cycles, basins, canonical
invariant measures), builds certified cyclic approximations, and runs
resolution sweeps with CSV/figure/density-image reporting.
"""

from .grid import (
    CellIndex,
    GridSpec,
    TorusPoint,
    cell_center,
    cell_from_lin,
    lin,
    make_grid,
    project,
    wrap_distance,
)
from .torusmaps import (
    DiscreteMap,
    Identity,
    LinearAuto,
    MapExpr,
    ScalarField,
    ShearX,
    ShearY,
    TanhTerm,
    TrigTerm,
    builtin_map,
    discretize,
    eval_map,
    grid_sup_distance,
    map_sup_distance,
)
from .funcgraph import (
    BasinLabeling,
    FuncGraphStats,
    analyze,
    epsilon_weak_mixing,
    naive_oracle,
    random_endomap,
)
from .measures import (
    DensityImage,
    DiscreteMeasure,
    coarse_density,
    coarse_total_variation,
    invariant_measure,
    pushforward,
    restricted_measure,
)
from .lax import (
    LaxCertificate,
    alpern_cyclize,
    collapse_to_short_cycle,
    coarsen_image,
    cube_adjacency,
    hall_matching,
    lax_cyclic_approximation,
    replicate_cycles,
)
from .shadowing import (
    ShadowReport,
    hausdorff_distance,
    omega_convergence_series,
    shadow_fraction,
    shadowing_defect,
)
from .config import SweepConfig, map_from_doc, map_to_doc, parse_config
from .sweep import SweepRow, property_frequency, run_sweep, rows_to_csv
from .imaging import render_density_pgm, render_density_ppm

__version__ = "0.1.0"
