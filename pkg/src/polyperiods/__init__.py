"""Period matrices of discrete Riemann surfaces.

A polyhedral surface (a triangle mesh or a square-tiled gluing) carries a
discrete conformal structure: a positive weight on every edge. The package
builds the double graph and its quad graph, a symplectic homology basis,
harmonic and holomorphic 1-forms, and the period matrix, and compares
period matrices after Siegel reduction.
"""

from .conformal import (
    CellComplex,
    WeightedSurfaceGraph,
    WeightScheme,
    build_structure,
    build_structure_from_cells,
)
from .errors import DelaunayViolation, MeshError, NormalizationError, SolverError, TopologyError
from .homology import HomologyBasis, homotopy_basis
from .mesh_io import EmbeddedMesh, edge_lengths, load_mesh, load_mesh_file, topology_report
from .periods import PeriodResult, compute_periods, riemann_check
from .siegel import ReducedMatrix, SymplecticTransform, compare, siegel_reduce
from .surfaces import GluingSpec, build_square_tiled, builtin_spec, flat_torus, reference

__version__ = "0.1.0"

__all__ = [
    "CellComplex",
    "WeightedSurfaceGraph",
    "WeightScheme",
    "build_structure",
    "build_structure_from_cells",
    "DelaunayViolation",
    "MeshError",
    "NormalizationError",
    "SolverError",
    "TopologyError",
    "HomologyBasis",
    "homotopy_basis",
    "EmbeddedMesh",
    "load_mesh",
    "load_mesh_file",
    "topology_report",
    "edge_lengths",
    "PeriodResult",
    "compute_periods",
    "riemann_check",
    "ReducedMatrix",
    "SymplecticTransform",
    "compare",
    "siegel_reduce",
    "GluingSpec",
    "build_square_tiled",
    "builtin_spec",
    "flat_torus",
    "reference",
]
