"""lamcone: exact-arithmetic workbench for oriented measured train tracks
and branched surfaces given combinatorially.

Weight cones, Euler-characteristic functionals, boundary maps, the
maximal-chi function X over a finite family of carriers, and prelamination
dynamics (separatrix tracing, splitting, multicurve decomposition), all
over exact rationals.
"""

from .chi import ChiFunctional, chi_functional, chi_geometric, closed_chi_audit, find_integer_multiple
from .cones import (
    BoundaryMap,
    CellVertices,
    ConeRepr,
    FiberPolytope,
    boundary_map,
    build_cone,
    cell_vertices,
    contains,
    fiber_polytope,
    interior_point,
)
from .dynamics import (
    Component,
    IrreducibilityResult,
    MoveRecord,
    StrandModel,
    TraceResult,
    components,
    is_irreducible,
    pinch,
    split_at_cusp,
    strand_model,
    trace_separatrix,
)
from .lamfile import (
    Document,
    LamError,
    LamSemanticError,
    LamSyntaxError,
    LamValidationError,
    NamedFamily,
    NamedWeights,
    document_json,
    parse_document,
    serialize_document,
)
from .maxchi import (
    INFEASIBLE,
    UNBOUNDED,
    AdditivityReport,
    Family,
    PLProfile,
    XResult,
    additivity_check,
    audit_structure,
    close_under_sums,
    direct_sum,
    profile,
    x_family,
    x_single,
)
from .model import (
    BranchedSurfacePresentation,
    Cusp,
    IndexMismatchError,
    ScallopedSummary,
    Sector,
    Segment,
    Switch,
    TrainTrack,
    ValidationReport,
    Violation,
    WeightVector,
    scalloped_summary,
    validate_presentation,
    validate_track,
)
from .reports import AuditFinding, AuditReport

__version__ = "0.1.0"
