"""Euler-characteristic functionals on weighted branched surfaces.

A sector with Euler characteristic chi and k corners contributes
chi - k/4 per unit of weight; the weighted total is linear in the weight
vector.  Everything is exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from . import cones, linalg
from .model import (
    BranchedSurfacePresentation,
    Sector,
    WeightVector,
    induced_boundary_rows,
)
from .reports import AuditFinding, AuditReport


def chi_geometric(sector: Union[Sector, tuple[int, int]]) -> Fraction:
    """Geometric Euler characteristic chi - k/4 of a surface with corners."""
    if isinstance(sector, Sector):
        euler, corners = sector.euler_char, sector.corner_count
    else:
        euler, corners = sector
    if corners < 0:
        raise ValueError("corner count must be nonnegative")
    return Fraction(euler) - Fraction(corners, 4)


@dataclass(frozen=True)
class ChiFunctional:
    """Linear functional v -> sum of v_i * chi_geometric(sector i)."""

    coefficients: Mapping[str, Fraction]

    @staticmethod
    def of(bs: BranchedSurfacePresentation) -> "ChiFunctional":
        return ChiFunctional({s.name: chi_geometric(s) for s in bs.sectors})

    def evaluate(self, v: WeightVector) -> Fraction:
        v.require_index(self.coefficients.keys(), "sector weight vector")
        return sum((v[k] * c for k, c in self.coefficients.items()), Fraction(0))


def chi_functional(bs: BranchedSurfacePresentation, v: WeightVector) -> Fraction:
    """Euler characteristic of the weighted lamination carried with weights v."""
    return ChiFunctional.of(bs).evaluate(v)


def find_integer_multiple(
    bs: BranchedSurfacePresentation, w: WeightVector
) -> tuple[int, WeightVector] | None:
    """An integer-weight carried surface bounding k parallel copies of w.

    Picks a rational point u of the fiber over w (a vertex), then clears
    denominators: k0 clears w itself and k1 clears k0*u, giving v = k0*k1*u
    with integer entries and boundary k*w.  Returns None exactly when the
    fiber is empty.  k is not guaranteed minimal.
    """
    fiber = cones.fiber_polytope(bs, w)
    u = fiber.sample_vertex()
    if u is None:
        return None
    k0 = linalg.clear_denominators(w.entries.values())
    k1 = linalg.clear_denominators(v * k0 for v in u.entries.values())
    k = k0 * k1
    v = u.scaled(k)
    assert v.is_integral()
    return k, v


def closed_chi_audit(bs: BranchedSurfacePresentation) -> AuditReport:
    """Check the declared asphericity of a presentation against its closed
    directions.

    Enumerates the vertices of {v in C(B) : boundary(v) = 0, sum v = 1};
    a vertex with positive Euler characteristic is a weighted closed
    surface of positive chi, which an aspherical presentation cannot
    carry, so the declared flag is untenable.
    """
    if not bs.aspherical:
        raise ValueError(f"presentation {bs.name!r} is not flagged aspherical")
    names = bs.sector_names
    rows = [tuple(eq.get(n, 0) for n in names) for eq in bs.branch_equations]
    rows += [tuple(row) for row in induced_boundary_rows(bs)]
    closed_cone = cones.ConeRepr(names, tuple(rows))
    cell = cones.cell_vertices(closed_cone)
    functional = ChiFunctional.of(bs)
    findings = []
    for vertex in cell.vertices:
        value = functional.evaluate(vertex)
        if value > 0:
            findings.append(
                AuditFinding(
                    "asphericity-contradiction",
                    f"closed direction with chi = {value} > 0 carried by {bs.name!r}",
                    {"vertex": dict(vertex.entries), "chi": value},
                )
            )
    return AuditReport(
        subject=f"closed-chi audit of {bs.name}",
        checked=len(cell.vertices),
        findings=tuple(findings),
    )
