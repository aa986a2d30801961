"""Exact polyhedral computation for weight cones and fiber polytopes.

Cones are given by integer equality rows plus nonnegativity of all
variables.  Vertex enumeration uses incremental double description over
Fractions with rays normalized to sum 1; the insertion order of constraints
is lexicographic and all tie-breaks follow variable index order, so vertex
lists are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

from . import linalg, simplex
from .model import (
    BranchedSurfacePresentation,
    IndexMismatchError,
    TrainTrack,
    WeightVector,
    induced_boundary_rows,
    switch_equation_rows,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class ConeRepr:
    """C = {w >= 0 : E w = 0} with an explicit variable order."""

    variables: tuple[str, ...]
    equalities: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        rows = []
        for row in self.equalities:
            clean = tuple(int(x) for x in row)
            if len(clean) != len(self.variables):
                raise ValueError("equality row length does not match variable count")
            rows.append(clean)
        object.__setattr__(self, "equalities", tuple(rows))

    @cached_property
    def solution_dim(self) -> int:
        """Dimension of the linear solution space of the equalities."""
        if not self.equalities:
            return len(self.variables)
        return len(self.variables) - linalg.rank(linalg.to_fractions(self.equalities))

    def vector_of(self, w: WeightVector) -> list[Fraction]:
        w.require_index(self.variables)
        return [w[v] for v in self.variables]

    def contains(self, w: WeightVector) -> bool:
        vec = self.vector_of(w)
        if any(x < 0 for x in vec):
            return False
        return all(
            sum((Fraction(c) * x for c, x in zip(row, vec)), _ZERO) == 0
            for row in self.equalities
        )


@dataclass(frozen=True)
class CellVertices:
    """Vertices of the projective cell: the slice of a cone by sum(w) = 1."""

    variables: tuple[str, ...]
    vertices: tuple[WeightVector, ...]

    def as_tuples(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(v[name] for name in self.variables) for v in self.vertices)


@dataclass(frozen=True)
class BoundaryMap:
    """Integer matrix taking sector weights to induced boundary weights."""

    sectors: tuple[str, ...]
    segments: tuple[str, ...]
    matrix: tuple[tuple[int, ...], ...]  # one row per segment

    def apply(self, v: WeightVector) -> WeightVector:
        v.require_index(self.sectors)
        vec = [v[s] for s in self.sectors]
        return WeightVector(
            {
                seg: sum((Fraction(c) * x for c, x in zip(row, vec)), _ZERO)
                for seg, row in zip(self.segments, self.matrix)
            }
        )

    def column_sum(self, sector: str) -> int:
        j = self.sectors.index(sector)
        return sum(row[j] for row in self.matrix)


@dataclass(frozen=True)
class FiberPolytope:
    """{v >= 0 : branch equations hold and the induced boundary equals w}.

    Stored as integer rows A with integer right-hand side b, so the set is
    {v >= 0 : A v = b}.  Possibly empty; emptiness is decided exactly.
    """

    variables: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]
    rhs: tuple[int, ...]

    def lp_data(self) -> tuple[list[list[Fraction]], list[Fraction]]:
        a = [[Fraction(x) for x in row] for row in self.rows]
        b = [Fraction(x) for x in self.rhs]
        return a, b

    @cached_property
    def is_empty(self) -> bool:
        a, b = self.lp_data()
        return simplex.feasible_point(a, b, len(self.variables)) is None

    def sample_vertex(self) -> WeightVector | None:
        """One vertex (basic feasible solution), or None when empty."""
        a, b = self.lp_data()
        point = simplex.feasible_point(a, b, len(self.variables))
        if point is None:
            return None
        return WeightVector(dict(zip(self.variables, point)))

    def vertices(self) -> tuple[WeightVector, ...]:
        """All vertices, from double description of the homogenization."""
        rays = _homogenized_rays(self.rows, self.rhs, len(self.variables))
        verts = []
        for ray in rays:
            t = ray[-1]
            if t > 0:
                verts.append(WeightVector(dict(zip(self.variables, (x / t for x in ray[:-1])))))
        return tuple(verts)

    def recession_rays(self) -> tuple[WeightVector, ...]:
        """Extreme closed directions: rays of {v >= 0 : A v = 0}, sum 1."""
        rays = _homogenized_rays(self.rows, self.rhs, len(self.variables))
        out = []
        for ray in rays:
            if ray[-1] == 0:
                total = sum(ray[:-1], _ZERO)
                out.append(WeightVector(dict(zip(self.variables, (x / total for x in ray[:-1])))))
        return tuple(out)


def build_cone(source: Union[TrainTrack, BranchedSurfacePresentation]) -> ConeRepr:
    """Weight cone of a track (switch equations) or presentation (branch
    equations)."""
    if isinstance(source, TrainTrack):
        return ConeRepr(source.segment_names, tuple(map(tuple, switch_equation_rows(source))))
    if isinstance(source, BranchedSurfacePresentation):
        names = source.sector_names
        rows = tuple(tuple(eq.get(n, 0) for n in names) for eq in source.branch_equations)
        return ConeRepr(names, rows)
    raise TypeError(f"cannot build a cone from {type(source).__name__}")


def contains(cone: ConeRepr, w: WeightVector) -> bool:
    """Exact membership: E w = 0 and w >= 0."""
    return cone.contains(w)


def interior_point(cone: ConeRepr) -> WeightVector | None:
    """A rational point of the cone with all entries strictly positive,
    or None when the cone misses the open positive orthant.

    Solves max t subject to E w = 0, w_i - t >= 0, sum w = 1 exactly; a
    positive optimum certifies the fully-carried case.
    """
    n = len(cone.variables)
    if n == 0:
        return WeightVector({})
    # variables: w_0..w_{n-1}, t, s_0..s_{n-1}
    width = 2 * n + 1
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for eq in cone.equalities:
        rows.append([Fraction(c) for c in eq] + [_ZERO] * (n + 1))
        rhs.append(_ZERO)
    for i in range(n):
        row = [_ZERO] * width
        row[i] = _ONE
        row[n] = -_ONE
        row[n + 1 + i] = -_ONE
        rows.append(row)
        rhs.append(_ZERO)
    rows.append([_ONE] * n + [_ZERO] * (n + 1))
    rhs.append(_ONE)
    cost = [_ZERO] * width
    cost[n] = _ONE
    res = simplex.solve_lp(rows, rhs, cost)
    if res.status != simplex.OPTIMAL or res.value == 0:
        return None
    return WeightVector(dict(zip(cone.variables, res.solution[:n])))


def cell_vertices(cone: ConeRepr) -> CellVertices:
    """Complete vertex list of {w in C : sum w = 1}, duplicate-free."""
    n = len(cone.variables)
    rays = _double_description([list(map(Fraction, row)) for row in cone.equalities], n)
    verts = tuple(WeightVector(dict(zip(cone.variables, ray))) for ray in rays)
    return CellVertices(cone.variables, verts)


def boundary_map(bs: BranchedSurfacePresentation) -> BoundaryMap:
    return BoundaryMap(
        sectors=bs.sector_names,
        segments=bs.boundary_track.segment_names,
        matrix=tuple(map(tuple, induced_boundary_rows(bs))),
    )


def fiber_polytope(bs: BranchedSurfacePresentation, w: WeightVector) -> FiberPolytope:
    """The polytope of carried weights whose boundary restriction equals w."""
    w.require_index(bs.boundary_track.segment_names, "boundary weight vector")
    names = bs.sector_names
    rows: list[tuple[int, ...]] = []
    rhs: list[int] = []
    for eq in bs.branch_equations:
        rows.append(tuple(eq.get(n, 0) for n in names))
        rhs.append(0)
    d_rows = induced_boundary_rows(bs)
    for seg, d_row in zip(bs.boundary_track.segment_names, d_rows):
        q = w[seg]
        rows.append(tuple(q.denominator * c for c in d_row))
        rhs.append(q.numerator)
    return FiberPolytope(names, tuple(rows), tuple(rhs))


# ---------------------------------------------------------------------------
# double description core


def _normalize(ray: list[Fraction]) -> tuple[Fraction, ...]:
    total = sum(ray, _ZERO)
    return tuple(x / total for x in ray)


def _double_description(equalities: list[list[Fraction]], n: int) -> list[tuple[Fraction, ...]]:
    """Extreme rays of {w >= 0 : equalities} scaled to sum 1, sorted."""
    if n == 0:
        return []
    rays: list[tuple[Fraction, ...]] = []
    for i in range(n):
        unit = [_ZERO] * n
        unit[i] = _ONE
        rays.append(tuple(unit))
    for a in sorted(map(tuple, equalities)):
        zero, pos, neg = [], [], []
        for r in rays:
            s = linalg.dot(a, r)
            (zero if s == 0 else pos if s > 0 else neg).append((r, s))
        fresh: dict[tuple[Fraction, ...], None] = {}
        for r, _ in zero:
            fresh[r] = None
        for rp, sp in pos:
            for rn, sn in neg:
                if not _adjacent(rp, rn, rays):
                    continue
                combo = [sp * b - sn * c for b, c in zip(rn, rp)]
                fresh[_normalize(combo)] = None
        rays = list(fresh)
    return sorted(rays)


def _adjacent(r1: tuple[Fraction, ...], r2: tuple[Fraction, ...], rays: list[tuple[Fraction, ...]]) -> bool:
    common = [i for i in range(len(r1)) if r1[i] == 0 and r2[i] == 0]
    for r3 in rays:
        if r3 is r1 or r3 is r2 or r3 == r1 or r3 == r2:
            continue
        if all(r3[i] == 0 for i in common):
            return False
    return True


def _homogenized_rays(
    rows: Sequence[Sequence[int]], rhs: Sequence[int], n: int
) -> list[tuple[Fraction, ...]]:
    """Extreme rays of {(v, t) >= 0 : A v = b t} scaled to sum 1."""
    eqs = [
        [Fraction(c) for c in row] + [Fraction(-b)]
        for row, b in zip(rows, rhs)
    ]
    return _double_description(eqs, n + 1)


def polyhedron_vertex_data(
    rows: Sequence[Sequence[int]], rhs: Sequence[int], n: int
) -> tuple[list[tuple[Fraction, ...]], list[tuple[Fraction, ...]]]:
    """Vertices and extreme recession rays of {x >= 0 : A x = b}.

    Vertices come from rays of the homogenization with a positive last
    coordinate, recession rays from those with last coordinate zero (these
    are returned scaled to sum 1).
    """
    all_rays = _homogenized_rays(rows, rhs, n)
    vertices = []
    recession = []
    for ray in all_rays:
        t = ray[-1]
        if t > 0:
            vertices.append(tuple(x / t for x in ray[:-1]))
        else:
            recession.append(ray[:-1])
    return vertices, recession
