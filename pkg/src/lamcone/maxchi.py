"""The maximal Euler characteristic function X over a finite family of
carrier presentations.

X(w) is the exact LP maximum of the weighted Euler characteristic over all
carried weight vectors whose boundary restriction is w, maximized over the
family members.  The family is declared by the user; the X computed here is
always relative to it.

Profiles along a segment between two boundary weight vectors are computed
exactly: each member's value function is concave piecewise linear in the
parameter, reconstructed from the vertices of the lifted polytope
{(v, t) : boundary(v) = (1-t) w0 + t w1}, and the family profile is the
upper envelope of the member functions (piecewise linear but in general not
concave).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from . import cones, linalg, simplex
from .chi import ChiFunctional
from .model import (
    BranchedSurfacePresentation,
    Sector,
    TrainTrack,
    WeightVector,
    induced_boundary_rows,
)
from .reports import AuditFinding, AuditReport

_ZERO = Fraction(0)
_ONE = Fraction(1)


class _Outcome:
    """Singleton marker for non-numeric LP outcomes."""

    def __init__(self, label: str):
        self.label = label

    def __repr__(self) -> str:
        return self.label


INFEASIBLE = _Outcome("infeasible")
UNBOUNDED = _Outcome("unbounded")


@dataclass(frozen=True)
class Family:
    """A nonempty list of presentations sharing one boundary track, all
    declared aspherical and oriented."""

    members: tuple[BranchedSurfacePresentation, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("a family must have at least one member")
        track = self.members[0].boundary_track
        for bs in self.members:
            if bs.boundary_track != track:
                raise ValueError(f"member {bs.name!r} has a different boundary track")
            if not bs.aspherical or not bs.oriented:
                raise ValueError(f"member {bs.name!r} must be flagged aspherical and oriented")

    @property
    def boundary_track(self) -> TrainTrack:
        return self.members[0].boundary_track

    def member(self, name: str) -> BranchedSurfacePresentation:
        for bs in self.members:
            if bs.name == name:
                return bs
        raise KeyError(name)

    @cached_property
    def _lps(self) -> tuple["_MemberLP", ...]:
        return tuple(_MemberLP(bs) for bs in self.members)


class _MemberLP:
    """Cached LP data for one member: fixed rows, fixed cost, variable rhs."""

    def __init__(self, bs: BranchedSurfacePresentation):
        self.bs = bs
        names = bs.sector_names
        rows = [[Fraction(eq.get(n, 0)) for n in names] for eq in bs.branch_equations]
        self.n_branch = len(rows)
        rows += [[Fraction(c) for c in row] for row in induced_boundary_rows(bs)]
        self.rows = rows
        self.cost = [ChiFunctional.of(bs).coefficients[n] for n in names]
        self.names = names

    def solve(self, w: WeightVector) -> tuple[str, Fraction | None, WeightVector | None]:
        rhs = [_ZERO] * self.n_branch
        rhs += [w[seg] for seg in self.bs.boundary_track.segment_names]
        res = simplex.solve_lp(self.rows, rhs, self.cost)
        if res.status != simplex.OPTIMAL:
            return res.status, None, None
        witness = WeightVector(dict(zip(self.names, res.solution)))
        return res.status, res.value, witness


@dataclass(frozen=True)
class XResult:
    status: str  # "ok" | "infeasible" | "unbounded"
    value: Fraction | None
    witnesses: tuple[tuple[str, WeightVector], ...] = ()


@dataclass(frozen=True)
class ProfilePiece:
    t0: Fraction
    t1: Fraction
    slope: Fraction
    intercept: Fraction
    witness: str

    def value(self, t: Fraction) -> Fraction:
        return self.slope * t + self.intercept


@dataclass(frozen=True)
class PLProfile:
    """Exact piecewise-linear description of t -> X((1-t) w0 + t w1)."""

    pieces: tuple[ProfilePiece, ...]

    @property
    def breakpoints(self) -> tuple[Fraction, ...]:
        pts: set[Fraction] = set()
        for p in self.pieces:
            pts.add(p.t0)
            pts.add(p.t1)
        return tuple(sorted(pts))

    @property
    def feasible_intervals(self) -> tuple[tuple[Fraction, Fraction], ...]:
        spans: list[list[Fraction]] = []
        for p in self.pieces:
            if spans and spans[-1][1] == p.t0:
                spans[-1][1] = p.t1
            else:
                spans.append([p.t0, p.t1])
        return tuple((a, b) for a, b in spans)

    def value(self, t) -> Fraction | None:
        t = Fraction(t)
        for p in self.pieces:
            if p.t0 <= t <= p.t1:
                return p.value(t)
        return None


def x_single(bs: BranchedSurfacePresentation, w: WeightVector):
    """Exact maximum of chi over the fiber of w in one carrier.

    Returns a Fraction, or INFEASIBLE when the fiber is empty, or UNBOUNDED
    when the recession cone contains a closed direction of positive chi
    (an asphericity violation the closed-chi audit would flag).
    """
    status, value, _ = _MemberLP(bs).solve(w)
    if status == simplex.INFEASIBLE:
        return INFEASIBLE
    if status == simplex.UNBOUNDED:
        return UNBOUNDED
    return value


def x_family(fam: Family, w: WeightVector) -> XResult:
    """Maximum of x_single over the family, with all achieving witnesses."""
    best: Fraction | None = None
    achieved: list[tuple[str, Fraction, WeightVector]] = []
    unbounded = False
    for lp in fam._lps:
        status, value, witness = lp.solve(w)
        if status == simplex.UNBOUNDED:
            unbounded = True
        elif status == simplex.OPTIMAL:
            achieved.append((lp.bs.name, value, witness))
            if best is None or value > best:
                best = value
    if unbounded:
        return XResult(status="unbounded", value=None)
    if best is None:
        return XResult(status="infeasible", value=None)
    witnesses = tuple((name, wit) for name, value, wit in achieved if value == best)
    return XResult(status="ok", value=best, witnesses=witnesses)


# ---------------------------------------------------------------------------
# direct sums


def direct_sum(
    a: BranchedSurfacePresentation, b: BranchedSurfacePresentation, name: str | None = None
) -> BranchedSurfacePresentation:
    """Disjoint-sector sum of two presentations on the same boundary track.

    The weight cone of the sum is the product of the member cones, the
    boundary map is the sum of the member maps, and chi is additive.
    """
    if a.boundary_track != b.boundary_track:
        raise ValueError("direct sum requires a common boundary track")

    def relabel(bs: BranchedSurfacePresentation, tag: str):
        sectors = tuple(
            Sector(f"{tag}.{s.name}", s.euler_char, s.corner_count, s.flip) for s in bs.sectors
        )
        eqs = tuple({f"{tag}.{k}": c for k, c in eq.items()} for eq in bs.branch_equations)
        inc = {f"{tag}.{k}": dict(v) for k, v in bs.boundary_incidence.items()}
        return sectors, eqs, inc

    sa, ea, ia = relabel(a, "1")
    sb, eb, ib = relabel(b, "2")
    return BranchedSurfacePresentation(
        name=name or f"{a.name}+{b.name}",
        sectors=sa + sb,
        branch_equations=ea + eb,
        boundary_track=a.boundary_track,
        boundary_incidence={**ia, **ib},
        aspherical=a.aspherical and b.aspherical,
        oriented=a.oriented and b.oriented,
    )


def close_under_sums(fam: Family) -> Family:
    """Extend a family with all pairwise direct sums (self-sums included)."""
    members = list(fam.members)
    taken = {bs.name for bs in members}
    for i, j in itertools.combinations_with_replacement(range(len(fam.members)), 2):
        a, b = fam.members[i], fam.members[j]
        name = f"{a.name}+{b.name}"
        while name in taken:
            name += "'"
        taken.add(name)
        members.append(direct_sum(a, b, name))
    return Family(tuple(members))


# ---------------------------------------------------------------------------
# profiles


def _member_value_function(
    lp: _MemberLP, w0: WeightVector, w1: WeightVector
) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Pieces (t0, t1, slope, intercept) of one member's concave value
    function along w(t) = (1-t) w0 + t w1, restricted to its feasibility
    interval.  Empty when never feasible."""
    bs = lp.bs
    segs = bs.boundary_track.segment_names
    names = bs.sector_names
    n = len(names)
    # variables: v_0..v_{n-1}, t, s ; rows: branch, boundary, t + s = 1
    rows: list[tuple[int, ...]] = []
    rhs: list[int] = []
    for eq in bs.branch_equations:
        rows.append(tuple(eq.get(x, 0) for x in names) + (0, 0))
        rhs.append(0)
    d_rows = induced_boundary_rows(bs)
    for seg, d_row in zip(segs, d_rows):
        delta = w1[seg] - w0[seg]
        base = w0[seg]
        den = delta.denominator * base.denominator // _gcd(delta.denominator, base.denominator)
        rows.append(tuple(den * c for c in d_row) + (int(-delta * den), 0))
        rhs.append(int(base * den))
    rows.append((0,) * n + (1, 1))
    rhs.append(1)

    vertices, rays = cones.polyhedron_vertex_data(rows, rhs, n + 2)
    cost = lp.cost
    for ray in rays:
        if linalg.dot(cost, ray[:n]) > 0:
            raise ValueError(
                f"X is unbounded along the segment: member {bs.name!r} carries a "
                "closed direction of positive chi"
            )
    points = [(vert[n], linalg.dot(cost, vert[:n])) for vert in vertices]
    if not points:
        return []
    hull = _upper_hull(points)
    if len(hull) == 1:
        t, z = hull[0]
        return [(t, t, _ZERO, z)]
    pieces = []
    for (ta, za), (tb, zb) in zip(hull, hull[1:]):
        slope = (zb - za) / (tb - ta)
        pieces.append((ta, tb, slope, za - slope * ta))
    return pieces


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _upper_hull(points: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    best: dict[Fraction, Fraction] = {}
    for t, z in points:
        if t not in best or z > best[t]:
            best[t] = z
    pts = sorted(best.items())
    if len(pts) <= 1:
        return pts
    hull: list[tuple[Fraction, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, z1), (x2, z2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - z1) - (z2 - z1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def profile(fam: Family, w0: WeightVector, w1: WeightVector) -> PLProfile:
    """Exact PL profile of X along the segment from w0 to w1."""
    segs = fam.boundary_track.segment_names
    w0.require_index(segs, "profile endpoint w0")
    w1.require_index(segs, "profile endpoint w1")
    functions = {
        lp.bs.name: _member_value_function(lp, w0, w1) for lp in fam._lps
    }
    functions = {name: f for name, f in functions.items() if f}
    if not functions:
        return PLProfile(pieces=())

    # merged feasible components of the union of member domains
    merged: list[list[Fraction]] = []
    for lo, hi in sorted((f[0][0], f[-1][1]) for f in functions.values()):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    cuts: set[Fraction] = set()
    flat = [(name, piece) for name, f in functions.items() for piece in f]
    for _, (a, b, _s, _i) in flat:
        cuts.add(a)
        cuts.add(b)
    for (n1, p1), (n2, p2) in itertools.combinations(flat, 2):
        if n1 == n2:
            continue
        lo = max(p1[0], p2[0])
        hi = min(p1[1], p2[1])
        if lo >= hi or p1[2] == p2[2]:
            continue
        t = (p2[3] - p1[3]) / (p1[2] - p2[2])
        if lo < t < hi:
            cuts.add(t)

    def member_value(name: str, t: Fraction) -> Fraction | None:
        for a, b, slope, intercept in functions[name]:
            if a <= t <= b:
                return slope * t + intercept
        return None

    pieces: list[ProfilePiece] = []
    for lo, hi in merged:
        if lo == hi:
            vals = {n: member_value(n, lo) for n in functions}
            witness, val = max(
                ((n, v) for n, v in vals.items() if v is not None),
                key=lambda kv: (kv[1], kv[0]),
            )
            pieces.append(ProfilePiece(lo, hi, _ZERO, val, witness))
            continue
        local = sorted(c for c in cuts if lo <= c <= hi)
        for a, b in zip(local, local[1:]):
            mid = (a + b) / 2
            candidates = [(n, member_value(n, mid)) for n in functions]
            candidates = [(n, v) for n, v in candidates if v is not None]
            best_val = max(v for _, v in candidates)
            witness = min(n for n, v in candidates if v == best_val)
            for pa, pb, slope, intercept in functions[witness]:
                if pa <= mid <= pb:
                    break
            prev = pieces[-1] if pieces else None
            if (
                prev is not None
                and prev.t1 == a
                and prev.slope == slope
                and prev.intercept == intercept
                and prev.witness == witness
            ):
                pieces[-1] = ProfilePiece(prev.t0, b, slope, intercept, witness)
            else:
                pieces.append(ProfilePiece(a, b, slope, intercept, witness))
    return PLProfile(pieces=tuple(pieces))


# ---------------------------------------------------------------------------
# structure audits


def _render_w(w: WeightVector) -> dict[str, str]:
    return {k: str(v) for k, v in sorted(w.entries.items())}


def audit_structure(fam: Family, sample_budget: int, seed: int = 0) -> AuditReport:
    """Sample-based audit of the structure of X over a family.

    Checks positive homogeneity (structural; must always hold), concavity,
    and superadditivity.  The latter two can legitimately fail for families
    not closed under direct sums; failures are reported with witnesses, not
    raised.  Before sampling, every pair of boundary-cell vertices is probed
    deterministically (midpoint and sum), so a violation at a vertex pair is
    always found regardless of the sampling seed.
    """
    rng = random.Random(seed)
    track = fam.boundary_track
    cell = cones.cell_vertices(cones.build_cone(track))
    verts = cell.vertices
    segs = track.segment_names
    findings: list[AuditFinding] = []
    checked = 0

    def X(w: WeightVector) -> XResult:
        return x_family(fam, w)

    def zero() -> WeightVector:
        return WeightVector({s: 0 for s in segs})

    def check_concavity(w0, w1, t, r0, r1):
        nonlocal checked
        checked += 1
        if r0.status != "ok" or r1.status != "ok":
            return
        mid = w0.scaled(t).plus(w1.scaled(1 - t))
        rm = X(mid)
        bound = t * r0.value + (1 - t) * r1.value
        if rm.status != "ok" or rm.value < bound:
            got = rm.value if rm.status == "ok" else rm.status
            findings.append(
                AuditFinding(
                    "concavity",
                    f"X at the t={t} mix is {got}, below the bound {bound}",
                    {
                        "w0": _render_w(w0),
                        "w1": _render_w(w1),
                        "t": str(t),
                        "X(w0)": str(r0.value),
                        "X(w1)": str(r1.value),
                        "X(mix)": str(rm.value) if rm.status == "ok" else rm.status,
                        "bound": str(bound),
                    },
                )
            )

    def check_superadditivity(w0, w1, r0, r1):
        nonlocal checked
        checked += 1
        if r0.status != "ok" or r1.status != "ok":
            return
        rs = X(w0.plus(w1))
        bound = r0.value + r1.value
        if rs.status != "ok" or rs.value < bound:
            got = rs.value if rs.status == "ok" else rs.status
            findings.append(
                AuditFinding(
                    "superadditivity",
                    f"X(w0+w1) is {got}, below X(w0)+X(w1) = {bound}",
                    {
                        "w0": _render_w(w0),
                        "w1": _render_w(w1),
                        "X(w0)": str(r0.value),
                        "X(w1)": str(r1.value),
                        "X(w0+w1)": str(rs.value) if rs.status == "ok" else rs.status,
                    },
                )
            )

    def check_homogeneity(w, lam, rw):
        nonlocal checked
        checked += 1
        rl = X(w.scaled(lam))
        if rw.status != rl.status or (rw.status == "ok" and rl.value != lam * rw.value):
            findings.append(
                AuditFinding(
                    "homogeneity",
                    f"X({lam}*w) disagrees with {lam}*X(w)",
                    {
                        "w": _render_w(w),
                        "lambda": str(lam),
                        "X(w)": str(rw.value) if rw.status == "ok" else rw.status,
                        "X(lam*w)": str(rl.value) if rl.status == "ok" else rl.status,
                    },
                )
            )

    # deterministic vertex-pair probes
    for u, v in itertools.combinations(verts, 2):
        ru, rv = X(u), X(v)
        check_concavity(u, v, Fraction(1, 2), ru, rv)
        check_superadditivity(u, v, ru, rv)

    def random_weight() -> WeightVector:
        if not verts:
            return zero()
        w = zero()
        for vert in verts:
            c = Fraction(rng.randint(0, 6), rng.randint(1, 4))
            if c:
                w = w.plus(vert.scaled(c))
        return w

    for _ in range(sample_budget):
        w0 = random_weight()
        w1 = random_weight()
        lam = Fraction(rng.randint(1, 8), rng.randint(1, 8))
        den = rng.randint(2, 8)
        t = Fraction(rng.randint(1, den - 1), den)
        r0 = X(w0)
        r1 = X(w1)
        check_homogeneity(w0, lam, r0)
        check_concavity(w0, w1, t, r0, r1)
        check_superadditivity(w0, w1, r0, r1)

    return AuditReport(
        subject=f"structure audit ({len(fam.members)} member(s))",
        checked=checked,
        findings=tuple(findings),
    )


# ---------------------------------------------------------------------------
# disjoint unions


@dataclass(frozen=True)
class AdditivityReport:
    components: tuple[XResult, ...]
    union: XResult
    consistent: bool

    @property
    def ok(self) -> bool:
        return self.consistent


def disjoint_union_track(tracks: Sequence[TrainTrack], name: str | None = None) -> TrainTrack:
    names = set()
    switch_names = set()
    for tr in tracks:
        for s in tr.segment_names:
            if s in names:
                raise ValueError(f"segment name {s!r} appears in two tracks")
            names.add(s)
        for sw in tr.switches:
            if sw.name in switch_names:
                raise ValueError(f"switch name {sw.name!r} appears in two tracks")
            switch_names.add(sw.name)
    return TrainTrack(
        name=name or "|".join(tr.name for tr in tracks),
        segments=tuple(s for tr in tracks for s in tr.segments),
        switches=tuple(sw for tr in tracks for sw in tr.switches),
        closed=frozenset().union(*(tr.closed for tr in tracks)),
    )


def _disjoint_union_presentation(
    parts: Sequence[BranchedSurfacePresentation], track: TrainTrack
) -> BranchedSurfacePresentation:
    sectors: list[Sector] = []
    eqs: list[dict[str, int]] = []
    inc: dict[str, dict[str, int]] = {}
    for idx, bs in enumerate(parts):
        tag = str(idx)
        sectors += [
            Sector(f"{tag}.{s.name}", s.euler_char, s.corner_count, s.flip) for s in bs.sectors
        ]
        eqs += [{f"{tag}.{k}": c for k, c in eq.items()} for eq in bs.branch_equations]
        for sec, counts in bs.boundary_incidence.items():
            inc[f"{tag}.{sec}"] = dict(counts)
    return BranchedSurfacePresentation(
        name="|".join(bs.name for bs in parts),
        sectors=tuple(sectors),
        branch_equations=tuple(eqs),
        boundary_track=track,
        boundary_incidence=inc,
        aspherical=all(bs.aspherical for bs in parts),
        oriented=all(bs.oriented for bs in parts),
    )


def additivity_check(fams: Sequence[Family], ws: Sequence[WeightVector]) -> AdditivityReport:
    """Verify that X of the disjoint-union family over the disjoint-union
    track equals the sum of the component values, exactly."""
    if len(fams) != len(ws):
        raise ValueError("one weight vector per family is required")
    union_track = disjoint_union_track([f.boundary_track for f in fams])
    union_members = [
        _disjoint_union_presentation(combo, union_track)
        for combo in itertools.product(*(f.members for f in fams))
    ]
    union_fam = Family(tuple(union_members))
    merged: dict[str, Fraction] = {}
    for w in ws:
        merged.update(w.entries)
    union_w = WeightVector(merged)

    components = tuple(x_family(f, w) for f, w in zip(fams, ws))
    union_result = x_family(union_fam, union_w)
    if any(r.status == "unbounded" for r in components):
        consistent = union_result.status == "unbounded"
    elif any(r.status == "infeasible" for r in components):
        consistent = union_result.status == "infeasible"
    else:
        total = sum((r.value for r in components), _ZERO)
        consistent = union_result.status == "ok" and union_result.value == total
    return AdditivityReport(components=components, union=union_result, consistent=consistent)
