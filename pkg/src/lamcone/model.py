"""Combinatorial domain types: train tracks, weight vectors, branched-surface
presentations, and scalloped-surface summaries.

All values are immutable after construction.  Constructors coerce and check
*types* (rationals, integers); structural well-formedness is checked by the
``validate_*`` functions, which return reports instead of raising so that
broken inputs can be described to the user.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from . import linalg


class IndexMismatchError(ValueError):
    """A weight vector is indexed by the wrong set of ids."""


def as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floating point weights are not allowed; use Fraction or 'p/q'")
    return Fraction(value)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    subject: str
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return f"{self.subject}: ok"
        lines = [f"{self.subject}: {len(self.violations)} violation(s)"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines)


@dataclass(frozen=True)
class Segment:
    """An oriented segment (interval sector) of a train track.

    ``flip`` records the declared orientation flag; ends are implied by the
    switch sides a segment is attached to, so the flag carries no structural
    weight beyond being preserved by serialization.
    """

    name: str
    flip: bool = False


@dataclass(frozen=True)
class Switch:
    """A switch with two ordered sides.

    Side A lists the segments whose arrival end meets the switch, side B the
    segments departing from it.  The listing order is the stacking order of
    the bands across the switch fiber, first entry lowest.
    """

    name: str
    side_a: tuple[str, ...]
    side_b: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "side_a", tuple(self.side_a))
        object.__setattr__(self, "side_b", tuple(self.side_b))

    def side(self, which: str) -> tuple[str, ...]:
        return self.side_a if which == "A" else self.side_b

    @property
    def cusp_count(self) -> int:
        return (len(self.side_a) - 1) + (len(self.side_b) - 1)


@dataclass(frozen=True)
class Cusp:
    """Inward corner of the fibered neighborhood at a switch.

    ``index`` = i means the cusp sits between entries i-1 and i of the named
    side, so valid indices run from 1 to len(side)-1.
    """

    switch: str
    side: str  # "A" or "B"
    index: int

    def __str__(self) -> str:
        return f"{self.switch}.{self.side}.{self.index}"

    @staticmethod
    def parse(text: str) -> "Cusp":
        parts = text.rsplit(".", 2)
        if len(parts) != 3 or parts[1] not in ("A", "B") or not parts[2].isdigit():
            raise ValueError(f"bad cusp id {text!r}; expected SWITCH.A.N or SWITCH.B.N")
        return Cusp(parts[0], parts[1], int(parts[2]))


@dataclass(frozen=True)
class TrainTrack:
    name: str
    segments: tuple[Segment, ...]
    switches: tuple[Switch, ...] = ()
    closed: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "switches", tuple(self.switches))
        object.__setattr__(self, "closed", frozenset(self.closed))

    @cached_property
    def segment_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.segments)

    @cached_property
    def switch_by_name(self) -> Mapping[str, Switch]:
        return {s.name: s for s in self.switches}

    @cached_property
    def arrival(self) -> Mapping[str, tuple[str, int]]:
        """segment -> (switch name, position on side A).  Assumes validity."""
        out: dict[str, tuple[str, int]] = {}
        for sw in self.switches:
            for i, seg in enumerate(sw.side_a):
                out[seg] = (sw.name, i)
        return out

    @cached_property
    def departure(self) -> Mapping[str, tuple[str, int]]:
        out: dict[str, tuple[str, int]] = {}
        for sw in self.switches:
            for i, seg in enumerate(sw.side_b):
                out[seg] = (sw.name, i)
        return out

    @property
    def cusp_count(self) -> int:
        return sum(sw.cusp_count for sw in self.switches)

    def cusps(self) -> tuple[Cusp, ...]:
        out = []
        for sw in self.switches:
            out += [Cusp(sw.name, "A", i) for i in range(1, len(sw.side_a))]
            out += [Cusp(sw.name, "B", i) for i in range(1, len(sw.side_b))]
        return tuple(out)

    def has_cusp(self, cusp: Cusp) -> bool:
        sw = self.switch_by_name.get(cusp.switch)
        return sw is not None and 1 <= cusp.index < len(sw.side(cusp.side))

    def reversed_track(self) -> "TrainTrack":
        """Same track with every orientation reversed (sides swapped)."""
        return TrainTrack(
            name=self.name,
            segments=tuple(Segment(s.name, not s.flip) for s in self.segments),
            switches=tuple(Switch(sw.name, sw.side_b, sw.side_a) for sw in self.switches),
            closed=self.closed,
        )


@dataclass(frozen=True)
class WeightVector:
    """Exact nonnegative rational weights keyed by segment or sector id."""

    entries: Mapping[str, Fraction]

    def __post_init__(self):
        coerced = {}
        for key, value in self.entries.items():
            q = as_fraction(value)
            if q < 0:
                raise ValueError(f"negative weight {q} on {key!r}; not a weight vector")
            coerced[key] = q
        object.__setattr__(self, "entries", coerced)

    def __getitem__(self, key: str) -> Fraction:
        return self.entries[key]

    def get(self, key: str, default: Fraction = Fraction(0)) -> Fraction:
        return self.entries.get(key, default)

    def ids(self) -> frozenset[str]:
        return frozenset(self.entries)

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.entries.values())

    def scaled(self, factor) -> "WeightVector":
        f = as_fraction(factor)
        return WeightVector({k: v * f for k, v in self.entries.items()})

    def plus(self, other: "WeightVector") -> "WeightVector":
        if self.ids() != other.ids():
            raise IndexMismatchError("weight vectors indexed by different ids")
        return WeightVector({k: v + other.entries[k] for k, v in self.entries.items()})

    def support(self) -> frozenset[str]:
        return frozenset(k for k, v in self.entries.items() if v > 0)

    def require_index(self, ids: Iterable[str], what: str = "weight vector") -> None:
        expected = frozenset(ids)
        if self.ids() != expected:
            missing = sorted(expected - self.ids())
            extra = sorted(self.ids() - expected)
            raise IndexMismatchError(
                f"{what} index mismatch (missing: {missing}, unexpected: {extra})"
            )


@dataclass(frozen=True)
class Sector:
    """A sector of a branched surface: a surface with corners, given by its
    Euler characteristic and corner count."""

    name: str
    euler_char: int
    corner_count: int = 0
    flip: bool = False

    def __post_init__(self):
        if not isinstance(self.euler_char, int) or isinstance(self.euler_char, bool):
            raise TypeError("sector euler_char must be an integer")
        if not isinstance(self.corner_count, int) or self.corner_count < 0:
            raise ValueError("sector corner_count must be a nonnegative integer")


@dataclass(frozen=True)
class BranchedSurfacePresentation:
    """Combinatorial presentation of a branched surface.

    ``branch_equations`` is a tuple of {sector: integer coefficient} maps,
    each meaning sum(coef * weight) = 0.  ``boundary_incidence`` maps a
    sector to the multiset (as an id->count map) of boundary-track segments
    it meets; a sector may meet the boundary in several segments and may
    cover one segment more than once.
    """

    name: str
    sectors: tuple[Sector, ...]
    branch_equations: tuple[Mapping[str, int], ...]
    boundary_track: TrainTrack
    boundary_incidence: Mapping[str, Mapping[str, int]]
    aspherical: bool = False
    oriented: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sectors", tuple(self.sectors))
        eqs = []
        for eq in self.branch_equations:
            clean = {}
            for sec, coef in eq.items():
                if not isinstance(coef, int) or isinstance(coef, bool):
                    raise TypeError(f"branch equation coefficient {coef!r} is not an integer")
                if coef != 0:
                    clean[sec] = coef
            if clean:
                eqs.append(clean)
        object.__setattr__(self, "branch_equations", tuple(eqs))
        inc = {}
        for sec, multiset in self.boundary_incidence.items():
            counts = {}
            for seg, count in multiset.items():
                if not isinstance(count, int) or count < 0:
                    raise ValueError("incidence multiplicities must be nonnegative integers")
                if count:
                    counts[seg] = count
            if counts:
                inc[sec] = counts
        object.__setattr__(self, "boundary_incidence", inc)

    @cached_property
    def sector_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.sectors)

    def sector(self, name: str) -> Sector:
        for s in self.sectors:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass(frozen=True)
class ScallopedSummary:
    """Euler characteristic and cusp data of a scalloped surface.

    The index chi + C/2 vanishes exactly for the surfaces that support
    measured oriented foliations; fibered neighborhoods of valid train
    tracks always have index 0.
    """

    euler_char: int
    cusp_count: int
    index: Fraction = field(init=False)

    def __post_init__(self):
        if self.cusp_count < 0:
            raise ValueError("cusp_count must be nonnegative")
        object.__setattr__(self, "index", Fraction(self.euler_char) + Fraction(self.cusp_count, 2))

    @property
    def supports_measured_foliation(self) -> bool:
        return self.index == 0


def validate_track(track: TrainTrack) -> ValidationReport:
    """Check every structural invariant of a train track."""
    violations: list[Violation] = []
    seen: set[str] = set()
    for seg in track.segments:
        if seg.name in seen:
            violations.append(Violation("duplicate-segment", f"segment {seg.name!r} declared twice"))
        seen.add(seg.name)
    names = set(track.segment_names)
    for c in track.closed:
        if c not in names:
            violations.append(Violation("unknown-segment", f"closed declaration for unknown segment {c!r}"))

    seen_sw: set[str] = set()
    arrivals: dict[str, int] = {}
    departures: dict[str, int] = {}
    for sw in track.switches:
        if sw.name in seen_sw:
            violations.append(Violation("duplicate-switch", f"switch {sw.name!r} declared twice"))
        seen_sw.add(sw.name)
        if not sw.side_a or not sw.side_b:
            violations.append(Violation("empty-side", f"switch {sw.name!r} has an empty side"))
        for side_name, side in (("A", sw.side_a), ("B", sw.side_b)):
            for seg in side:
                if seg not in names:
                    violations.append(
                        Violation("unknown-segment", f"switch {sw.name!r} side {side_name} references unknown segment {seg!r}")
                    )
                    continue
                if seg in track.closed:
                    violations.append(
                        Violation("closed-attached", f"closed segment {seg!r} attached to switch {sw.name!r}")
                    )
                counter = arrivals if side_name == "A" else departures
                counter[seg] = counter.get(seg, 0) + 1

    for seg in track.segment_names:
        if seg in track.closed:
            continue
        for kind, counter in (("arrival", arrivals), ("departure", departures)):
            n = counter.get(seg, 0)
            if n == 0:
                violations.append(Violation("end-unattached", f"{kind} end of segment {seg!r} is not attached"))
            elif n > 1:
                violations.append(
                    Violation("end-multiply-attached", f"{kind} end of segment {seg!r} attached {n} times")
                )

    return ValidationReport(subject=f"track {track.name}", violations=tuple(violations))


def switch_equation_rows(track: TrainTrack) -> list[list[int]]:
    """Integer switch-equation rows over the segment index: sum(A) - sum(B) = 0."""
    index = {name: i for i, name in enumerate(track.segment_names)}
    rows = []
    for sw in track.switches:
        row = [0] * len(index)
        for seg in sw.side_a:
            row[index[seg]] += 1
        for seg in sw.side_b:
            row[index[seg]] -= 1
        rows.append(row)
    return rows


def induced_boundary_rows(bs: BranchedSurfacePresentation) -> list[list[int]]:
    """Rows of the boundary restriction matrix, one per boundary segment."""
    sectors = bs.sector_names
    col = {name: j for j, name in enumerate(sectors)}
    rows = []
    for seg in bs.boundary_track.segment_names:
        row = [0] * len(sectors)
        for sec, counts in bs.boundary_incidence.items():
            if sec in col and seg in counts:
                row[col[sec]] += counts[seg]
        rows.append(row)
    return rows


def validate_presentation(bs: BranchedSurfacePresentation) -> ValidationReport:
    """Check sector, equation, and incidence invariants of a presentation.

    Includes the symbolic consistency check: the boundary weights induced by
    any solution of the branch equations must satisfy every switch equation
    of the boundary track.
    """
    violations: list[Violation] = []
    seen: set[str] = set()
    for sec in bs.sectors:
        if sec.name in seen:
            violations.append(Violation("duplicate-sector", f"sector {sec.name!r} declared twice"))
        seen.add(sec.name)
    sector_names = set(bs.sector_names)
    for eq in bs.branch_equations:
        for sec in eq:
            if sec not in sector_names:
                violations.append(Violation("unknown-sector", f"branch equation references unknown sector {sec!r}"))
    segment_names = set(bs.boundary_track.segment_names)
    for sec, counts in bs.boundary_incidence.items():
        if sec not in sector_names:
            violations.append(Violation("unknown-sector", f"incidence declared for unknown sector {sec!r}"))
        for seg in counts:
            if seg not in segment_names:
                violations.append(
                    Violation("unknown-segment", f"incidence of sector {sec!r} references unknown segment {seg!r}")
                )

    if violations:
        return ValidationReport(subject=f"surface {bs.name}", violations=tuple(violations))

    # Symbolic boundary check: for every vector v in the branch-equation
    # kernel, D v must satisfy the boundary switch equations.
    n = len(bs.sector_names)
    col = {name: j for j, name in enumerate(bs.sector_names)}
    eq_rows = linalg.to_fractions(
        [[eq.get(name, 0) for name in bs.sector_names] for eq in bs.branch_equations]
    )
    kernel = linalg.nullspace(eq_rows, n)
    d_rows = linalg.to_fractions(induced_boundary_rows(bs))
    s_rows = linalg.to_fractions(switch_equation_rows(bs.boundary_track))
    for s_index, s_row in enumerate(s_rows):
        # row of S*D over sectors
        sd = [
            sum((s_row[i] * d_rows[i][j] for i in range(len(d_rows))), Fraction(0))
            for j in range(n)
        ]
        for vec in kernel:
            if linalg.dot(sd, vec) != 0:
                sw = bs.boundary_track.switches[s_index].name
                violations.append(
                    Violation(
                        "boundary-inconsistent",
                        f"branch equations do not imply the switch equation at {sw!r}",
                    )
                )
                break

    return ValidationReport(subject=f"surface {bs.name}", violations=tuple(violations))


def scalloped_summary(track: TrainTrack) -> ScallopedSummary:
    """Summary of the fibered neighborhood of a valid track as a scalloped
    surface: graph Euler characteristic, cusp count, and their index.

    Closed-curve sectors are annuli and contribute zero to both counts.
    """
    euler = len(track.switches) - sum(1 for s in track.segments if s.name not in track.closed)
    return ScallopedSummary(euler_char=euler, cusp_count=track.cusp_count)
