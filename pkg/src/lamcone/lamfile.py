"""Parser and serializer for the `.lam` document format.

The format is a line-oriented block grammar, hand-writable:

    # comment
    track theta {
      segments: a b c
      switch s1: a b -> c
      switch s2: c -> a b
    }

    weights W1 on theta { a = 1, b = 1, c = 2 }

    surface BH on alpha {
      sector H: chi = -1, corners = 0
      eq: 3x = 2y + 2z
      boundary H: a a a
      flags: aspherical oriented
    }

    family F: BG BH

Rationals are written `p/q` or as integers and are kept in lowest terms.
Parsing is total: any failure raises a diagnostic carrying line/column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .maxchi import Family
from .model import (
    BranchedSurfacePresentation,
    Sector,
    Segment,
    Switch,
    TrainTrack,
    ValidationReport,
    WeightVector,
    validate_presentation,
    validate_track,
)

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.'+]*$")
SCHEMA_VERSION = 1


class LamError(ValueError):
    """Base for all `.lam` diagnostics; carries a position."""

    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class LamSyntaxError(LamError):
    pass


class LamSemanticError(LamError):
    pass


class LamValidationError(ValueError):
    """A parsed document failed model validation."""

    def __init__(self, reports: Iterable[ValidationReport]):
        self.reports = tuple(reports)
        super().__init__("; ".join(str(r) for r in self.reports))


@dataclass(frozen=True)
class NamedWeights:
    name: str
    target: str
    vector: WeightVector


@dataclass(frozen=True)
class NamedFamily:
    name: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class Document:
    tracks: tuple[TrainTrack, ...] = ()
    weights: tuple[NamedWeights, ...] = ()
    presentations: tuple[BranchedSurfacePresentation, ...] = ()
    families: tuple[NamedFamily, ...] = ()

    def track(self, name: str) -> TrainTrack:
        for t in self.tracks:
            if t.name == name:
                return t
        raise KeyError(f"no track named {name!r}")

    def presentation(self, name: str) -> BranchedSurfacePresentation:
        for p in self.presentations:
            if p.name == name:
                return p
        raise KeyError(f"no surface named {name!r}")

    def named_weights(self, name: str) -> NamedWeights:
        for w in self.weights:
            if w.name == name:
                return w
        raise KeyError(f"no weights named {name!r}")

    def family(self, name: str) -> Family:
        for f in self.families:
            if f.name == name:
                return Family(tuple(self.presentation(m) for m in f.members))
        raise KeyError(f"no family named {name!r}")


# ---------------------------------------------------------------------------
# parsing


@dataclass(frozen=True)
class _Item:
    line: int
    col: int
    text: str  # "{", "}", or a statement chunk


def _lex(text: str) -> list[_Item]:
    items: list[_Item] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        pos = 0
        for match in re.finditer(r"[{}]", line):
            chunk = line[pos : match.start()].strip()
            if chunk:
                items.append(_Item(lineno, pos + 1, chunk))
            items.append(_Item(lineno, match.start() + 1, match.group()))
            pos = match.end()
        tail = line[pos:].strip()
        if tail:
            items.append(_Item(lineno, pos + 1, tail))
    return items


def _check_name(name: str, item: _Item) -> str:
    if not NAME_RE.match(name):
        raise LamSyntaxError(f"bad name {name!r}", item.line, item.col)
    return name


def _parse_fraction(text: str, item: _Item) -> Fraction:
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise LamSyntaxError(f"zero denominator in {text!r}", item.line, item.col) from None
    except ValueError:
        raise LamSyntaxError(f"bad rational {text!r}", item.line, item.col) from None


def _parse_int(text: str, item: _Item) -> int:
    try:
        return int(text)
    except ValueError:
        raise LamSyntaxError(f"bad integer {text!r}", item.line, item.col) from None


class _Parser:
    def __init__(self, text: str):
        self.items = _lex(text)
        self.pos = 0

    def peek(self) -> _Item | None:
        return self.items[self.pos] if self.pos < len(self.items) else None

    def take(self) -> _Item:
        item = self.items[self.pos]
        self.pos += 1
        return item

    def expect_brace(self, which: str, context: _Item) -> _Item:
        item = self.peek()
        if item is None or item.text != which:
            where = item or context
            raise LamSyntaxError(f"expected {which!r}", where.line, where.col)
        return self.take()

    def block_lines(self, opener: _Item) -> list[_Item]:
        self.expect_brace("{", opener)
        lines = []
        while True:
            item = self.peek()
            if item is None:
                raise LamSyntaxError("unterminated block", opener.line, opener.col)
            if item.text == "}":
                self.take()
                return lines
            if item.text == "{":
                raise LamSyntaxError("unexpected '{'", item.line, item.col)
            lines.append(self.take())

    def parse(self) -> Document:
        tracks: list[TrainTrack] = []
        weights: list[NamedWeights] = []
        surfaces: list[BranchedSurfacePresentation] = []
        families: list[NamedFamily] = []
        while (item := self.peek()) is not None:
            head = item.text.split()
            if item.text in ("{", "}"):
                raise LamSyntaxError(f"unexpected {item.text!r}", item.line, item.col)
            keyword = head[0]
            if keyword == "track":
                tracks.append(self.parse_track(self.take()))
            elif keyword == "weights":
                weights.append(self.parse_weights(self.take()))
            elif keyword == "surface":
                surfaces.append(self.parse_surface(self.take()))
            elif keyword == "family":
                families.append(self.parse_family(self.take()))
            else:
                raise LamSyntaxError(f"unknown block {keyword!r}", item.line, item.col)
        return Document(
            tracks=tuple(tracks),
            weights=tuple(weights),
            presentations=tuple(surfaces),
            families=tuple(families),
        )

    def parse_track(self, opener: _Item) -> TrainTrack:
        head = opener.text.split()
        if len(head) != 2:
            raise LamSyntaxError("expected: track NAME { ... }", opener.line, opener.col)
        name = _check_name(head[1], opener)
        segments: list[Segment] = []
        closed: list[str] = []
        switches: list[Switch] = []
        for item in self.block_lines(opener):
            if item.text.startswith("segments:"):
                for tok in item.text[len("segments:") :].split():
                    flip = tok.startswith("~")
                    segments.append(Segment(_check_name(tok.lstrip("~"), item), flip))
            elif item.text.startswith("closed:"):
                closed += [_check_name(t, item) for t in item.text[len("closed:") :].split()]
            elif item.text.startswith("switch "):
                body = item.text[len("switch ") :]
                if ":" not in body:
                    raise LamSyntaxError("expected: switch NAME: a b -> c", item.line, item.col)
                sw_name, rest = body.split(":", 1)
                if "->" not in rest:
                    raise LamSyntaxError("switch needs '->'", item.line, item.col)
                side_a, side_b = rest.split("->", 1)
                switches.append(
                    Switch(
                        _check_name(sw_name.strip(), item),
                        tuple(_check_name(t, item) for t in side_a.split()),
                        tuple(_check_name(t, item) for t in side_b.split()),
                    )
                )
            else:
                raise LamSyntaxError(f"unknown track line {item.text!r}", item.line, item.col)
        return TrainTrack(
            name=name, segments=tuple(segments), switches=tuple(switches), closed=frozenset(closed)
        )

    def parse_weights(self, opener: _Item) -> NamedWeights:
        head = opener.text.split()
        if len(head) != 4 or head[2] != "on":
            raise LamSyntaxError("expected: weights NAME on TARGET { ... }", opener.line, opener.col)
        name = _check_name(head[1], opener)
        target = _check_name(head[3], opener)
        entries: dict[str, Fraction] = {}
        for item in self.block_lines(opener):
            for part in item.text.split(","):
                part = part.strip()
                if not part:
                    continue
                if "=" not in part:
                    raise LamSyntaxError(f"expected ID = VALUE, got {part!r}", item.line, item.col)
                key, value = (s.strip() for s in part.split("=", 1))
                _check_name(key, item)
                if key in entries:
                    raise LamSemanticError(f"duplicate weight entry {key!r}", item.line, item.col)
                q = _parse_fraction(value, item)
                if q < 0:
                    raise LamSemanticError(
                        f"negative weight {q} on {key!r}: not a weight vector", item.line, item.col
                    )
                entries[key] = q
        return NamedWeights(name=name, target=target, vector=WeightVector(entries))

    def parse_surface(self, opener: _Item) -> BranchedSurfacePresentation:
        head = opener.text.split()
        if len(head) != 4 or head[2] != "on":
            raise LamSyntaxError("expected: surface NAME on TRACK { ... }", opener.line, opener.col)
        name = _check_name(head[1], opener)
        track_name = _check_name(head[3], opener)
        sectors: list[Sector] = []
        eqs: list[dict[str, int]] = []
        incidence: dict[str, dict[str, int]] = {}
        flags: set[str] = set()
        for item in self.block_lines(opener):
            if item.text.startswith("sector "):
                sectors.append(self.parse_sector(item))
            elif item.text.startswith("eq:"):
                eqs.append(self.parse_equation(item.text[len("eq:") :], item))
            elif item.text.startswith("boundary "):
                body = item.text[len("boundary ") :]
                if ":" not in body:
                    raise LamSyntaxError("expected: boundary SECTOR: seg ...", item.line, item.col)
                sec, rest = body.split(":", 1)
                sec = _check_name(sec.strip(), item)
                if sec in incidence:
                    raise LamSemanticError(f"duplicate boundary line for {sec!r}", item.line, item.col)
                counts: dict[str, int] = {}
                for tok in rest.split():
                    _check_name(tok, item)
                    counts[tok] = counts.get(tok, 0) + 1
                incidence[sec] = counts
            elif item.text.startswith("flags:"):
                for tok in item.text[len("flags:") :].split():
                    if tok not in ("aspherical", "oriented"):
                        raise LamSyntaxError(f"unknown flag {tok!r}", item.line, item.col)
                    flags.add(tok)
            else:
                raise LamSyntaxError(f"unknown surface line {item.text!r}", item.line, item.col)
        # the boundary track is resolved by the document assembler; store a
        # placeholder here and patch it there
        return BranchedSurfacePresentation(
            name=name,
            sectors=tuple(sectors),
            branch_equations=tuple(eqs),
            boundary_track=TrainTrack(name=track_name, segments=()),
            boundary_incidence=incidence,
            aspherical="aspherical" in flags,
            oriented="oriented" in flags,
        )

    def parse_sector(self, item: _Item) -> Sector:
        body = item.text[len("sector ") :]
        if ":" not in body:
            raise LamSyntaxError("expected: sector NAME: chi = INT, ...", item.line, item.col)
        name, rest = body.split(":", 1)
        name = _check_name(name.strip(), item)
        chi: int | None = None
        corners = 0
        flip = False
        for part in rest.split(","):
            part = part.strip()
            if not part:
                continue
            if part == "flipped":
                flip = True
            elif "=" in part:
                key, value = (s.strip() for s in part.split("=", 1))
                if key == "chi":
                    chi = _parse_int(value, item)
                elif key == "corners":
                    corners = _parse_int(value, item)
                    if corners < 0:
                        raise LamSemanticError("corners must be nonnegative", item.line, item.col)
                else:
                    raise LamSyntaxError(f"unknown sector attribute {key!r}", item.line, item.col)
            else:
                raise LamSyntaxError(f"bad sector attribute {part!r}", item.line, item.col)
        if chi is None:
            raise LamSyntaxError(f"sector {name!r} needs chi", item.line, item.col)
        return Sector(name=name, euler_char=chi, corner_count=corners, flip=flip)

    def parse_equation(self, body: str, item: _Item) -> dict[str, int]:
        sides = body.split("=")
        if len(sides) != 2:
            raise LamSyntaxError("equation needs exactly one '='", item.line, item.col)
        coeffs: dict[str, int] = {}

        def add_side(side: str, sign: int) -> None:
            tokens = re.findall(r"[+-]|[^\s+-]+", side)
            if not tokens:
                raise LamSyntaxError("empty equation side", item.line, item.col)
            pending: int | None = 1  # sign of the next term; None = expect an operator
            for tok in tokens:
                if tok in ("+", "-"):
                    if pending is None:
                        pending = -1 if tok == "-" else 1
                    elif pending == 1 and tok == "-":
                        pending = -1  # leading minus
                    else:
                        raise LamSyntaxError("misplaced sign", item.line, item.col)
                else:
                    if pending is None:
                        raise LamSyntaxError(
                            f"missing operator before {tok!r}", item.line, item.col
                        )
                    match = re.match(r"^(\d*)([A-Za-z_][A-Za-z0-9_.']*)?$", tok)
                    if not match or (not match.group(1) and not match.group(2)):
                        raise LamSyntaxError(f"bad term {tok!r}", item.line, item.col)
                    coef = int(match.group(1)) if match.group(1) else 1
                    var = match.group(2)
                    if var is None:
                        if coef != 0:
                            raise LamSyntaxError(
                                "constant terms are not allowed in branch equations",
                                item.line,
                                item.col,
                            )
                    else:
                        coeffs[var] = coeffs.get(var, 0) + sign * pending * coef
                    pending = None
            if pending is not None:
                raise LamSyntaxError("dangling operator", item.line, item.col)

        add_side(sides[0], 1)
        add_side(sides[1], -1)
        return {k: v for k, v in coeffs.items() if v != 0}

    def parse_family(self, opener: _Item) -> NamedFamily:
        body = opener.text[len("family") :].strip()
        if ":" not in body:
            raise LamSyntaxError("expected: family NAME: member ...", opener.line, opener.col)
        name, rest = body.split(":", 1)
        members = tuple(_check_name(t, opener) for t in rest.split())
        if not members:
            raise LamSemanticError("a family needs at least one member", opener.line, opener.col)
        return NamedFamily(name=_check_name(name.strip(), opener), members=members)


def parse_document(text: str, validate: bool = True) -> Document:
    """Parse `.lam` text into a Document.

    Raises LamSyntaxError / LamSemanticError with positions on bad input;
    with validate=True (the default) also runs model validation on every
    component and raises LamValidationError embedding the reports.
    """
    doc = _Parser(text).parse()

    for kind, names in (
        ("track", [t.name for t in doc.tracks]),
        ("weights", [w.name for w in doc.weights]),
        ("surface", [p.name for p in doc.presentations]),
        ("family", [f.name for f in doc.families]),
    ):
        seen: set[str] = set()
        for n in names:
            if n in seen:
                raise LamSemanticError(f"duplicate {kind} name {n!r}", 1)
            seen.add(n)

    track_names = {t.name for t in doc.tracks}
    surface_names = {p.name for p in doc.presentations}

    # resolve surface boundary tracks
    resolved = []
    for p in doc.presentations:
        ref = p.boundary_track.name
        if ref not in track_names:
            raise LamSemanticError(f"surface {p.name!r} references unknown track {ref!r}", 1)
        resolved.append(
            BranchedSurfacePresentation(
                name=p.name,
                sectors=p.sectors,
                branch_equations=p.branch_equations,
                boundary_track=doc.track(ref),
                boundary_incidence=p.boundary_incidence,
                aspherical=p.aspherical,
                oriented=p.oriented,
            )
        )
    doc = Document(doc.tracks, doc.weights, tuple(resolved), doc.families)

    # resolve weight targets and fill missing entries with zero
    filled = []
    for nw in doc.weights:
        in_tracks = nw.target in track_names
        in_surfaces = nw.target in surface_names
        if in_tracks and in_surfaces:
            raise LamSemanticError(
                f"weights {nw.name!r} target {nw.target!r} is ambiguous (track and surface)", 1
            )
        if not in_tracks and not in_surfaces:
            raise LamSemanticError(f"weights {nw.name!r} target {nw.target!r} not found", 1)
        index = (
            doc.track(nw.target).segment_names
            if in_tracks
            else doc.presentation(nw.target).sector_names
        )
        unknown = set(nw.vector.entries) - set(index)
        if unknown:
            raise LamSemanticError(
                f"weights {nw.name!r} assigns unknown ids {sorted(unknown)}", 1
            )
        entries = {k: nw.vector.get(k) for k in index}
        filled.append(NamedWeights(nw.name, nw.target, WeightVector(entries)))
    doc = Document(doc.tracks, tuple(filled), doc.presentations, doc.families)

    for fam in doc.families:
        for member in fam.members:
            if member not in surface_names:
                raise LamSemanticError(
                    f"family {fam.name!r} references unknown surface {member!r}", 1
                )

    if validate:
        reports = [validate_track(t) for t in doc.tracks]
        reports += [validate_presentation(p) for p in doc.presentations]
        bad = [r for r in reports if not r.ok]
        if bad:
            raise LamValidationError(bad)
    return doc


# ---------------------------------------------------------------------------
# serialization


def _format_weight_block(nw: NamedWeights) -> list[str]:
    lines = [f"weights {nw.name} on {nw.target} {{"]
    lines += [f"  {k} = {v}" for k, v in nw.vector.entries.items()]
    lines.append("}")
    return lines


def format_equation(eq: dict[str, int], sector_order: tuple[str, ...]) -> str:
    pos = [(eq[s], s) for s in sector_order if eq.get(s, 0) > 0]
    neg = [(-eq[s], s) for s in sector_order if eq.get(s, 0) < 0]

    def side(terms: list[tuple[int, str]]) -> str:
        if not terms:
            return "0"
        return " + ".join(f"{c}{s}" if c != 1 else s for c, s in terms)

    return f"eq: {side(pos)} = {side(neg)}"


def serialize_document(doc: Document) -> str:
    """Canonical text for a Document; parses back to an equal Document."""
    blocks: list[str] = []
    for t in doc.tracks:
        lines = [f"track {t.name} {{"]
        if t.segments:
            toks = [("~" if s.flip else "") + s.name for s in t.segments]
            lines.append(f"  segments: {' '.join(toks)}")
        if t.closed:
            lines.append(f"  closed: {' '.join(s for s in t.segment_names if s in t.closed)}")
        for sw in t.switches:
            lines.append(f"  switch {sw.name}: {' '.join(sw.side_a)} -> {' '.join(sw.side_b)}")
        lines.append("}")
        blocks.append("\n".join(lines))
    for p in doc.presentations:
        lines = [f"surface {p.name} on {p.boundary_track.name} {{"]
        for s in p.sectors:
            attrs = [f"chi = {s.euler_char}", f"corners = {s.corner_count}"]
            if s.flip:
                attrs.append("flipped")
            lines.append(f"  sector {s.name}: {', '.join(attrs)}")
        for eq in p.branch_equations:
            lines.append(f"  {format_equation(dict(eq), p.sector_names)}")
        seg_order = {name: i for i, name in enumerate(p.boundary_track.segment_names)}
        for sec in p.sector_names:
            counts = p.boundary_incidence.get(sec)
            if not counts:
                continue
            toks = []
            for seg in sorted(counts, key=lambda s: seg_order.get(s, 0)):
                toks += [seg] * counts[seg]
            lines.append(f"  boundary {sec}: {' '.join(toks)}")
        flags = [f for f, on in (("aspherical", p.aspherical), ("oriented", p.oriented)) if on]
        if flags:
            lines.append(f"  flags: {' '.join(flags)}")
        lines.append("}")
        blocks.append("\n".join(lines))
    for nw in doc.weights:
        blocks.append("\n".join(_format_weight_block(nw)))
    for fam in doc.families:
        blocks.append(f"family {fam.name}: {' '.join(fam.members)}")
    return "\n\n".join(blocks) + ("\n" if blocks else "")


# ---------------------------------------------------------------------------
# JSON export


def fraction_json(q: Fraction) -> dict[str, str]:
    return {"num": str(q.numerator), "den": str(q.denominator)}


def weight_vector_json(w: WeightVector) -> dict[str, dict[str, str]]:
    return {k: fraction_json(v) for k, v in w.entries.items()}


def document_json(doc: Document) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "tracks": [
            {
                "name": t.name,
                "segments": [{"name": s.name, "flip": s.flip} for s in t.segments],
                "closed": [s for s in t.segment_names if s in t.closed],
                "switches": [
                    {"name": sw.name, "side_a": list(sw.side_a), "side_b": list(sw.side_b)}
                    for sw in t.switches
                ],
            }
            for t in doc.tracks
        ],
        "surfaces": [
            {
                "name": p.name,
                "boundary_track": p.boundary_track.name,
                "sectors": [
                    {
                        "name": s.name,
                        "chi": s.euler_char,
                        "corners": s.corner_count,
                        "flip": s.flip,
                    }
                    for s in p.sectors
                ],
                "branch_equations": [dict(eq) for eq in p.branch_equations],
                "boundary_incidence": {k: dict(v) for k, v in p.boundary_incidence.items()},
                "aspherical": p.aspherical,
                "oriented": p.oriented,
            }
            for p in doc.presentations
        ],
        "weights": [
            {"name": w.name, "target": w.target, "entries": weight_vector_json(w.vector)}
            for w in doc.weights
        ],
        "families": [{"name": f.name, "members": list(f.members)} for f in doc.families],
    }
