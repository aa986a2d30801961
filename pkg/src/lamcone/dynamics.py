"""Prelamination dynamics on measured train tracks.

A weight vector realizes the prelamination as a stack of measured bands;
integer weights give a strand model (parallel strands, order-preserving
switch pairings).  Separatrices are traced by the interval-translation
transition across switch fibers: a point at height h in a band maps across
the terminal switch to height h plus the total width stacked below, and the
receiving band is the one whose height interval contains the image.  A
trace ends exactly when the image height equals a cusp height.

Heights are measured from the first-listed entry of each switch side, and a
band keeps its local coordinate from one end to the other, so transitions
are pure rational shifts and cusp heights are exact partial sums.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Mapping, Sequence

from . import cones, linalg
from .model import Cusp, Segment, Switch, TrainTrack, WeightVector

FORWARD = "forward"
BACKWARD = "backward"

HITS_CUSP = "hits-cusp"
CLOSES_UP = "closes-up"
BOUND_EXCEEDED = "step-bound-exceeded"


def _require_invariant(track: TrainTrack, w: WeightVector) -> None:
    cone = cones.build_cone(track)
    if not cone.contains(w):
        raise ValueError("weights do not satisfy the switch equations")


# ---------------------------------------------------------------------------
# strand model


@dataclass(frozen=True)
class StrandModel:
    """Integer-weight realization: w_i parallel strands per segment and an
    order-preserving pairing of incoming and outgoing strand positions at
    every switch."""

    track: TrainTrack
    weights: WeightVector

    @cached_property
    def counts(self) -> Mapping[str, int]:
        return {name: int(self.weights[name]) for name in self.track.segment_names}

    @cached_property
    def switch_pairings(
        self,
    ) -> Mapping[str, tuple[tuple[tuple[str, int], tuple[str, int]], ...]]:
        """switch -> tuple of ((seg_in, pos_in), (seg_out, pos_out)), ordered
        by global stack position."""
        out = {}
        for sw in self.track.switches:
            incoming = [(s, p) for s in sw.side_a for p in range(self.counts[s])]
            outgoing = [(s, p) for s in sw.side_b for p in range(self.counts[s])]
            out[sw.name] = tuple(zip(incoming, outgoing))
        return out

    def successor(self, slot: tuple[str, int]) -> tuple[str, int]:
        """The next strand slot in the direction of the orientation."""
        seg, pos = slot
        if seg in self.track.closed:
            return slot
        sw_name, i = self.track.arrival[seg]
        sw = self.track.switch_by_name[sw_name]
        g = sum(self.counts[s] for s in sw.side_a[:i]) + pos
        for out_seg in sw.side_b:
            c = self.counts[out_seg]
            if g < c:
                return (out_seg, g)
            g -= c
        raise AssertionError("switch equation violated in strand model")

    def slots(self) -> Iterator[tuple[str, int]]:
        for name in self.track.segment_names:
            for pos in range(self.counts[name]):
                yield (name, pos)


@dataclass(frozen=True)
class Component:
    length: int
    orientation_consistent: bool
    visits: Mapping[str, int]


def strand_model(track: TrainTrack, w: WeightVector) -> StrandModel:
    if not w.is_integral():
        raise ValueError("strand models need integer weights")
    _require_invariant(track, w)
    return StrandModel(track, w)


def components(model: StrandModel) -> tuple[Component, ...]:
    """Cycle decomposition of the strand permutation.

    Components are reported in order of their first slot (segment
    declaration order, then stack position).  Per-component visit counts
    sum back to the weight vector.
    """
    seen: set[tuple[str, int]] = set()
    out: list[Component] = []
    for slot in model.slots():
        if slot in seen:
            continue
        visits: dict[str, int] = {}
        cur = slot
        length = 0
        while cur not in seen:
            seen.add(cur)
            visits[cur[0]] = visits.get(cur[0], 0) + 1
            length += 1
            cur = model.successor(cur)
        out.append(Component(length=length, orientation_consistent=True, visits=visits))
    return tuple(out)


# ---------------------------------------------------------------------------
# separatrix tracing


@dataclass(frozen=True)
class TraceResult:
    origin: Cusp
    direction: str
    outcome: str  # HITS_CUSP | CLOSES_UP | BOUND_EXCEEDED
    steps: int
    transcript: tuple[tuple[str, Fraction], ...]
    target: Cusp | None = None
    period: int | None = None
    bound: int | None = None


class _Machine:
    """Integer trace machine for one (track, weights) in forward direction.

    Weights are scaled by the common denominator so every height is an
    integer; transcripts convert back on report.
    """

    def __init__(self, track: TrainTrack, w: WeightVector):
        self.track = track
        self.scale = linalg.clear_denominators(w.entries.values())
        self.w = {k: int(v * self.scale) for k, v in w.entries.items()}
        self.cum_a: dict[str, list[int]] = {}
        self.cum_b: dict[str, list[int]] = {}
        self.b_cusp_at: dict[str, dict[int, Cusp]] = {}
        for sw in track.switches:
            self.cum_a[sw.name] = self._cumsum(sw.side_a)
            self.cum_b[sw.name] = self._cumsum(sw.side_b)
            self.b_cusp_at[sw.name] = self._interior_boundaries(sw.name, sw.side_b, "B")

    def _cumsum(self, side: Sequence[str]) -> list[int]:
        acc = [0]
        for seg in side:
            acc.append(acc[-1] + self.w[seg])
        return acc

    def _interior_boundaries(self, sw_name: str, side: Sequence[str], label: str) -> dict[int, Cusp]:
        cum = self.cum_b[sw_name] if label == "B" else self.cum_a[sw_name]
        total = cum[-1]
        found: dict[int, Cusp] = {}
        for k in range(1, len(side)):
            h = cum[k]
            if 0 < h < total and h not in found:
                found[h] = Cusp(sw_name, label, k)
        return found

    def geometric_a_cusps(self) -> list[tuple[Cusp, int]]:
        """Realized incoming-side cusps as (canonical id, height)."""
        out = []
        for sw in self.track.switches:
            cum = self.cum_a[sw.name]
            total = cum[-1]
            seen_heights: set[int] = set()
            for k in range(1, len(sw.side_a)):
                h = cum[k]
                if 0 < h < total and h not in seen_heights:
                    seen_heights.add(h)
                    out.append((Cusp(sw.name, "A", k), h))
        return out

    def start_height(self, cusp: Cusp) -> int:
        return self.cum_a[cusp.switch][cusp.index]

    def flanks_positive(self, cusp: Cusp) -> bool:
        sw = self.track.switch_by_name[cusp.switch]
        side = sw.side(cusp.side)
        return self.w[side[cusp.index - 1]] > 0 and self.w[side[cusp.index]] > 0

    def run(self, origin: Cusp, height: int, max_steps: int) -> tuple[str, dict]:
        """Trace forward from a switch-fiber point at the given height."""
        sw_name = origin.switch
        transcript: list[tuple[str, Fraction]] = []
        seen: dict[tuple[str, int], int] = {}
        h_global = height
        steps = 0
        while True:
            hit = self.b_cusp_at[sw_name].get(h_global)
            if hit is not None:
                return HITS_CUSP, {"target": hit, "steps": steps, "transcript": transcript}
            sw = self.track.switch_by_name[sw_name]
            cum = self.cum_b[sw_name]
            k = _band_of(cum, h_global)
            seg = sw.side_b[k]
            h_local = h_global - cum[k]
            state = (seg, h_local)
            if state in seen:
                return CLOSES_UP, {
                    "period": steps - seen[state],
                    "steps": steps,
                    "transcript": transcript,
                }
            seen[state] = steps
            if steps >= max_steps:
                return BOUND_EXCEEDED, {
                    "bound": max_steps,
                    "steps": steps,
                    "transcript": transcript,
                }
            transcript.append((seg, Fraction(h_local, self.scale)))
            steps += 1
            sw_name, i = self.track.arrival[seg]
            h_global = self.cum_a[sw_name][i] + h_local


def _band_of(cum: list[int], h: int) -> int:
    lo, hi = 0, len(cum) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cum[mid] <= h:
            lo = mid
        else:
            hi = mid
    return lo


def _admissible_direction(cusp: Cusp) -> str:
    return FORWARD if cusp.side == "A" else BACKWARD


def trace_separatrix(
    track: TrainTrack,
    w: WeightVector,
    cusp: Cusp | str,
    direction: str = "auto",
    max_steps: int = 10**6,
) -> TraceResult:
    """Trace the separatrix leaving a cusp until it hits a cusp, revisits a
    state, or exhausts the step bound.

    Cusps between incoming bands point forward; cusps between outgoing
    bands point backward.  Only the admissible direction can be traced.
    """
    if isinstance(cusp, str):
        cusp = Cusp.parse(cusp)
    if not track.has_cusp(cusp):
        raise ValueError(f"no such cusp: {cusp}")
    _require_invariant(track, w)
    admissible = _admissible_direction(cusp)
    if direction == "auto":
        direction = admissible
    elif direction != admissible:
        raise ValueError(f"cusp {cusp} admits only {admissible} tracing")

    work_track = track if direction == FORWARD else track.reversed_track()
    work_cusp = cusp if direction == FORWARD else Cusp(cusp.switch, "A", cusp.index)
    machine = _Machine(work_track, w)
    if not machine.flanks_positive(work_cusp):
        raise ValueError(f"cusp {cusp} not realized: a flanking weight is zero")
    outcome, data = machine.run(work_cusp, machine.start_height(work_cusp), max_steps)
    target = data.get("target")
    if target is not None and direction == BACKWARD:
        target = Cusp(target.switch, "A" if target.side == "B" else "B", target.index)
    return TraceResult(
        origin=cusp,
        direction=direction,
        outcome=outcome,
        steps=data["steps"],
        transcript=tuple(data["transcript"]),
        target=target,
        period=data.get("period"),
        bound=data.get("bound"),
    )


@dataclass(frozen=True)
class IrreducibilityResult:
    verdict: str  # "irreducible" | "reducible" | "undecided"
    witness: TraceResult | None = None
    bound_needed: int | None = None
    closed_leaves: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.verdict == "irreducible"


def is_irreducible(track: TrainTrack, w: WeightVector, max_steps: int = 10**6) -> IrreducibilityResult:
    """Decide whether the prelamination has a compact separatrix.

    Traces from every realized cusp in its admissible direction.  For
    rational weights the scaled-integer orbit is finite, so with
    max_steps >= sum of scaled weights + 1 the answer is never undecided;
    that bound is reported whenever the verdict is undecided.

    Positive-weight closed-curve sectors are listed in the result: they are
    closed leaves, and the torus-specific irreducibility clause cannot be
    checked combinatorially.
    """
    _require_invariant(track, w)
    closed_leaves = tuple(s for s in track.segment_names if s in track.closed and w[s] > 0)
    machines = {
        FORWARD: _Machine(track, w),
        BACKWARD: _Machine(track.reversed_track(), w),
    }
    bound_needed = sum(machines[FORWARD].w.values()) + 1
    exceeded = False
    for direction, machine in machines.items():
        for work_cusp, height in machine.geometric_a_cusps():
            outcome, data = machine.run(work_cusp, height, max_steps)
            if outcome == HITS_CUSP:
                origin = work_cusp
                target = data["target"]
                if direction == BACKWARD:
                    origin = Cusp(origin.switch, "B", origin.index)
                    target = Cusp(target.switch, "A" if target.side == "B" else "B", target.index)
                witness = TraceResult(
                    origin=origin,
                    direction=direction,
                    outcome=outcome,
                    steps=data["steps"],
                    transcript=tuple(data["transcript"]),
                    target=target,
                )
                return IrreducibilityResult(
                    "reducible", witness=witness, closed_leaves=closed_leaves
                )
            if outcome == BOUND_EXCEEDED:
                exceeded = True
    if exceeded:
        return IrreducibilityResult(
            "undecided", bound_needed=bound_needed, closed_leaves=closed_leaves
        )
    return IrreducibilityResult("irreducible", closed_leaves=closed_leaves)


# ---------------------------------------------------------------------------
# splitting and pinching


@dataclass(frozen=True)
class MoveRecord:
    """Record of one splitting move, sufficient to undo it exactly."""

    kind: str  # "left" | "right" | "parallel" | "collision"
    cusp: Cusp
    split_segment: str | None
    pieces: tuple[str, str] | None
    pre_track: TrainTrack
    pre_weights: WeightVector
    post_track: TrainTrack
    post_weights: WeightVector


def _unique_name(base: str, taken: set[str]) -> str:
    name = base
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def split_at_cusp(
    track: TrainTrack, w: WeightVector, cusp: Cusp | str
) -> tuple[TrainTrack, WeightVector, MoveRecord]:
    """One measured splitting step along the initial arc of the cusp's
    separatrix.

    The arc crosses the switch fiber into the opposite stack.  If it lands
    exactly on an opposite-side cusp the two cusps annihilate and the
    switch severs (collision split, possibly disconnecting the track).
    Otherwise it continues through the band it entered: the band is cut
    lengthwise at the crossing height, the origin switch severs at the
    consumed cusp, and a new cusp appears where the cut reaches the band's
    far end.  When the far end lands exactly on a cusp of a *different*
    switch, that switch severs too and the cusp pair annihilates there.

    The move never amalgamates bands, so results may contain bivalent
    switches; these are honest presentations of the same multicurve, and
    keeping them makes per-component visit counts invariant under the
    move.  The label is right/left/parallel by comparison of the flanking
    weights, collision when a cusp pair annihilates.
    """
    if isinstance(cusp, str):
        cusp = Cusp.parse(cusp)
    if not track.has_cusp(cusp):
        raise ValueError(f"no such cusp: {cusp}")
    _require_invariant(track, w)
    if cusp.side == "B":
        rev_track, rev_w, record = _split_forward(
            track.reversed_track(), w, Cusp(cusp.switch, "A", cusp.index)
        )
        new_track = rev_track.reversed_track()
        return (
            new_track,
            rev_w,
            MoveRecord(
                kind=record.kind,
                cusp=cusp,
                split_segment=record.split_segment,
                pieces=record.pieces,
                pre_track=track,
                pre_weights=w,
                post_track=new_track,
                post_weights=rev_w,
            ),
        )
    return _split_forward(track, w, cusp)


def _split_forward(
    track: TrainTrack, w: WeightVector, cusp: Cusp
) -> tuple[TrainTrack, WeightVector, MoveRecord]:
    sw = track.switch_by_name[cusp.switch]
    left_seg, right_seg = sw.side_a[cusp.index - 1], sw.side_a[cusp.index]
    w_left, w_right = w[left_seg], w[right_seg]
    if w_left == 0 or w_right == 0:
        raise ValueError(f"cusp {cusp} not realized: a flanking weight is zero")
    kind = "right" if w_left > w_right else "left" if w_left < w_right else "parallel"

    height = sum((w[s] for s in sw.side_a[: cusp.index]), Fraction(0))
    cum_b = [Fraction(0)]
    for s in sw.side_b:
        cum_b.append(cum_b[-1] + w[s])

    seg_names = set(track.segment_names)
    switch_names = set(sw.name for sw in track.switches)

    # mutable working copies
    segments = list(track.segments)
    weights = dict(w.entries)
    closed = set(track.closed)
    sides: dict[str, dict[str, list[str]]] = {
        s.name: {"A": list(s.side_a), "B": list(s.side_b)} for s in track.switches
    }
    switch_order = [s.name for s in track.switches]

    boundary_k = next(
        (k for k in range(1, len(sw.side_b)) if cum_b[k] == height), None
    )

    # Each sever is (switch name, A-side token, B-side token): the fiber is
    # cut just above both named entries.
    severs: list[tuple[str, str, str]] = []
    split_segment = None
    pieces = None

    if boundary_k is not None:
        # the arc ends on an opposite-side cusp of the same fiber
        kind = "collision"
        severs.append((sw.name, sw.side_a[cusp.index - 1], sw.side_b[boundary_k - 1]))
    else:
        k = max(i for i in range(len(sw.side_b)) if cum_b[i] < height)
        target = sw.side_b[k]
        local = height - cum_b[k]
        split_segment = target
        lo = _unique_name(f"{target}.lo", seg_names)
        hi = _unique_name(f"{target}.hi", seg_names)
        pieces = (lo, hi)
        flip = next(s.flip for s in segments if s.name == target)
        pos = next(i for i, s in enumerate(segments) if s.name == target)
        segments[pos : pos + 1] = [Segment(lo, flip), Segment(hi, flip)]
        weights[lo] = local
        weights[hi] = weights[target] - local
        del weights[target]
        arrival_sw, _ = track.arrival[target]
        for name in switch_order:
            for side in ("A", "B"):
                entries = sides[name][side]
                if target in entries:
                    j = entries.index(target)
                    entries[j : j + 1] = [lo, hi]
        # the consumed cusp may have the split band itself as its left flank
        a_token = hi if left_seg == target else left_seg
        severs.append((sw.name, a_token, lo))

        # does the far end of the cut land exactly on a cusp?
        if arrival_sw != sw.name:
            far_cum = Fraction(0)
            for s in sides[arrival_sw]["A"]:
                if s == lo:
                    break
                far_cum += weights[s]
            far_height = far_cum + local
            far_b = sides[arrival_sw]["B"]
            acc = Fraction(0)
            for i, s in enumerate(far_b[:-1]):
                acc += weights[s]
                if acc == far_height:
                    kind = "collision"
                    severs.append((arrival_sw, lo, s))
                    break

    # apply severs
    worklist: list[tuple[str, list[str], list[str]]] = [
        (name, sides[name]["A"], sides[name]["B"]) for name in switch_order
    ]
    for sever_switch, a_tok, b_tok in severs:
        for idx, (name, sa, sb) in enumerate(worklist):
            if name == sever_switch:
                ia = sa.index(a_tok) + 1
                ib = sb.index(b_tok) + 1
                low_name = _unique_name(f"{name}.1", switch_names)
                high_name = _unique_name(f"{name}.2", switch_names)
                worklist[idx : idx + 1] = [
                    (low_name, sa[:ia], sb[:ib]),
                    (high_name, sa[ia:], sb[ib:]),
                ]
                break
        else:
            raise AssertionError(f"sever target {sever_switch!r} vanished")

    new_track = TrainTrack(
        name=track.name,
        segments=tuple(segments),
        switches=tuple(Switch(name, tuple(sa), tuple(sb)) for name, sa, sb in worklist),
        closed=frozenset(closed),
    )
    new_w = WeightVector(weights)
    record = MoveRecord(
        kind=kind,
        cusp=cusp,
        split_segment=split_segment,
        pieces=pieces,
        pre_track=track,
        pre_weights=w,
        post_track=new_track,
        post_weights=new_w,
    )
    return new_track, new_w, record


def pinch(track: TrainTrack, w: WeightVector, record: MoveRecord) -> tuple[TrainTrack, WeightVector]:
    """Exact inverse of the recorded split: restores the pre-move state.

    The record carries both endpoint states; pinching verifies the current
    state matches the move's result and hands back the original.
    """
    if track != record.post_track or w != record.post_weights:
        raise ValueError("stale or mismatched move-record")
    return record.pre_track, record.pre_weights
