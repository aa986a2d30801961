"""Command-line driver.

Loads a `.lam` document, dispatches one analysis, renders the result as
text, JSON, or CSV.  Output is byte-identical across runs on the same
input: no timestamps unless --timed is given, fixed seeds, deterministic
algorithms underneath.

Exit codes: 0 success, 1 domain findings (validation violations, audit
findings, infeasible or undecided results), 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from fractions import Fraction

from . import chi as chi_mod
from . import cones, dynamics, maxchi
from .lamfile import (
    Document,
    LamError,
    LamValidationError,
    document_json,
    fraction_json,
    format_equation,
    parse_document,
    serialize_document,
    weight_vector_json,
)
from .model import (
    Cusp,
    IndexMismatchError,
    WeightVector,
    validate_presentation,
    validate_track,
)

DEFAULT_MAX_STEPS = 10**6


class _Usage(Exception):
    pass


def _load(path: str) -> Document:
    with open(path, "r", encoding="utf-8") as f:
        return parse_document(f.read(), validate=True)


def _emit_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _emit_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue().rstrip("\n")


def _weights_on_track(doc: Document, name: str, track_name: str) -> WeightVector:
    nw = doc.named_weights(name)
    if nw.target != track_name:
        raise _Usage(f"weights {name!r} target {nw.target!r}, expected {track_name!r}")
    return nw.vector


def _vertex_text(w: WeightVector, order) -> str:
    return "(" + ", ".join(str(w[v]) for v in order) + ")"


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (exit_code, text, json payload, csv rows)


def _cmd_validate(doc: Document, args) -> tuple[int, str, dict, None]:
    reports = [validate_track(t) for t in doc.tracks]
    reports += [validate_presentation(p) for p in doc.presentations]
    bad = sum(1 for r in reports if not r.ok)
    text = "\n".join(str(r) for r in reports) if reports else "empty document"
    payload = {
        "reports": [
            {
                "subject": r.subject,
                "ok": r.ok,
                "violations": [{"code": v.code, "message": v.message} for v in r.violations],
            }
            for r in reports
        ]
    }
    return (1 if bad else 0), text, payload, None


def _select_cone(doc: Document, args):
    if bool(args.track) == bool(args.surface):
        raise _Usage("select exactly one of --track or --surface")
    if args.track:
        source = doc.track(args.track)
        label = f"track {args.track}"
    else:
        source = doc.presentation(args.surface)
        label = f"surface {args.surface}"
    return cones.build_cone(source), label


def _cmd_cone(doc: Document, args) -> tuple[int, str, dict, None]:
    cone, label = _select_cone(doc, args)
    lines = [f"cone of {label} (variables: {' '.join(cone.variables)})"]
    for row in cone.equalities:
        lines.append("  " + format_equation(dict(zip(cone.variables, row)), cone.variables))
    lines.append(f"solution dimension: {cone.solution_dim}")
    payload = {
        "variables": list(cone.variables),
        "equalities": [list(r) for r in cone.equalities],
        "solution_dimension": cone.solution_dim,
    }
    return 0, "\n".join(lines), payload, None


def _cmd_vertices(doc: Document, args) -> tuple[int, str, dict, list]:
    cone, label = _select_cone(doc, args)
    cell = cones.cell_vertices(cone)
    lines = [f"weight cell vertices of {label} (variables: {' '.join(cell.variables)})"]
    lines += ["  " + _vertex_text(v, cell.variables) for v in cell.vertices]
    if not cell.vertices:
        lines.append("  (zero cone)")
    payload = {
        "variables": list(cell.variables),
        "vertices": [weight_vector_json(v) for v in cell.vertices],
    }
    rows = [list(cell.variables)] + [
        [str(v[name]) for name in cell.variables] for v in cell.vertices
    ]
    return 0, "\n".join(lines), payload, rows


def _cmd_chi(doc: Document, args) -> tuple[int, str, dict, None]:
    bs = doc.presentation(args.surface)
    nw = doc.named_weights(args.weights)
    if nw.target != args.surface:
        raise _Usage(f"weights {args.weights!r} are not on surface {args.surface!r}")
    value = chi_mod.chi_functional(bs, nw.vector)
    text = f"chi({args.surface}({args.weights})) = {value}"
    return 0, text, {"chi": fraction_json(value)}, None


def _cmd_maxchi(doc: Document, args) -> tuple[int, str, dict, None]:
    fam = doc.family(args.family)
    w = _weights_on_track(doc, args.weights, fam.boundary_track.name)
    result = maxchi.x_family(fam, w)
    if result.status != "ok":
        return 1, f"X = {result.status}", {"status": result.status}, None
    lines = [f"X = {result.value}"]
    for name, witness in result.witnesses:
        parts = ", ".join(f"{k} = {v}" for k, v in witness.entries.items())
        lines.append(f"witness {name}: {parts}")
    payload = {
        "status": "ok",
        "value": fraction_json(result.value),
        "witnesses": [
            {"member": name, "weights": weight_vector_json(wit)}
            for name, wit in result.witnesses
        ],
    }
    return 0, "\n".join(lines), payload, None


def _cmd_profile(doc: Document, args) -> tuple[int, str, dict, list]:
    fam = doc.family(args.family)
    track_name = fam.boundary_track.name
    w0 = _weights_on_track(doc, getattr(args, "from"), track_name)
    w1 = _weights_on_track(doc, args.to, track_name)
    prof = maxchi.profile(fam, w0, w1)
    lines = []
    for p in prof.pieces:
        sign = "-" if p.intercept < 0 else "+"
        lines.append(
            f"[{p.t0}, {p.t1}]  X(t) = {p.slope}*t {sign} {abs(p.intercept)}  (witness {p.witness})"
        )
    if not prof.pieces:
        lines.append("infeasible along the whole segment")
    payload = {
        "pieces": [
            {
                "t0": fraction_json(p.t0),
                "t1": fraction_json(p.t1),
                "slope": fraction_json(p.slope),
                "intercept": fraction_json(p.intercept),
                "witness": p.witness,
            }
            for p in prof.pieces
        ],
        "breakpoints": [fraction_json(b) for b in prof.breakpoints],
    }
    rows = [["t0", "t1", "slope", "intercept", "witness"]] + [
        [str(p.t0), str(p.t1), str(p.slope), str(p.intercept), p.witness] for p in prof.pieces
    ]
    return (0 if prof.pieces else 1), "\n".join(lines), payload, rows


def _audit_reports(doc: Document, args):
    reports = []
    if args.family:
        fam = doc.family(args.family)
        reports.append(maxchi.audit_structure(fam, args.samples, seed=args.seed))
    if args.surface:
        reports.append(chi_mod.closed_chi_audit(doc.presentation(args.surface)))
    if not args.family and not args.surface:
        for p in doc.presentations:
            if p.aspherical:
                reports.append(chi_mod.closed_chi_audit(p))
    return reports


def _cmd_audit(doc: Document, args) -> tuple[int, str, dict, list]:
    reports = _audit_reports(doc, args)
    if not reports:
        raise _Usage("nothing to audit: give --family and/or --surface")
    text = "\n".join(str(r) for r in reports)
    findings = sum(len(r.findings) for r in reports)
    payload = {
        "reports": [
            {
                "subject": r.subject,
                "checked": r.checked,
                "ok": r.ok,
                "findings": [
                    {"kind": f.kind, "message": f.message, "data": dict(f.data)}
                    for f in r.findings
                ],
            }
            for r in reports
        ]
    }
    rows = [["subject", "kind", "message"]]
    for r in reports:
        for f in r.findings:
            rows.append([r.subject, f.kind, f.message])
    return (1 if findings else 0), text, payload, rows


def _trace_json(tr: dynamics.TraceResult) -> dict:
    return {
        "origin": str(tr.origin),
        "direction": tr.direction,
        "outcome": tr.outcome,
        "steps": tr.steps,
        "target": str(tr.target) if tr.target else None,
        "period": tr.period,
        "bound": tr.bound,
        "transcript": [
            {"segment": seg, "height": fraction_json(h)} for seg, h in tr.transcript
        ],
    }


def _render_trace_text(tr: dynamics.TraceResult) -> list[str]:
    lines = [f"trace from {tr.origin} ({tr.direction}): {tr.outcome} after {tr.steps} step(s)"]
    if tr.target is not None:
        lines.append(f"  target cusp: {tr.target}")
    if tr.period is not None:
        lines.append(f"  period: {tr.period}")
    for seg, h in tr.transcript:
        lines.append(f"  {seg} @ {h}")
    return lines


def _cmd_trace(doc: Document, args) -> tuple[int, str, dict, None]:
    track = doc.track(args.track)
    w = _weights_on_track(doc, args.weights, args.track)
    if args.all:
        res = dynamics.is_irreducible(track, w, max_steps=args.max_steps)
        lines = [f"verdict: {res.verdict}"]
        if res.witness:
            lines += _render_trace_text(res.witness)
        if res.verdict == "undecided":
            lines.append(f"  sufficient bound: {res.bound_needed}")
        if res.closed_leaves:
            lines.append(
                "  closed leaves (torus clause not checked): " + " ".join(res.closed_leaves)
            )
        payload = {
            "verdict": res.verdict,
            "witness": _trace_json(res.witness) if res.witness else None,
            "bound_needed": res.bound_needed,
            "closed_leaves": list(res.closed_leaves),
        }
        return (1 if res.verdict == "undecided" else 0), "\n".join(lines), payload, None
    tr = dynamics.trace_separatrix(
        track, w, args.cusp, direction=args.direction, max_steps=args.max_steps
    )
    if args.svg:
        _write_orbit_svg(args.svg, tr, w)
    code = 1 if tr.outcome == dynamics.BOUND_EXCEEDED else 0
    return code, "\n".join(_render_trace_text(tr)), _trace_json(tr), None


def _write_orbit_svg(path: str, tr: dynamics.TraceResult, w: WeightVector) -> None:
    """Minimal orbit diagram: step index vs fiber height.  Display only;
    floats appear here and nowhere else."""
    width, height = 640, 240
    pts = []
    top = max((float(v) for v in w.entries.values()), default=1.0) or 1.0
    n = max(len(tr.transcript), 1)
    for i, (_, h) in enumerate(tr.transcript):
        x = 20 + (width - 40) * (i / max(n - 1, 1))
        y = height - 20 - (height - 40) * (float(h) / top)
        pts.append(f"{x:.1f},{y:.1f}")
    body = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<rect width="100%" height="100%" fill="white"/>'
        f'<polyline points="{" ".join(pts)}" fill="none" stroke="black"/>'
        f"</svg>\n"
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write(body)


def _cmd_components(doc: Document, args) -> tuple[int, str, dict, None]:
    track = doc.track(args.track)
    w = _weights_on_track(doc, args.weights, args.track)
    model = dynamics.strand_model(track, w)
    comps = dynamics.components(model)
    lines = [f"{len(comps)} component(s)"]
    for i, c in enumerate(comps):
        visits = " ".join(f"{k}:{v}" for k, v in sorted(c.visits.items()))
        lines.append(f"  component {i}: length {c.length}, visits {visits}")
    payload = {
        "count": len(comps),
        "components": [
            {
                "length": c.length,
                "orientation_consistent": c.orientation_consistent,
                "visits": dict(sorted(c.visits.items())),
            }
            for c in comps
        ],
    }
    return 0, "\n".join(lines), payload, None


def _cmd_split(doc: Document, args) -> tuple[int, str, dict, None]:
    track = doc.track(args.track)
    w = _weights_on_track(doc, args.weights, args.track)
    new_track, new_w, record = dynamics.split_at_cusp(track, w, args.cusp)
    from .lamfile import NamedWeights  # local to avoid a cycle at import time

    out_doc = Document(
        tracks=(new_track,),
        weights=(NamedWeights(args.weights, new_track.name, new_w),),
    )
    lines = [
        f"# split at {args.cusp}: {record.kind}"
        + (f", cut {record.split_segment} into {record.pieces[0]} {record.pieces[1]}" if record.pieces else ""),
        serialize_document(out_doc).rstrip("\n"),
    ]
    payload = {
        "kind": record.kind,
        "cusp": str(record.cusp),
        "split_segment": record.split_segment,
        "pieces": list(record.pieces) if record.pieces else None,
        "result": document_json(out_doc),
    }
    return 0, "\n".join(lines), payload, None


def _cmd_export(doc: Document, args) -> tuple[int, str, dict, None]:
    return 0, serialize_document(doc).rstrip("\n"), document_json(doc), None


_HANDLERS = {
    "validate": _cmd_validate,
    "cone": _cmd_cone,
    "vertices": _cmd_vertices,
    "chi": _cmd_chi,
    "maxchi": _cmd_maxchi,
    "profile": _cmd_profile,
    "audit": _cmd_audit,
    "trace": _cmd_trace,
    "components": _cmd_components,
    "split": _cmd_split,
    "export": _cmd_export,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lamcone",
        description="Exact workbench for measured train tracks and branched surfaces",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--timed", action="store_true", help="append wall-clock timing")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, **kwargs):
        p = sub.add_parser(name, parents=[common], **kwargs)
        p.add_argument("document", help="path to a .lam file")
        return p

    add("validate", help="validate every component of a document")
    for name in ("cone", "vertices"):
        p = add(name, help=f"{name} of a track or surface weight cone")
        p.add_argument("--track")
        p.add_argument("--surface")
    p = add("chi", help="weighted Euler characteristic of a surface")
    p.add_argument("--surface", required=True)
    p.add_argument("--weights", required=True)
    p = add("maxchi", help="maximal chi over a family")
    p.add_argument("--family", required=True)
    p.add_argument("--weights", required=True)
    p = add("profile", help="piecewise-linear X along a weight segment")
    p.add_argument("--family", required=True)
    p.add_argument("--from", required=True)
    p.add_argument("--to", required=True)
    p = add("audit", help="structure and closed-chi audits")
    p.add_argument("--family")
    p.add_argument("--surface")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p = add("trace", help="trace a separatrix")
    p.add_argument("--track", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--cusp")
    p.add_argument("--direction", choices=("auto", "forward", "backward"), default="auto")
    p.add_argument("--all", action="store_true", help="trace all cusps / irreducibility")
    p.add_argument(
        "--max-steps",
        type=int,
        default=int(os.environ.get("LAMCONE_MAX_STEPS", DEFAULT_MAX_STEPS)),
    )
    p.add_argument("--svg", help="write an orbit diagram to this path")
    p = add("components", help="multicurve decomposition of integer weights")
    p.add_argument("--track", required=True)
    p.add_argument("--weights", required=True)
    p = add("split", help="one measured splitting move at a cusp")
    p.add_argument("--track", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--cusp", required=True)
    add("export", help="canonical text (or JSON) for a document")
    return parser


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    start = time.perf_counter()
    try:
        doc = _load(args.document)
    except FileNotFoundError:
        print(f"error: no such file: {args.document}", file=sys.stderr)
        return 2
    except LamValidationError as exc:
        print("document failed validation:", file=sys.stdout)
        for report in exc.reports:
            print(str(report))
        return 1
    except LamError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2

    if args.command == "trace" and not args.all and not args.cusp:
        print("error: trace needs --cusp or --all", file=sys.stderr)
        return 2

    try:
        code, text, payload, rows = _HANDLERS[args.command](doc, args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except (IndexMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.format == "json":
        payload = {"schema": 1, "command": args.command, "exit": code, **payload}
        print(_emit_json(payload))
    elif args.format == "csv":
        if rows is None:
            print(f"error: no csv rendering for {args.command!r}", file=sys.stderr)
            return 2
        print(_emit_csv(rows))
    else:
        print(text)
    if args.timed:
        print(f"elapsed: {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
