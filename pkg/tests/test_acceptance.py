"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test prints a single PASS line (visible with `pytest -s` or `-rA`)
including the measured runtime where the criterion carries a budget.  All
comparisons are exact rational equality; there are no tolerances to tune.
"""

import random
import time
from fractions import Fraction

from lamcone import (
    ScallopedSummary,
    WeightVector,
    audit_structure,
    boundary_map,
    build_cone,
    cell_vertices,
    chi_functional,
    close_under_sums,
    components,
    fiber_polytope,
    find_integer_multiple,
    is_irreducible,
    pinch,
    scalloped_summary,
    split_at_cusp,
    strand_model,
    validate_track,
    x_family,
    x_single,
)
from lamcone.maxchi import INFEASIBLE, UNBOUNDED

from genutil import (
    oracle_cell_vertices,
    oracle_components,
    oracle_orbit_verdict,
    random_boundary_weights,
    random_integer_weights,
    random_presentation,
    random_rational_weights,
    random_track,
)


def _passed(num: int, label: str, elapsed: float, budget: float | None) -> None:
    if budget is None:
        print(f"ACCEPTANCE {num} [{label}]: PASS ({elapsed:.3f}s)")
    else:
        assert elapsed < budget, f"criterion {num} exceeded its {budget}s budget: {elapsed:.2f}s"
        print(f"ACCEPTANCE {num} [{label}]: PASS ({elapsed:.3f}s < {budget}s)")


def test_criterion_1_fig1_cone_and_vertices(fig1_doc):
    start = time.perf_counter()
    bs = fig1_doc.presentation("fig1")
    cone = build_cone(bs)
    assert cone.variables == ("x", "y", "z")
    assert cone.equalities == ((3, -2, -2),)
    cell = cell_vertices(cone)
    expected = {
        (Fraction(2, 5), Fraction(3, 5), Fraction(0)),
        (Fraction(2, 5), Fraction(0), Fraction(3, 5)),
    }
    assert set(cell.as_tuples()) == expected
    assert oracle_cell_vertices(cone.equalities, 3) == expected
    _passed(1, "fig1 cone and cell vertices", time.perf_counter() - start, 0.1)


def test_criterion_2_torus_handle_values(torus_handle_doc):
    start = time.perf_counter()
    w1 = WeightVector({"a": 1})
    assert x_single(torus_handle_doc.presentation("BG"), w1) == -3
    assert x_single(torus_handle_doc.presentation("BH"), w1) == Fraction(-1, 3)
    res = x_family(torus_handle_doc.family("F"), w1)
    assert res.status == "ok" and res.value == Fraction(-1, 3)
    assert res.witnesses == (("BH", WeightVector({"H": Fraction(1, 3)})),)
    _passed(2, "torus-handle maximal chi", time.perf_counter() - start, 0.1)


def test_criterion_3_nonbound_integer_multiple(nonbound_doc):
    start = time.perf_counter()
    bs = nonbound_doc.presentation("BH")
    w1 = WeightVector({"a": 1})
    result = find_integer_multiple(bs, w1)
    assert result is not None
    k, v = result
    assert k == 3
    assert v.is_integral() and v == WeightVector({"H": 1})
    assert boundary_map(bs).apply(v) == w1.scaled(k)
    _passed(3, "nonbound needs 3 copies", time.perf_counter() - start, None)


def test_criterion_4_structure_audits(torus_handle_doc, adversarial_doc):
    start = time.perf_counter()
    clean = audit_structure(torus_handle_doc.family("F"), 1000, seed=0)
    assert clean.ok and clean.checked >= 1000

    raw = audit_structure(adversarial_doc.family("ADV"), 1000, seed=0)
    hits = [
        f
        for f in raw.findings
        if f.kind == "concavity"
        and f.data["t"] == "1/2"
        and f.data["w0"] in ({"a": "1", "b": "0"}, {"a": "0", "b": "1"})
        and f.data["w1"] in ({"a": "1", "b": "0"}, {"a": "0", "b": "1"})
    ]
    assert hits, "the vertex-pair concavity violation was not detected"
    assert hits[0].data["X(mix)"] == "-11/2" and hits[0].data["bound"] == "-1"
    assert all(f.kind != "homogeneity" for f in raw.findings)

    closed = audit_structure(close_under_sums(adversarial_doc.family("ADV")), 1000, seed=0)
    assert closed.ok and closed.checked >= 1000
    _passed(4, "structure audits", time.perf_counter() - start, 5.0)


def test_criterion_5_lp_versus_vertex_enumeration():
    start = time.perf_counter()
    rng = random.Random(2024)
    solved = 0
    for _ in range(200):
        bs = random_presentation(rng, max_sectors=8, max_segments=5)
        w = random_boundary_weights(rng, bs)
        value = x_single(bs, w)
        fiber = fiber_polytope(bs, w)
        vertices = fiber.vertices()
        if value is INFEASIBLE:
            assert not vertices
            continue
        positive_ray = any(chi_functional(bs, r) > 0 for r in fiber.recession_rays())
        if value is UNBOUNDED:
            assert positive_ray
            continue
        assert not positive_ray
        assert value == max(chi_functional(bs, v) for v in vertices)
        solved += 1
    assert solved >= 50
    _passed(5, "LP equals vertex enumeration on 200 instances", time.perf_counter() - start, 30.0)


def test_criterion_6_dynamics_oracles():
    start = time.perf_counter()
    rng = random.Random(606)
    for _ in range(100):
        track = random_track(rng, max_open=6)
        w = random_integer_weights(rng, track, cap=10, cycles=(2, 5), max_mult=2)
        assert max(w.entries.values(), default=0) <= 10
        got = sorted(
            (c.length, tuple(sorted(c.visits.items())))
            for c in components(strand_model(track, w))
        )
        assert got == oracle_components(track, w)

        base_counts = len(got)
        base_lengths = [n for n, _ in got]
        state = (track, w)
        stack = []
        for _ in range(20):
            realizable = [
                c
                for c in state[0].cusps()
                if all(
                    state[1][s] > 0
                    for s in (
                        state[0].switch_by_name[c.switch].side(c.side)[c.index - 1],
                        state[0].switch_by_name[c.switch].side(c.side)[c.index],
                    )
                )
            ]
            if not realizable:
                break
            new_track, new_w, record = split_at_cusp(state[0], state[1], rng.choice(realizable))
            assert validate_track(new_track).ok
            comps = components(strand_model(new_track, new_w))
            assert len(comps) == base_counts
            assert sorted(c.length for c in comps) == base_lengths
            stack.append((state, record))
            state = (new_track, new_w)
        while stack:
            prev, record = stack.pop()
            state = pinch(state[0], state[1], record)
            assert state == prev
        assert state == (track, w)
    _passed(6, "strand dynamics on 100 instances", time.perf_counter() - start, 10.0)


def test_criterion_7_scalloped_index():
    start = time.perf_counter()
    rng = random.Random(77)
    for _ in range(500):
        track = random_track(rng)
        summary = scalloped_summary(track)
        assert summary.index == 0
        assert summary.supports_measured_foliation
    hand = ScallopedSummary(euler_char=1, cusp_count=1)
    assert hand.index == Fraction(3, 2)
    assert not hand.supports_measured_foliation
    _passed(7, "scalloped index vanishes on 500 tracks", time.perf_counter() - start, None)


def test_criterion_8_irreducibility_bound_and_oracle():
    start = time.perf_counter()
    rng = random.Random(808)
    for _ in range(100):
        track = random_track(rng, max_open=6)
        w = random_rational_weights(rng, track)
        scale = 1
        for v in w.entries.values():
            scale = scale * v.denominator // __import__("math").gcd(scale, v.denominator)
        assert scale <= 10**4
        oracle_verdict, bound = oracle_orbit_verdict(track, w)
        result = is_irreducible(track, w, max_steps=bound)
        assert result.verdict != "undecided"
        assert result.verdict == oracle_verdict
        if result.verdict == "reducible":
            assert result.witness is not None and result.witness.outcome == "hits-cusp"
    _passed(8, "irreducibility bound and orbit oracle", time.perf_counter() - start, None)
