import random
from fractions import Fraction

import pytest

from lamcone import (
    INFEASIBLE,
    UNBOUNDED,
    BranchedSurfacePresentation,
    Family,
    Sector,
    Segment,
    TrainTrack,
    WeightVector,
    additivity_check,
    audit_structure,
    boundary_map,
    build_cone,
    cell_vertices,
    chi_functional,
    close_under_sums,
    direct_sum,
    fiber_polytope,
    profile,
    x_family,
    x_single,
)

from genutil import random_boundary_weights, random_presentation


def w(**kw):
    return WeightVector(kw)


def closed_two_track():
    return TrainTrack(
        name="two", segments=(Segment("a"), Segment("b")), closed=frozenset({"a", "b"})
    )


class TestXSingle:
    def test_paper_values(self, torus_handle_doc):
        assert x_single(torus_handle_doc.presentation("BG"), w(a=1)) == -3
        assert x_single(torus_handle_doc.presentation("BH"), w(a=1)) == Fraction(-1, 3)

    def test_zero_weight(self, torus_handle_doc):
        assert x_single(torus_handle_doc.presentation("BG"), w(a=0)) == 0

    def test_infeasible(self):
        bs = BranchedSurfacePresentation(
            name="B",
            sectors=(Sector("H", -1),),
            branch_equations=(),
            boundary_track=closed_two_track(),
            boundary_incidence={"H": {"a": 3}},
            aspherical=True,
            oriented=True,
        )
        assert x_single(bs, w(a=1, b=1)) is INFEASIBLE

    def test_unbounded_on_positive_closed_direction(self):
        # a free sector of positive chi never meets the boundary: the fiber
        # recession cone contains a chi-positive closed direction
        bs = BranchedSurfacePresentation(
            name="bad",
            sectors=(Sector("P", 1), Sector("Q", -1)),
            branch_equations=(),
            boundary_track=closed_two_track(),
            boundary_incidence={"Q": {"a": 1, "b": 1}},
            aspherical=True,  # declared, untenable; the audit flags it
            oriented=True,
        )
        assert x_single(bs, w(a=1, b=1)) is UNBOUNDED
        from lamcone import closed_chi_audit

        assert not closed_chi_audit(bs).ok

    def test_agrees_with_fiber_vertex_enumeration(self):
        rng = random.Random(41)
        for _ in range(60):
            bs = random_presentation(rng, max_sectors=5, max_segments=3)
            wv = random_boundary_weights(rng, bs)
            got = x_single(bs, wv)
            fiber = fiber_polytope(bs, wv)
            verts = fiber.vertices()
            if got is INFEASIBLE:
                assert not verts
                continue
            rays = fiber.recession_rays()
            positive_ray = any(chi_functional(bs, r) > 0 for r in rays)
            if got is UNBOUNDED:
                assert positive_ray
                continue
            assert not positive_ray
            assert got == max(chi_functional(bs, v) for v in verts)


class TestFamily:
    def test_requires_common_track(self, torus_handle_doc, adversarial_doc):
        with pytest.raises(ValueError, match="different boundary track"):
            Family(
                (
                    torus_handle_doc.presentation("BG"),
                    adversarial_doc.presentation("B1"),
                )
            )

    def test_requires_flags(self, torus_handle_doc):
        from dataclasses import replace

        bad = replace(torus_handle_doc.presentation("BG"), aspherical=False)
        with pytest.raises(ValueError, match="aspherical"):
            Family((bad,))

    def test_requires_nonempty(self):
        with pytest.raises(ValueError):
            Family(())


class TestXFamily:
    def test_torus_handle(self, torus_handle_doc):
        fam = torus_handle_doc.family("F")
        res = x_family(fam, w(a=1))
        assert res.status == "ok"
        assert res.value == Fraction(-1, 3)
        assert res.witnesses == (("BH", WeightVector({"H": Fraction(1, 3)})),)

    def test_singleton(self, torus_handle_doc):
        fam = Family((torus_handle_doc.presentation("BG"),))
        assert x_family(fam, w(a=1)).value == -3

    def test_zero_weights(self, adversarial_doc):
        res = x_family(adversarial_doc.family("ADV"), w(a=0, b=0))
        assert res.value == 0
        assert {n for n, _ in res.witnesses} == {"B1", "B2"}

    def test_infeasible_iff_every_member_infeasible(self):
        bs = BranchedSurfacePresentation(
            name="B",
            sectors=(Sector("H", -1),),
            branch_equations=(),
            boundary_track=closed_two_track(),
            boundary_incidence={"H": {"a": 3}},
            aspherical=True,
            oriented=True,
        )
        res = x_family(Family((bs,)), w(a=1, b=1))
        assert res.status == "infeasible" and res.value is None

    def test_witnesses_satisfy_boundary_and_value(self):
        rng = random.Random(59)
        for _ in range(30):
            members = tuple(
                random_presentation(rng, max_sectors=4, max_segments=2) for _ in range(2)
            )
            from dataclasses import replace

            track = members[0].boundary_track
            members = (members[0], replace(members[1], boundary_track=track, name="M2"))
            fam = Family(members)
            wv = WeightVector(
                {s: Fraction(rng.randint(0, 4), rng.randint(1, 3)) for s in track.segment_names}
            )
            res = x_family(fam, wv)
            if res.status != "ok":
                continue
            assert res.witnesses
            for name, witness in res.witnesses:
                bs = fam.member(name)
                assert boundary_map(bs).apply(witness) == wv
                assert chi_functional(bs, witness) == res.value


class TestDirectSums:
    def test_direct_sum_structure(self, torus_handle_doc):
        bg = torus_handle_doc.presentation("BG")
        bh = torus_handle_doc.presentation("BH")
        s = direct_sum(bg, bh)
        assert s.sector_names == ("1.G", "2.H")
        assert boundary_map(s).matrix == ((1, 3),)
        v = WeightVector({"1.G": 1, "2.H": Fraction(1, 3)})
        assert chi_functional(s, v) == -3 + Fraction(-1, 3)

    def test_close_under_sums_improves_x(self, torus_handle_doc):
        fam = torus_handle_doc.family("F")
        closed = close_under_sums(fam)
        assert [m.name for m in closed.members] == [
            "BG",
            "BH",
            "BG+BG",
            "BG+BH",
            "BH+BH",
        ]
        # X(2) >= X(1) + X(1) = -2/3 in the closed family (witness in BH+BH)
        res = x_family(closed, w(a=2))
        assert res.value == Fraction(-2, 3)

    def test_self_sum_does_not_change_x(self, torus_handle_doc):
        fam = Family((torus_handle_doc.presentation("BH"),))
        closed = close_under_sums(fam)
        rng = random.Random(3)
        for _ in range(10):
            wv = w(a=Fraction(rng.randint(0, 8), rng.randint(1, 4)))
            assert x_family(fam, wv).value == x_family(closed, wv).value

    def test_closed_presentations_stay_closed(self, fig1_doc):
        bs = fig1_doc.presentation("fig1")
        s = direct_sum(bs, bs)
        assert s.boundary_incidence == {}
        assert len(s.branch_equations) == 2

    def test_never_decreases_x(self):
        rng = random.Random(77)
        for _ in range(15):
            base = random_presentation(rng, max_sectors=4, max_segments=2)
            fam = Family((base,))
            closed = close_under_sums(fam)
            for _ in range(5):
                wv = random_boundary_weights(rng, base)
                r0 = x_family(fam, wv)
                r1 = x_family(closed, wv)
                if r0.status == "ok":
                    assert r1.status == "ok" and r1.value >= r0.value


class TestProfile:
    def test_ray_is_linear(self, torus_handle_doc):
        fam = torus_handle_doc.family("F")
        prof = profile(fam, w(a=1), w(a=2))
        assert len(prof.pieces) == 1
        piece = prof.pieces[0]
        assert (piece.t0, piece.t1) == (0, 1)
        assert piece.slope == Fraction(-1, 3)
        assert piece.intercept == Fraction(-1, 3)
        assert piece.witness == "BH"

    def test_adversarial_kink(self, adversarial_doc):
        fam = adversarial_doc.family("ADV")
        prof = profile(fam, w(a=1, b=0), w(a=0, b=1))
        assert prof.breakpoints == (0, Fraction(1, 2), 1)
        assert prof.value(Fraction(1, 2)) == Fraction(-11, 2)
        # non-concave kink: the midpoint lies below the chord
        chord = (prof.value(0) + prof.value(1)) / 2
        assert prof.value(Fraction(1, 2)) < chord

    def test_matches_x_family_pointwise(self, adversarial_doc, torus_handle_doc):
        rng = random.Random(13)
        for doc, fam_name, w0, w1 in (
            (adversarial_doc, "ADV", w(a=1, b=0), w(a=0, b=1)),
            (adversarial_doc, "ADV", w(a=2, b=1), w(a=0, b=3)),
            (torus_handle_doc, "F", w(a=1), w(a=2)),
        ):
            fam = doc.family(fam_name)
            prof = profile(fam, w0, w1)
            for _ in range(32):
                t = Fraction(rng.randint(0, 64), 64)
                mix = w0.scaled(1 - t).plus(w1.scaled(t))
                res = x_family(fam, mix)
                assert res.status == "ok"
                assert prof.value(t) == res.value

    def test_infeasible_segment(self):
        bs = BranchedSurfacePresentation(
            name="B",
            sectors=(Sector("H", -1),),
            branch_equations=(),
            boundary_track=closed_two_track(),
            boundary_incidence={"H": {"a": 3}},
            aspherical=True,
            oriented=True,
        )
        prof = profile(Family((bs,)), w(a=1, b=1), w(a=2, b=2))
        assert prof.pieces == ()
        assert prof.value(Fraction(1, 2)) is None

    def test_partial_feasibility_interval(self):
        # feasible only where the boundary weights agree: b = 3a forces t=0
        bs = BranchedSurfacePresentation(
            name="B",
            sectors=(Sector("H", -1),),
            branch_equations=(),
            boundary_track=closed_two_track(),
            boundary_incidence={"H": {"a": 1, "b": 3}},
            aspherical=True,
            oriented=True,
        )
        prof = profile(Family((bs,)), w(a=1, b=3), w(a=1, b=0))
        assert prof.feasible_intervals == ((0, 0),)
        assert prof.value(0) == -1
        assert prof.value(Fraction(1, 2)) is None


class TestAuditStructure:
    def test_torus_handle_clean(self, torus_handle_doc):
        report = audit_structure(torus_handle_doc.family("F"), 100, seed=1)
        assert report.ok
        assert report.checked >= 300

    def test_adversarial_found_deterministically(self, adversarial_doc):
        # the vertex-pair probes alone must find the concavity violation,
        # whatever the seed
        fam = adversarial_doc.family("ADV")
        for seed in (0, 1, 2):
            report = audit_structure(fam, 0, seed=seed)
            kinds = {f.kind for f in report.findings}
            assert "concavity" in kinds and "superadditivity" in kinds
        report = audit_structure(fam, 50, seed=0)
        mid = [
            f
            for f in report.findings
            if f.kind == "concavity" and f.data["t"] == "1/2" and f.data["X(mix)"] == "-11/2"
        ]
        assert mid and mid[0].data["bound"] == "-1"

    def test_adversarial_clean_after_closure(self, adversarial_doc):
        closed = close_under_sums(adversarial_doc.family("ADV"))
        assert audit_structure(closed, 100, seed=2).ok

    def test_homogeneity_never_violated(self, adversarial_doc, torus_handle_doc):
        for fam in (adversarial_doc.family("ADV"), torus_handle_doc.family("F")):
            report = audit_structure(fam, 60, seed=5)
            assert all(f.kind != "homogeneity" for f in report.findings)


class TestPerMemberFacts:
    def test_per_member_superadditivity(self):
        rng = random.Random(101)
        for _ in range(25):
            bs = random_presentation(rng, max_sectors=5, max_segments=3)
            w0 = random_boundary_weights(rng, bs)
            w1 = random_boundary_weights(rng, bs)
            r0, r1 = x_single(bs, w0), x_single(bs, w1)
            if r0 in (INFEASIBLE, UNBOUNDED) or r1 in (INFEASIBLE, UNBOUNDED):
                continue
            rs = x_single(bs, w0.plus(w1))
            assert rs is not INFEASIBLE
            if rs is not UNBOUNDED:
                assert rs >= r0 + r1

    def test_positive_homogeneity(self):
        rng = random.Random(103)
        for _ in range(25):
            bs = random_presentation(rng, max_sectors=5, max_segments=3)
            wv = random_boundary_weights(rng, bs)
            lam = Fraction(rng.randint(1, 9), rng.randint(1, 9))
            r = x_single(bs, wv)
            rl = x_single(bs, wv.scaled(lam))
            if r is INFEASIBLE or r is UNBOUNDED:
                assert rl is r
            else:
                assert rl == lam * r


class TestAdditivity:
    def _beta_family(self, nonbound_doc):
        from dataclasses import replace

        track = TrainTrack(name="beta", segments=(Segment("b"),), closed=frozenset({"b"}))
        bh = nonbound_doc.presentation("BH")
        bh_beta = replace(
            bh, name="BHb", boundary_track=track, boundary_incidence={"H": {"b": 3}}
        )
        return Family((bh_beta,))

    def test_disjoint_union_value(self, torus_handle_doc, nonbound_doc):
        fam_a = Family((torus_handle_doc.presentation("BG"),))
        fam_b = self._beta_family(nonbound_doc)
        report = additivity_check([fam_a, fam_b], [w(a=1), w(b=1)])
        assert report.ok
        assert report.union.value == Fraction(-10, 3)
        assert [r.value for r in report.components] == [-3, Fraction(-1, 3)]

    def test_one_component_infeasible(self, torus_handle_doc):
        fam_a = Family((torus_handle_doc.presentation("BG"),))
        empty_track = TrainTrack(
            name="beta", segments=(Segment("b"), Segment("c")), closed=frozenset({"b", "c"})
        )
        bs = BranchedSurfacePresentation(
            name="Bb",
            sectors=(Sector("H", -1),),
            branch_equations=(),
            boundary_track=empty_track,
            boundary_incidence={"H": {"b": 3}},
            aspherical=True,
            oriented=True,
        )
        report = additivity_check([fam_a, Family((bs,))], [w(a=1), w(b=1, c=1)])
        assert report.ok
        assert report.union.status == "infeasible"

    def test_all_zero(self, torus_handle_doc, nonbound_doc):
        fam_a = Family((torus_handle_doc.presentation("BG"),))
        fam_b = self._beta_family(nonbound_doc)
        report = additivity_check([fam_a, fam_b], [w(a=0), w(b=0)])
        assert report.ok
        assert report.union.value == 0

    def test_clashing_tracks_rejected(self, torus_handle_doc):
        fam = torus_handle_doc.family("F")
        with pytest.raises(ValueError, match="two tracks"):
            additivity_check([fam, fam], [w(a=1), w(a=1)])
