import random
from fractions import Fraction

import pytest

from lamcone import (
    BranchedSurfacePresentation,
    IndexMismatchError,
    Sector,
    Segment,
    TrainTrack,
    WeightVector,
    boundary_map,
    chi_functional,
    chi_geometric,
    closed_chi_audit,
    direct_sum,
    find_integer_multiple,
)

from genutil import random_boundary_weights, random_presentation


class TestChiGeometric:
    def test_rectangle(self):
        assert chi_geometric((1, 4)) == 0

    def test_disk_three_corners(self):
        assert chi_geometric((1, 3)) == Fraction(1, 4)

    def test_genus_two_one_hole(self):
        assert chi_geometric(Sector("G", -3, 0)) == -3

    def test_negative_corners(self):
        with pytest.raises(ValueError):
            chi_geometric((1, -1))


class TestChiFunctional:
    def test_bh_third(self, nonbound_doc):
        bs = nonbound_doc.presentation("BH")
        assert chi_functional(bs, WeightVector({"H": Fraction(1, 3)})) == Fraction(-1, 3)

    def test_bg(self, torus_handle_doc):
        bs = torus_handle_doc.presentation("BG")
        assert chi_functional(bs, WeightVector({"G": 1})) == -3

    def test_zero(self, fig1_doc):
        bs = fig1_doc.presentation("fig1")
        assert chi_functional(bs, WeightVector({"x": 0, "y": 0, "z": 0})) == 0

    def test_index_mismatch(self, fig1_doc):
        with pytest.raises(IndexMismatchError):
            chi_functional(fig1_doc.presentation("fig1"), WeightVector({"x": 1}))

    def test_linearity(self):
        rng = random.Random(17)
        for _ in range(25):
            bs = random_presentation(rng)
            v1 = WeightVector(
                {s: Fraction(rng.randint(0, 5), rng.randint(1, 4)) for s in bs.sector_names}
            )
            v2 = WeightVector(
                {s: Fraction(rng.randint(0, 5), rng.randint(1, 4)) for s in bs.sector_names}
            )
            lam = Fraction(rng.randint(0, 7), rng.randint(1, 5))
            assert chi_functional(bs, v1.plus(v2)) == chi_functional(bs, v1) + chi_functional(bs, v2)
            assert chi_functional(bs, v1.scaled(lam)) == lam * chi_functional(bs, v1)


class TestFindIntegerMultiple:
    def test_bh_needs_three_copies(self, nonbound_doc):
        bs = nonbound_doc.presentation("BH")
        result = find_integer_multiple(bs, WeightVector({"a": 1}))
        assert result is not None
        k, v = result
        assert k == 3
        assert v == WeightVector({"H": 1})
        assert boundary_map(bs).apply(v) == WeightVector({"a": 3})

    def test_bg_already_integral(self, torus_handle_doc):
        bs = torus_handle_doc.presentation("BG")
        assert find_integer_multiple(bs, WeightVector({"a": 1})) == (1, WeightVector({"G": 1}))

    def test_empty_fiber(self):
        track = TrainTrack(
            name="two", segments=(Segment("a"), Segment("b")), closed=frozenset({"a", "b"})
        )
        bs = BranchedSurfacePresentation(
            name="B",
            sectors=(Sector("H", -1),),
            branch_equations=(),
            boundary_track=track,
            boundary_incidence={"H": {"a": 3}},
            aspherical=True,
            oriented=True,
        )
        assert find_integer_multiple(bs, WeightVector({"a": 1, "b": 1})) is None

    def test_integrality_and_boundary_on_random_inputs(self):
        rng = random.Random(31)
        found = 0
        for _ in range(40):
            bs = random_presentation(rng, max_sectors=5, max_segments=3)
            w = random_boundary_weights(rng, bs)
            result = find_integer_multiple(bs, w)
            if result is None:
                continue
            found += 1
            k, v = result
            assert k >= 1 and v.is_integral()
            assert boundary_map(bs).apply(v) == w.scaled(k)
        assert found > 5


class TestClosedChiAudit:
    def test_sphere_fixture_fails(self, sphere_doc):
        report = closed_chi_audit(sphere_doc.presentation("sphere"))
        assert not report.ok
        finding = report.findings[0]
        assert finding.kind == "asphericity-contradiction"
        assert finding.data["vertex"] == {"S": Fraction(1)}
        assert finding.data["chi"] == 2

    def test_torus_sector_clean(self):
        track = TrainTrack(name="empty", segments=())
        bs = BranchedSurfacePresentation(
            name="torus",
            sectors=(Sector("T", 0),),
            branch_equations=(),
            boundary_track=track,
            boundary_incidence={},
            aspherical=True,
            oriented=True,
        )
        assert closed_chi_audit(bs).ok

    def test_direct_sum_with_no_closed_directions(self, torus_handle_doc):
        bs = direct_sum(
            torus_handle_doc.presentation("BG"), torus_handle_doc.presentation("BH")
        )
        report = closed_chi_audit(bs)
        assert report.ok
        assert report.checked == 0  # the closed cell is empty

    def test_all_bundled_aspherical_fixtures_clean(
        self, fig1_doc, torus_handle_doc, nonbound_doc, adversarial_doc
    ):
        for doc in (fig1_doc, torus_handle_doc, nonbound_doc, adversarial_doc):
            for bs in doc.presentations:
                assert closed_chi_audit(bs).ok

    def test_requires_aspherical_flag(self, sphere_doc):
        from dataclasses import replace

        bs = replace(sphere_doc.presentation("sphere"), aspherical=False)
        with pytest.raises(ValueError, match="aspherical"):
            closed_chi_audit(bs)
