from itertools import permutations

import pytest

from app.errors import PreconditionViolated
from app.services.coloring_engine import FaceColoring, Flavor, face_coloring, refines
from app.services.construction_engine import (
    SearchMode,
    exhaustive_search,
    find_shared_flag,
    locally_unmixed_partition,
)
from app.services.degree_engine import (
    AnchorScheme,
    anchor,
    bsd_complex,
    cdeg,
    degree_report,
    permutation_sign,
    pl_degree,
    signed_flag_count,
    unique_colored_flag_check,
)
from app.services.partition_engine import PartitionMatrix
from tests.conftest import MIXED_CELLS, NON_ESSENTIAL_PROBLEM, PARTIAL_CELLS, family_of


@pytest.fixture
def triangle_partition(triangles):
    return locally_unmixed_partition(triangles, find_shared_flag(triangles))


def test_unit_triangles_have_degree_one(triangle_partition):
    assert cdeg(triangle_partition) == 1


def test_degree_ignores_anchors_and_seeds(triangle_partition, mixed_family):
    for M in (triangle_partition, PartitionMatrix(mixed_family, MIXED_CELLS)):
        fc = face_coloring(M, Flavor.MAX)
        expected = pl_degree(fc)
        for seed in (0, 1, 7, 12345):
            assert pl_degree(fc, seed=seed) == expected
            assert pl_degree(fc, anchors=AnchorScheme.SKEWED, seed=seed) == expected


def test_degree_report_agrees_across_flavors(mixed_family):
    report = degree_report(PartitionMatrix(mixed_family, MIXED_CELLS), seed=3, jobs=2)
    assert abs(report.degree) == 1
    assert report.degree == report.min_degree == report.second_point_degree
    assert refines(report.min_coloring, report.max_coloring)


def test_worked_example_degree(partial_family):
    assert abs(cdeg(PartitionMatrix(partial_family, PARTIAL_CELLS))) == 1


@pytest.mark.parametrize("eps", list(permutations(range(3))))
def test_signed_flag_count_matches_degree(triangle_partition, eps):
    fc = face_coloring(triangle_partition, Flavor.MAX)
    assert signed_flag_count(fc.polytope, fc, eps) == 1


def test_unique_colored_flag(triangle_partition):
    fc = face_coloring(triangle_partition, Flavor.MAX)
    assert unique_colored_flag_check(fc, (0, 1, 2)) == 1


def test_non_simplicial_coloring(unit_triangle):
    fc = FaceColoring(unit_triangle, 2, {
        f: frozenset({0, 1}) if f.dim == 0 else frozenset({2}) for f in unit_triangle.faces
    })
    with pytest.raises(PreconditionViolated):
        pl_degree(fc)
    with pytest.raises(PreconditionViolated):
        signed_flag_count(unit_triangle, fc, (0, 1, 2))


def test_non_monotone_coloring(unit_triangle):
    fc = FaceColoring(unit_triangle, 2, {
        f: frozenset({0}) if f.dim == 0 else frozenset({1}) for f in unit_triangle.faces
    })
    with pytest.raises(PreconditionViolated):
        signed_flag_count(unit_triangle, fc, (0, 1, 2))


def test_coloring_of_another_polytope(triangle_partition, unit_triangle):
    fc = face_coloring(triangle_partition, Flavor.MAX)
    with pytest.raises(PreconditionViolated):
        pl_degree(fc, P=unit_triangle)


def test_constant_coloring_has_degree_zero(unit_triangle):
    fc = FaceColoring(unit_triangle, 2, {f: frozenset({1, 2}) for f in unit_triangle.faces})
    assert pl_degree(fc) == 0


def test_permutation_sign():
    assert permutation_sign((0, 1, 2)) == 1
    assert permutation_sign((1, 0, 2)) == -1
    assert permutation_sign((1, 2, 0)) == 1
    assert permutation_sign((3, 2, 1, 0)) == 1


def test_anchors_lie_on_their_faces():
    for scheme in AnchorScheme:
        y = anchor(frozenset({0, 2}), 3, scheme)
        assert sum(y) == 1
        assert y[0] == y[2] == 0
        assert y[1] > 0 and y[3] > 0


def test_barycentric_subdivision(unit_triangle):
    simplices = bsd_complex(unit_triangle)
    assert len(simplices) == 6
    assert {s.orientation for s in simplices} == {1, -1}
    assert sum(s.orientation for s in simplices) == 0


@pytest.mark.parametrize("eps", list(permutations(range(3))))
def test_signed_flag_count_on_worked_examples(mixed_family, partial_family, eps):
    for family, cells in ((mixed_family, MIXED_CELLS), (partial_family, PARTIAL_CELLS)):
        fc = face_coloring(PartitionMatrix(family, cells), Flavor.MAX)
        assert signed_flag_count(fc.polytope, fc, eps) == pl_degree(fc) == 1


def test_swapping_two_colors_negates_degree(mixed_family, partial_family, triangle_partition):
    for M in (
        PartitionMatrix(mixed_family, MIXED_CELLS),
        PartitionMatrix(partial_family, PARTIAL_CELLS),
        triangle_partition,
    ):
        fc = face_coloring(M, Flavor.MAX)
        assert pl_degree(fc.permuted({0: 1, 1: 0})) == -pl_degree(fc)


def test_non_essential_family_has_degree_zero():
    family = family_of(NON_ESSENTIAL_PROBLEM)
    found = exhaustive_search(family, mode=SearchMode.ALL)
    assert found
    for M, h in found:
        assert cdeg(M) == 0
        assert h.is_zero()
