from functools import lru_cache

import pytest
from hypothesis import assume, given, settings, strategies as st

from app.errors import ExceptionalFamily, InvalidInput, NoPartitionFound, ResourceLimit
from app.services.coloring_engine import Flavor, face_coloring
from app.services.construction_engine import (
    Dim2Case,
    SearchMode,
    boundary_edges,
    build_partition,
    certifies,
    classify,
    dim2_partition,
    exhaustive_search,
    find_shared_flag,
    first_window,
    is_exceptional,
    locally_unmixed_partition,
)
from app.services.degree_engine import cdeg, unique_colored_flag_check
from app.services.partition_engine import validate
from app.services.polytope_core import PolytopeFamily, hull, is_essential
from tests.conftest import MIXED_CELLS, PARTIAL_CELLS


def test_shared_flag_of_triangles(triangles):
    sf = find_shared_flag(triangles)
    assert sf is not None
    for vertex, edge in sf.member_faces:
        assert vertex.vertices == ((0, 0),)
        assert edge.vertices == ((0, 0), (1, 0))
    assert sf.total_flag.faces[1].vertices == ((0, 0), (3, 0))


def test_worked_examples_share_no_flag(mixed_family, partial_family):
    assert find_shared_flag(mixed_family) is None
    assert find_shared_flag(partial_family) is None


def test_shared_flag_in_three_dimensions():
    simplex = hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], 3)
    cube = hull([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)], 3)
    sf = find_shared_flag(PolytopeFamily([simplex, cube, simplex, simplex]))
    assert sf is not None
    assert [face.dim for face in sf.total_flag.faces] == [0, 1, 2]


def test_locally_unmixed_squares():
    square = hull([(0, 0), (2, 0), (0, 2), (2, 2)], 2)
    family = PolytopeFamily([square] * 3)
    M = locally_unmixed_partition(family, find_shared_flag(family))
    for row in M.as_lists():
        assert row[0] == [[0, 0]]
        assert row[1] == [[1, 0], [2, 0]]
        assert len(row[2]) == 6
    assert certifies(M)


def test_locally_unmixed_segments(segments):
    M = locally_unmixed_partition(segments, find_shared_flag(segments))
    assert M.as_lists() == [[[[0]], [[1]]], [[[0]], [[1]]]]
    assert abs(cdeg(M)) == 1


@st.composite
def corner_families(draw):
    """Families sharing the coordinate corner flag at the origin, with extra points off the axes."""
    n = draw(st.sampled_from([2, 2, 2, 3]))
    top = 3 if n == 2 else 2
    members = []
    for _ in range(n + 1):
        lengths = [draw(st.integers(min_value=1, max_value=top)) for _ in range(n)]
        points = [(0,) * n] + [
            tuple(length if k == axis else 0 for k in range(n)) for axis, length in enumerate(lengths)
        ]
        extras = draw(st.lists(
            st.tuples(*[st.integers(min_value=1, max_value=top)] * n),
            max_size=2 if n == 2 else 1,
        ))
        members.append(hull(points + extras, n))
    return PolytopeFamily(members)


@lru_cache(maxsize=None)
def unit_simplex_degree(n: int) -> int:
    simplex = hull([(0,) * n] + [tuple(int(k == axis) for k in range(n)) for axis in range(n)], n)
    family = PolytopeFamily([simplex] * (n + 1))
    return cdeg(locally_unmixed_partition(family, find_shared_flag(family)))


@settings(max_examples=25, deadline=None)
@given(corner_families())
def test_shared_flag_partitions_certify(family):
    sf = find_shared_flag(family)
    assert sf is not None
    M = locally_unmixed_partition(family, sf)
    assert validate(M)
    assert unit_simplex_degree(2) == 1
    assert cdeg(M) == unit_simplex_degree(family.n)
    assert abs(cdeg(M)) == 1
    fc = face_coloring(M, Flavor.MAX)
    assert unique_colored_flag_check(fc, tuple(range(family.n + 1))) == 1


def test_mixed_family_walk(mixed_family):
    edges = boundary_edges(mixed_family)
    assert edges[0].start == (0, 2)
    window = first_window(edges)
    assert len(window) == 3
    assert classify(edges, window) == Dim2Case.GENERICALLY_MIXED


def test_mixed_family_partition(mixed_family):
    M, report = dim2_partition(mixed_family)
    assert report.case == Dim2Case.GENERICALLY_MIXED
    assert M.as_lists() == MIXED_CELLS


def test_partial_family_walk(partial_family):
    edges = boundary_edges(partial_family)
    assert edges[0].start == (0, 0)
    assert [set(e.label) for e in edges] == [{0, 1}, {2}, {1}, {0}, {2}, {1}]
    window = first_window(edges)
    assert window == (0, 1)
    assert classify(edges, window) == Dim2Case.PARTIALLY_UNMIXED_2A


def test_partial_family_partition(partial_family):
    M, report = dim2_partition(partial_family)
    assert report.case == Dim2Case.PARTIALLY_UNMIXED_2A
    assert report.attempt == "original"
    assert M.as_lists() == PARTIAL_CELLS
    assert "PartiallyUnmixed2a" in report.describe()


def test_triangles_dispatch_to_the_shared_flag(triangles):
    M, report = dim2_partition(triangles)
    assert report.case == Dim2Case.LOCALLY_UNMIXED
    assert certifies(M)


def test_exceptional_family(exceptional_family):
    assert is_exceptional(exceptional_family)
    with pytest.raises(ExceptionalFamily):
        dim2_partition(exceptional_family)
    with pytest.raises(ExceptionalFamily):
        build_partition(exceptional_family)


def test_exceptional_family_only_has_vanishing_determinants(exceptional_family):
    found = exhaustive_search(exceptional_family, mode=SearchMode.ALL)
    assert found
    assert all(h.is_zero() for _, h in found)


def test_other_families_are_not_exceptional(mixed_family, partial_family, triangles):
    for family in (mixed_family, partial_family, triangles):
        assert not is_exceptional(family)


def test_search_on_segments(segments):
    M = exhaustive_search(segments)
    assert M.as_lists() == [[[[0]], [[1]]], [[[0]], [[1]]]]


def test_search_on_triangles(triangles):
    M = exhaustive_search(triangles, mode=SearchMode.FIRST)
    assert M is not None
    assert certifies(M)


def test_search_bound(mixed_family):
    with pytest.raises(ResourceLimit):
        exhaustive_search(mixed_family, bound=3)


def test_build_partition_strategies(mixed_family, partial_family, segments):
    assert build_partition(partial_family).strategy == "dim2"
    assert build_partition(segments).strategy == "locally-unmixed"
    assert build_partition(segments, "search").strategy == "search"
    with pytest.raises(NoPartitionFound):
        build_partition(mixed_family, "locally-unmixed")
    with pytest.raises(InvalidInput):
        build_partition(mixed_family, "greedy")


def test_shared_middle_member_with_outer_segment():
    family = PolytopeFamily([
        hull([(1, 0), (0, 1)], 2),
        hull([(0, 2), (2, 2)], 2),
        hull([(1, 0), (2, 0), (0, 1)], 2),
    ])
    edges = boundary_edges(family)
    assert [set(e.label) for e in edges] == [{0, 2}, {1, 2}, {0}, {2}, {1}]
    M, report = dim2_partition(family)
    assert report.case == Dim2Case.PARTIALLY_UNMIXED_2B
    assert report.attempt == "outer-forward"
    assert M.as_lists() == [
        [[[0, 1]], [[1, 0]], []],
        [[], [[0, 2], [1, 2]], [[2, 2]]],
        [[[0, 1]], [[1, 0]], [[2, 0]]],
    ]
    assert certifies(M)


@st.composite
def planar_triples(draw):
    coordinate = st.tuples(st.integers(min_value=0, max_value=2), st.integers(min_value=0, max_value=2))
    members = []
    for _ in range(3):
        points = draw(st.lists(coordinate, min_size=2, max_size=4, unique=True))
        members.append(hull(points, 2))
    return PolytopeFamily(members)


@settings(max_examples=30, deadline=None)
@given(planar_triples())
def test_planar_rules_certify_without_search(family):
    assume(all(P.dim >= 1 for P in family.members))
    assume(is_essential(family).essential)
    assume(not is_exceptional(family))
    M, report = dim2_partition(family)
    assert certifies(M)
    assert report.attempt != "search"


@pytest.mark.parametrize("transform", [
    lambda p: (p[1], p[0]),
    lambda p: (p[0] + p[1], p[1]),
    lambda p: (-p[0], p[1]),
])
def test_unimodular_images_still_certify(transform, mixed_family, partial_family):
    for family in (mixed_family, partial_family):
        moved = PolytopeFamily([hull([transform(v) for v in P.vertices], 2) for P in family.members])
        labels = sorted(sorted(e.label) for e in boundary_edges(family))
        assert sorted(sorted(e.label) for e in boundary_edges(moved)) == labels
        assert not is_exceptional(moved)
        assert abs(cdeg(dim2_partition(moved)[0])) == 1
