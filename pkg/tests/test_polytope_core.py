import pytest
from hypothesis import assume, given, settings, strategies as st

from app.errors import InvalidInput, PreconditionViolated
from app.services.polytope_core import (
    INTERIOR,
    PolytopeFamily,
    complete_flags,
    edge_directions,
    face_of,
    face_points,
    facet_summand_interior,
    flag_sign,
    hull,
    is_essential,
    lattice_points,
    minimal_face,
    minkowski,
    minkowski_sum,
)
from tests.conftest import NON_ESSENTIAL_PROBLEM, family_of


def test_hull_drops_interior_points(square):
    assert square.vertices == ((0, 0), (2, 0), (0, 2), (2, 2))
    assert len(square.facets) == 4
    assert square.dim == 2


def test_lattice_points_in_monomial_order(square):
    assert square.lattice_points == (
        (0, 0), (1, 0), (2, 0),
        (0, 1), (1, 1), (2, 1),
        (0, 2), (1, 2), (2, 2),
    )


def test_triangle_facets(unit_triangle):
    facets = {(f.normal, f.offset) for f in unit_triangle.facets}
    assert facets == {((1, 0), 0), ((0, 1), 0), ((-1, -1), 1)}


def test_segment_in_the_plane_keeps_its_span():
    P = hull([(0, 0), (2, 2), (1, 1)], 2)
    assert P.dim == 1
    assert P.vertices == ((0, 0), (2, 2))
    assert len(P.equations) == 1
    assert not P.contains((1, 0))
    assert P.lattice_points == ((0, 0), (1, 1), (2, 2))


def test_hull_rejects_bad_points():
    with pytest.raises(InvalidInput):
        hull([], 2)
    with pytest.raises(InvalidInput):
        hull([(0, 0), (1,)], 2)


def test_minkowski_of_triangles_is_dilated(unit_triangle):
    P = minkowski(unit_triangle, unit_triangle)
    assert P.vertices == ((0, 0), (2, 0), (0, 2))


def test_minkowski_of_segments_is_a_box():
    P = minkowski(hull([(0, 0), (1, 0)], 2), hull([(0, 0), (0, 1)], 2))
    assert P.vertices == ((0, 0), (1, 0), (0, 1), (1, 1))
    assert len(P.facets) == 4


def test_minkowski_in_three_dimensions():
    simplex = hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], 3)
    P = minkowski_sum([simplex] * 3)
    assert P.vertices == ((0, 0, 0), (3, 0, 0), (0, 3, 0), (0, 0, 3))
    assert len(P.facets) == 4
    assert len(P.lattice_points) == 20


def test_edge_directions(unit_triangle):
    assert edge_directions(unit_triangle) == [(0, 1), (1, -1), (1, 0)]


def test_face_of(unit_triangle):
    bottom = face_of(unit_triangle, (0, 1))
    assert bottom.vertices == ((0, 0), (1, 0))
    assert bottom.dim == 1
    assert face_of(unit_triangle, (1, 1)).vertices == ((0, 0),)
    with pytest.raises(InvalidInput):
        face_of(unit_triangle, (0, 0))


def test_minimal_face(square):
    assert minimal_face(square, (1, 0)).vertices == ((0, 0), (2, 0))
    assert minimal_face(square, (1, 1)) is INTERIOR
    assert minimal_face(square, (2, 2)).dim == 0
    with pytest.raises(InvalidInput):
        minimal_face(square, (3, 0))


def test_minimal_face_of_lower_dimensional_polytope():
    P = hull([(0, 0), (2, 0)], 2)
    assert minimal_face(P, (1, 0)) == P.whole


@pytest.mark.parametrize(
    "points, count",
    [
        ([(0, 0), (1, 0), (0, 1)], 6),
        ([(0, 0), (2, 0), (0, 2), (2, 2)], 8),
        ([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], 24),
    ],
)
def test_complete_flag_counts(points, count):
    assert len(complete_flags(hull(points, len(points[0])))) == count


def test_flag_signs_balance(square, unit_triangle):
    for P in (square, unit_triangle):
        signs = [flag_sign(flag) for flag in complete_flags(P)]
        assert set(signs) == {1, -1}
        assert sum(signs) == 0


def test_triangle_flag_sign(unit_triangle):
    (flag,) = [
        f for f in complete_flags(unit_triangle)
        if f.faces[0].vertices == ((1, 0),) and f.faces[1].vertices == ((1, 0), (0, 1))
    ]
    assert flag_sign(flag) == 1


def test_segment_flags():
    P = hull([(0,), (1,)], 1)
    signs = {f.faces[0].vertices[0]: flag_sign(f) for f in complete_flags(P)}
    assert signs == {(0,): 1, (1,): -1}


def test_complete_flags_need_full_dimension():
    with pytest.raises(PreconditionViolated):
        complete_flags(hull([(0, 0), (1, 0)], 2))


def test_essentiality_witness():
    report = is_essential(family_of(NON_ESSENTIAL_PROBLEM))
    assert not report.essential
    assert report.witness == (0, 1)
    assert report.dims[(0, 1)] == 1


def test_essentiality_witness_for_a_point(unit_triangle):
    family = PolytopeFamily([hull([(1, 1)], 2), unit_triangle, unit_triangle])
    report = is_essential(family)
    assert report.witness == (0,)


def test_worked_examples_are_essential(mixed_family, partial_family, exceptional_family):
    for family in (mixed_family, partial_family, exceptional_family):
        assert is_essential(family).essential


def test_family_names(triangles, mixed_family):
    assert triangles.coefficient_name(1, (1, 0)) == "b1"
    assert triangles.coefficient_name(2, (0, 1)) == "c2"
    assert mixed_family.coefficient_name(1, (1, 1)) == "b3"
    assert mixed_family.points(0) == ((1, 0), (1, 1), (0, 2))


def test_family_shape_errors(unit_triangle):
    with pytest.raises(InvalidInput):
        PolytopeFamily([unit_triangle])
    with pytest.raises(InvalidInput):
        PolytopeFamily([unit_triangle, unit_triangle])


def test_terms_leave_gaps_without_coefficients():
    family = family_of({
        "ambient_dim": 1,
        "polytopes": [
            {"terms": [{"exp": [0], "coeff": "p"}, {"exp": [2], "coeff": "q"}]},
            {"points": [[0], [1]]},
        ],
    })
    assert family.points(0) == ((0,), (1,), (2,))
    assert not family.has_coefficient(0, (1,))
    assert family.has_coefficient(1, (1,))


def test_facet_summand_interior(unit_triangle):
    P = hull([(0, 0), (2, 0), (0, 2)], 2)
    bottom = face_of(P, (0, 1))
    assert facet_summand_interior(P, unit_triangle, bottom, (1, 0), (0, 1))
    with pytest.raises(PreconditionViolated):
        facet_summand_interior(P, unit_triangle, bottom, (1, 0), (0, 0))
    with pytest.raises(PreconditionViolated):
        facet_summand_interior(P, unit_triangle, bottom, (0, 0), (0, 1))


def test_unit_segment_facet_order():
    P = hull([(0,), (1,)], 1)
    assert [f.normal for f in P.facets] == [(1,), (-1,)]
    assert [f.value((0,)) for f in P.facets] == [0, 1]


@st.composite
def polytopes(draw, n=None, full=False):
    n = n or draw(st.sampled_from([2, 2, 3]))
    top = 3 if n == 2 else 2
    coordinate = st.tuples(*[st.integers(min_value=0, max_value=top)] * n)
    points = draw(st.lists(coordinate, min_size=1, max_size=5 if n == 2 else 4, unique=True))
    P = hull(points, n)
    if full:
        assume(P.dim == n)
    return P


@st.composite
def pairs(draw, full=False):
    n = draw(st.sampled_from([2, 2, 3]))
    return draw(polytopes(n, full)), draw(polytopes(n))


@settings(max_examples=50, deadline=None)
@given(pairs(), st.data())
def test_minkowski_commutes_and_associates(pair, data):
    P, Q = pair
    R = data.draw(polytopes(P.ambient_dim))
    assert minkowski(P, Q) == minkowski(Q, P)
    assert minkowski(minkowski(P, Q), R) == minkowski(P, minkowski(Q, R))


@settings(max_examples=50, deadline=None)
@given(polytopes())
def test_hull_of_lattice_points_is_the_polytope(P):
    assert hull(lattice_points(P), P.ambient_dim) == P


@settings(max_examples=50, deadline=None)
@given(pairs(), st.lists(st.integers(min_value=-2, max_value=2), min_size=3, max_size=3))
def test_faces_of_a_sum_are_sums_of_faces(pair, direction):
    P, Q = pair
    n = P.ambient_dim
    v = tuple(direction[:n])
    assume(any(v))
    total = face_of(minkowski(P, Q), v)
    summands = minkowski(hull(face_of(P, v).vertices, n), hull(face_of(Q, v).vertices, n))
    assert hull(total.vertices, n) == summands


@settings(max_examples=50, deadline=None)
@given(polytopes(full=True))
def test_minimal_face_is_the_meet_of_faces_through_the_point(P):
    n = P.ambient_dim
    for u in lattice_points(P):
        through = [f for f in P.faces if hull(f.vertices, n).contains(u)]
        face = minimal_face(P, u)
        if not through:
            assert face is INTERIOR
            continue
        meet = set.intersection(*(set(f.vertex_set) for f in through))
        assert set(face.vertex_set) == meet


@settings(max_examples=50, deadline=None)
@given(st.lists(polytopes(2), min_size=3, max_size=3), st.data())
def test_growing_a_member_keeps_a_family_essential(members, data):
    family = PolytopeFamily(members)
    assume(is_essential(family).essential)
    i = data.draw(st.integers(min_value=0, max_value=2))
    extra = data.draw(st.tuples(st.integers(min_value=0, max_value=3), st.integers(min_value=0, max_value=3)))
    grown = list(members)
    grown[i] = hull(list(members[i].vertices) + [extra], 2)
    assert is_essential(PolytopeFamily(grown)).essential


@settings(max_examples=40, deadline=None)
@given(pairs(full=True))
def test_facet_points_plus_off_face_points_are_interior(pair):
    P, Q = pair
    for facet in P.facets:
        face = P.facet_face(facet)
        matched = set(face_points(Q, face.witness))
        inside = [u for u in lattice_points(P) if minimal_face(P, u) == face]
        for u in inside:
            for u2 in lattice_points(Q):
                if u2 not in matched:
                    assert facet_summand_interior(P, Q, face, u, u2)
