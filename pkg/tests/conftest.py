"""
Shared fixtures: the planar worked examples, unit triangles, unit segments,
and helpers to turn Laurent polynomials into sympy expressions.
"""
import pytest
import sympy

from app.services import problem_service
from app.services.polytope_core import PolytopeFamily, hull
from app.services.residue_engine import LaurentPoly, ResidueMatrix, variable_names


def _terms(*pairs):
    return {"terms": [{"exp": list(exp), "coeff": name} for exp, name in pairs]}


# f0 = a0 x + a1 x y + a2 y^2, f1 = b0 + b1 x + b2 x^2 + b3 x y, f2 = c0 + c1 y + c2 x y^2
MIXED_PROBLEM = {
    "ambient_dim": 2,
    "polytopes": [
        _terms(((1, 0), "a0"), ((1, 1), "a1"), ((0, 2), "a2")),
        _terms(((0, 0), "b0"), ((1, 0), "b1"), ((2, 0), "b2"), ((1, 1), "b3")),
        _terms(((0, 0), "c0"), ((0, 1), "c1"), ((1, 2), "c2")),
    ],
}

# f0 = a0 + a1 x, f1 = b0 + b1 x + b2 y, f2 = c0 + c1 x y
PARTIAL_PROBLEM = {
    "ambient_dim": 2,
    "polytopes": [
        _terms(((0, 0), "a0"), ((1, 0), "a1")),
        _terms(((0, 0), "b0"), ((1, 0), "b1"), ((0, 1), "b2")),
        _terms(((0, 0), "c0"), ((1, 1), "c1")),
    ],
}

# two segments and the unit square: the exceptional configuration
EXCEPTIONAL_PROBLEM = {
    "ambient_dim": 2,
    "polytopes": [
        _terms(((0, 0), "a0"), ((1, 0), "a1")),
        _terms(((0, 0), "b0"), ((1, 0), "b1"), ((0, 1), "b2"), ((1, 1), "b3")),
        _terms(((0, 0), "c0"), ((0, 1), "c1")),
    ],
}

TRIANGLES_PROBLEM = {
    "ambient_dim": 2,
    "polytopes": [{"points": [[0, 0], [1, 0], [0, 1]]} for _ in range(3)],
}

SEGMENTS_PROBLEM = {
    "ambient_dim": 1,
    "polytopes": [{"points": [[0], [1]]} for _ in range(2)],
}

NON_ESSENTIAL_PROBLEM = {
    "ambient_dim": 2,
    "polytopes": [
        {"points": [[0, 0], [1, 0]]},
        {"points": [[0, 0], [2, 0]]},
        {"points": [[0, 0], [1, 0], [0, 1]]},
    ],
}

# cells of the printed partitions, column by column
MIXED_CELLS = [
    [[], [[1, 0]], [[1, 1], [0, 2]]],
    [[[0, 0]], [[1, 0], [2, 0]], [[1, 1]]],
    [[[0, 0]], [], [[0, 1], [1, 2]]],
]

PARTIAL_CELLS = [
    [[[0, 0]], [[1, 0]], []],
    [[[0, 0]], [[1, 0]], [[0, 1]]],
    [[[0, 0]], [], [[1, 1]]],
]


def family_of(problem: dict) -> PolytopeFamily:
    return problem_service.family_from_problem(problem_service.load_problem(problem))


@pytest.fixture
def mixed_family():
    return family_of(MIXED_PROBLEM)


@pytest.fixture
def partial_family():
    return family_of(PARTIAL_PROBLEM)


@pytest.fixture
def exceptional_family():
    return family_of(EXCEPTIONAL_PROBLEM)


@pytest.fixture
def triangles():
    return family_of(TRIANGLES_PROBLEM)


@pytest.fixture
def segments():
    return family_of(SEGMENTS_PROBLEM)


@pytest.fixture
def square():
    return hull([(0, 0), (2, 0), (0, 2), (2, 2)], 2)


@pytest.fixture
def unit_triangle():
    return hull([(0, 0), (1, 0), (0, 1)], 2)


def sympy_expr(poly: LaurentPoly):
    """Laurent polynomial as a sympy expression in the symbol names and x, y, ... ."""
    variables = [sympy.Symbol(v) for v in variable_names(poly.n)]
    expr = sympy.Integer(0)
    for exp, monomial, scalar in poly.canonical_terms():
        term = sympy.Integer(scalar)
        for s in monomial:
            term *= sympy.Symbol(s.name)
        for v, e in zip(variables, exp):
            term *= v ** e
        expr += term
    return expr


def sympy_det(R: ResidueMatrix, method: str = "bareiss"):
    return sympy.expand(sympy.Matrix([[sympy_expr(e) for e in row] for row in R.entries]).det(method=method))
