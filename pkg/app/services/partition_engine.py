"""
Partition matrices over a polytope family.

A partition matrix splits the lattice points of each P_i into n+1 cells.
It is usable as a residue certificate when every row is induced from a
vertex partition and the interior-sum compatibility condition holds.
"""
import logging
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Callable, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from app.errors import InvalidInput
from app.services.coloring_engine import coloring_matrix, permanent
from app.services.polytope_core import (
    FaceRef,
    LatticePolytope,
    Point,
    PolytopeFamily,
    all_faces,
    carrier_vertices,
    interior_contains,
    minimal_face,
    sort_points,
)
from app.services.workers import ordered_map

logger = logging.getLogger(__name__)

Cell = FrozenSet[Point]
TieBreak = Callable[[Point, Sequence[Tuple[Point, int]]], int]


@dataclass(frozen=True)
class VertexPartition:
    """Class assignment for the vertices of polytope `index`."""

    index: int
    assignment: Mapping[Point, int] = field(hash=False)


def lex_tie_break(u: Point, candidates: Sequence[Tuple[Point, int]]) -> int:
    """Class of the smallest vertex of the minimal face."""
    return candidates[0][1]


def induce(
    P: LatticePolytope,
    vp: VertexPartition | Mapping[Point, int],
    tie_break: Optional[TieBreak] = None,
) -> List[Cell]:
    """
    Extend a vertex partition to all lattice points of P.

    Args:
        P: the polytope P_i
        vp: vertex classes
        tie_break: picks a class for a non-vertex point among the
            (vertex, class) pairs of its minimal face, sorted by point order

    Returns:
        n+1 cells, n the ambient dimension
    """
    assignment = vp.assignment if isinstance(vp, VertexPartition) else vp
    tie_break = tie_break or lex_tie_break
    n = P.ambient_dim
    missing = [v for v in P.vertices if v not in assignment]
    if missing:
        raise InvalidInput(f"vertex partition does not assign {missing}")
    cells: List[set] = [set() for _ in range(n + 1)]
    vertices = set(P.vertices)
    for u in P.lattice_points:
        if u in vertices:
            j = assignment[u]
        else:
            candidates = [(v, assignment[v]) for v in sort_points(carrier_vertices(P, u))]
            j = tie_break(u, candidates)
            if j not in {c for _, c in candidates}:
                raise InvalidInput(f"tie-break put {u} in class {j}, held by no vertex of its minimal face")
        if not 0 <= j <= n:
            raise InvalidInput(f"class {j} out of range 0..{n}")
        cells[j].add(u)
    return [frozenset(c) for c in cells]


class PartitionMatrix:
    """(n+1) x (n+1) grid of lattice point sets; row i lives in P_i."""

    def __init__(self, family: PolytopeFamily, cells: Sequence[Sequence]):
        size = family.n + 1
        if len(cells) != size or any(len(row) != size for row in cells):
            raise InvalidInput(f"partition grid must be {size} x {size}")
        self.family = family
        self.cells: Tuple[Tuple[Cell, ...], ...] = tuple(
            tuple(frozenset(tuple(int(c) for c in u) for u in cell) for cell in row)
            for row in cells
        )

    @classmethod
    def from_vertex_partitions(
        cls,
        family: PolytopeFamily,
        vertex_partitions: Sequence[VertexPartition | Mapping[Point, int]],
        tie_breaks: Optional[Sequence[Optional[TieBreak]]] = None,
    ) -> "PartitionMatrix":
        tie_breaks = tie_breaks or [None] * len(family)
        rows = [
            induce(P, vp, tb) for P, vp, tb in zip(family.members, vertex_partitions, tie_breaks)
        ]
        return cls(family, rows)

    @property
    def size(self) -> int:
        return len(self.cells)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartitionMatrix):
            return NotImplemented
        return self.cells == other.cells

    def __hash__(self) -> int:
        return hash(self.cells)

    def __repr__(self) -> str:
        return f"PartitionMatrix({self.as_lists()})"

    def class_of(self, i: int, u: Point) -> Optional[int]:
        for j, cell in enumerate(self.cells[i]):
            if u in cell:
                return j
        return None

    def as_lists(self) -> List[List[List[List[int]]]]:
        return [[[list(u) for u in sort_points(cell)] for cell in row] for row in self.cells]

    def permuted_columns(self, sigma: Sequence[int]) -> "PartitionMatrix":
        """Move column j to position sigma[j]."""
        rows = []
        for row in self.cells:
            moved = [frozenset()] * self.size
            for j, cell in enumerate(row):
                moved[sigma[j]] = cell
            rows.append(moved)
        return PartitionMatrix(self.family, rows)


@dataclass(frozen=True)
class CompatibilityReport:
    compatible: bool
    permutation: Optional[Tuple[int, ...]] = None
    points: Optional[Tuple[Point, ...]] = None
    face: Optional[FaceRef] = None

    def __bool__(self) -> bool:
        return self.compatible

    def describe(self) -> str:
        if self.compatible:
            return "compatible"
        where = f" on face {[list(v) for v in self.face.vertices]}" if self.face is not None else ""
        picked = f" with points {[list(u) for u in self.points]}" if self.points else ""
        return f"permutation {list(self.permutation)}{picked} lands on the boundary{where}"


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    diagnostics: Tuple[str, ...] = ()
    compatibility: Optional[CompatibilityReport] = None

    def __bool__(self) -> bool:
        return self.valid


def _row_problems(M: PartitionMatrix) -> List[str]:
    problems = []
    for i, P in enumerate(M.family.members):
        row = M.cells[i]
        union = frozenset().union(*row)
        outside = sort_points(u for u in union if not P.contains(u))
        if outside:
            problems.append(f"row {i}: {list(outside[0])} is not a lattice point of P_{i}")
            continue
        if sum(len(c) for c in row) != len(union):
            problems.append(f"row {i}: cells overlap")
            continue
        uncovered = sort_points(set(P.lattice_points) - union)
        if uncovered:
            problems.append(f"row {i}: {list(uncovered[0])} is in no cell")
    return problems


def _induced_problems(M: PartitionMatrix) -> List[str]:
    problems = []
    for i, P in enumerate(M.family.members):
        for j, cell in enumerate(M.cells[i]):
            for u in sort_points(cell):
                if not any(v in cell for v in carrier_vertices(P, u)):
                    problems.append(
                        f"cell ({i},{j}): {list(u)} has no vertex of its minimal face in the same cell"
                    )
    return problems


def partition_problems(M: PartitionMatrix) -> List[str]:
    """Row-partition problems, or induced-condition problems once the rows are sound."""
    return _row_problems(M) or _induced_problems(M)


def validate(M: PartitionMatrix, jobs: Optional[int] = None) -> ValidationReport:
    """Row partition, induced-partition condition, then compatibility by faces."""
    problems = partition_problems(M)
    if problems:
        return ValidationReport(False, tuple(problems))
    report = compatibility_by_faces(M, jobs)
    if not report:
        return ValidationReport(False, (f"compatibility: {report.describe()}",), report)
    return ValidationReport(True, (), report)


def compatibility_bruteforce(
    M: PartitionMatrix, vertices_only: bool = False, jobs: Optional[int] = None
) -> CompatibilityReport:
    """
    Check that every transversal sum u_0 + ... + u_n with u_i in cell
    (eps(i), i) is interior to the total polytope.

    Args:
        vertices_only: restrict each u_i to cell members that are vertices of P_{eps(i)}
    """
    family = M.family
    P = family.total
    n = family.n
    vertex_sets = [set(Q.vertices) for Q in family.members]

    def members(i: int, j: int) -> List[Point]:
        cell = sort_points(M.cells[i][j])
        if vertices_only:
            return [u for u in cell if u in vertex_sets[i]]
        return cell

    def check(eps: Tuple[int, ...]) -> Optional[CompatibilityReport]:
        choices = [members(eps[i], i) for i in range(n + 1)]
        for pts in product(*choices):
            total = tuple(sum(coords) for coords in zip(*pts))
            if not interior_contains(P, total):
                return CompatibilityReport(False, eps, pts, minimal_face(P, total))
        return None

    for failure in ordered_map(check, permutations(range(n + 1)), jobs):
        if failure is not None:
            logger.debug(f"bruteforce compatibility failure: {failure.describe()}")
            return failure
    return CompatibilityReport(True)


def compatibility_by_faces(M: PartitionMatrix, jobs: Optional[int] = None) -> CompatibilityReport:
    """Every proper face of the total polytope must have a permanent-zero coloring matrix."""
    faces = all_faces(M.family.total)
    matrices = ordered_map(lambda f: coloring_matrix(M, f), faces, jobs)
    size = M.size
    for face, A in zip(faces, matrices):
        if permanent(A) == 0:
            continue
        eps = next(
            p for p in permutations(range(size)) if all(A.entries[p[i]][i] for i in range(size))
        )
        return CompatibilityReport(False, eps, None, face)
    return CompatibilityReport(True)
