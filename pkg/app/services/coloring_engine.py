"""
Coloring matrices of a partition matrix, permanents, Frobenius-Koenig zero
blocks, admissible colorings and the canonical (max/min) face colorings.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

import networkx as nx

from app.errors import InternalError, InvalidInput, PreconditionViolated
from app.services.polytope_core import (
    FaceRef,
    Flag,
    LatticePolytope,
    all_faces,
    complete_flags,
    face_points,
)
from app.services.workers import ordered_map

logger = logging.getLogger(__name__)

Colors = FrozenSet[int]

MAX_PERMANENT_SIZE = 8


class Flavor(str, Enum):
    """Which canonical coloring to take at each face"""
    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class ColoringMatrix:
    """0/1 matrix: entry (i, j) is 1 when cell (i, j) meets the face of P_i."""

    entries: Tuple[Tuple[int, ...], ...]
    face: Optional[FaceRef] = None

    @property
    def size(self) -> int:
        return len(self.entries)


def _rows(A) -> Tuple[Tuple[int, ...], ...]:
    if isinstance(A, ColoringMatrix):
        return A.entries
    return tuple(tuple(int(x) for x in row) for row in A)


def coloring_matrix(M, face: FaceRef) -> ColoringMatrix:
    """
    Coloring matrix of partition matrix M at a proper face of the total polytope.

    Args:
        M: PartitionMatrix
        face: face of M.family.total; its witness direction selects the
            summand faces P_i^v

    Returns:
        ColoringMatrix tagged with the face
    """
    family = M.family
    entries = []
    for i, P in enumerate(family.members):
        on_face = set(face_points(P, face.witness))
        entries.append(tuple(int(bool(cell & on_face)) for cell in M.cells[i]))
    return ColoringMatrix(tuple(entries), face)


def permanent(A) -> int:
    """Permanent by Ryser's inclusion-exclusion formula."""
    rows = _rows(A)
    m = len(rows)
    if m > MAX_PERMANENT_SIZE or any(len(row) != m for row in rows):
        raise InvalidInput(f"permanent needs a square matrix of size at most {MAX_PERMANENT_SIZE}")
    if m == 0:
        return 1
    total = 0
    for mask in range(1, 1 << m):
        cols = [j for j in range(m) if mask >> j & 1]
        prod = 1
        for row in rows:
            prod *= sum(row[j] for j in cols)
            if prod == 0:
                break
        total += (-1) ** (m - len(cols)) * prod
    return total


def fk_zero_submatrix(A) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """
    Zero block I x J with |I| + |J| = size + 1 of a permanent-zero matrix.

    The rows and columns left uncovered by a minimum vertex cover of the
    bipartite graph of ones (Koenig) span an all-zero block; it is trimmed
    to the exact size.
    """
    rows = _rows(A)
    m = len(rows)
    if permanent(rows) != 0:
        raise PreconditionViolated("matrix has nonzero permanent, no zero block of size n+2 exists")

    row_nodes = [("r", i) for i in range(m)]
    graph = nx.Graph()
    graph.add_nodes_from(row_nodes, bipartite=0)
    graph.add_nodes_from((("c", j) for j in range(m)), bipartite=1)
    graph.add_edges_from(
        (("r", i), ("c", j)) for i in range(m) for j in range(m) if rows[i][j]
    )
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=row_nodes)
    cover = nx.bipartite.to_vertex_cover(graph, matching, top_nodes=row_nodes)

    I = [i for i in range(m) if ("r", i) not in cover]
    J = [j for j in range(m) if ("c", j) not in cover]
    while len(I) + len(J) > m + 1:
        if len(I) > 1:
            I.pop()
        else:
            J.pop()
    return tuple(I), tuple(J)


@dataclass(frozen=True)
class AdmissibleSet:
    colorings: Tuple[Colors, ...]
    maximal: Tuple[Colors, ...]
    minimal: Tuple[Colors, ...]

    def __contains__(self, J: Iterable[int]) -> bool:
        return frozenset(J) in self.colorings

    def __len__(self) -> int:
        return len(self.colorings)


def _subset_order(J: Colors) -> tuple:
    return (len(J), tuple(sorted(J)))


def zero_rows(A, J: Iterable[int]) -> Tuple[int, ...]:
    """Rows of A vanishing on every column of J."""
    rows = _rows(A)
    J = list(J)
    return tuple(i for i, row in enumerate(rows) if all(row[j] == 0 for j in J))


def admissible_colorings(A) -> AdmissibleSet:
    """All J with at least size+1-|J| rows vanishing on J, plus maximal and minimal ones."""
    rows = _rows(A)
    m = len(rows)
    if permanent(rows) != 0:
        raise PreconditionViolated("admissible colorings need a permanent-zero coloring matrix")
    found = []
    for size in range(1, m):
        for J in combinations(range(m), size):
            if len(zero_rows(rows, J)) >= m + 1 - size:
                found.append(frozenset(J))
    maximal = [J for J in found if not any(J < K for K in found)]
    minimal = [J for J in found if not any(K < J for K in found)]
    return AdmissibleSet(
        tuple(sorted(found, key=_subset_order)),
        tuple(sorted(maximal, key=_subset_order)),
        tuple(sorted(minimal, key=_subset_order)),
    )


def canonical_coloring(A) -> Tuple[Colors, Colors]:
    """
    Returns:
        (c, C): union of the minimal admissible colorings and intersection
        of the maximal ones
    """
    admissible = admissible_colorings(A)
    if not admissible.colorings:
        raise PreconditionViolated("coloring matrix has no admissible coloring")
    c = frozenset().union(*admissible.minimal)
    C = frozenset.intersection(*admissible.maximal)
    if c not in admissible or C not in admissible or not c <= C:
        raise InternalError(f"canonical colorings c={sorted(c)} C={sorted(C)} are not admissible")
    return c, C


@dataclass(frozen=True, eq=False)
class FaceColoring:
    """Color sets on the proper faces of a polytope; colors range over 0..n."""

    polytope: LatticePolytope
    n: int
    colors: Mapping[FaceRef, Colors]
    flavor: Optional[Flavor] = None

    def __post_init__(self):
        for face, J in self.colors.items():
            if not J or not set(J) <= set(range(self.n + 1)):
                raise InvalidInput(f"face {face.key} has invalid color set {sorted(J)}")

    def __getitem__(self, face: FaceRef) -> Colors:
        try:
            return self.colors[face]
        except KeyError:
            raise InvalidInput(f"face {face.key} is not colored")

    def permuted(self, sigma: Mapping[int, int]) -> "FaceColoring":
        """Recolor every face through the color permutation sigma."""
        recolored = {f: frozenset(sigma.get(c, c) for c in J) for f, J in self.colors.items()}
        return FaceColoring(self.polytope, self.n, recolored, self.flavor)


def face_coloring(M, flavor: Flavor = Flavor.MAX, jobs: Optional[int] = None) -> FaceColoring:
    """Canonical coloring of every proper face of the total polytope of M."""
    P = M.family.total
    faces = all_faces(P)
    matrices = ordered_map(lambda f: coloring_matrix(M, f), faces, jobs)
    colors: Dict[FaceRef, Colors] = {}
    for face, A in zip(faces, matrices):
        if permanent(A) != 0:
            raise PreconditionViolated(
                f"partition is not compatible: coloring matrix at face {face.key} has nonzero permanent",
                witness=face,
            )
        c, C = canonical_coloring(A)
        colors[face] = C if flavor == Flavor.MAX else c
        logger.debug(f"face {face.key}: c={sorted(c)} C={sorted(C)}")
    return FaceColoring(P, M.family.n, colors, flavor)


@dataclass(frozen=True)
class SimplicialityReport:
    simplicial: bool
    witness: Optional[Flag] = None

    def __bool__(self) -> bool:
        return self.simplicial


def flag_colors(fc: FaceColoring, faces: Sequence[FaceRef]) -> Colors:
    return frozenset().union(*(fc[f] for f in faces))


def is_simplicial(fc: FaceColoring) -> SimplicialityReport:
    """No complete flag may accumulate all n+1 colors (unions only grow along refinement)."""
    for flag in complete_flags(fc.polytope):
        if len(flag_colors(fc, flag.faces)) > fc.n:
            return SimplicialityReport(False, flag)
    return SimplicialityReport(True)


def refines(fine: FaceColoring, coarse: FaceColoring) -> bool:
    """True when every face's color set in `fine` lies inside its set in `coarse`."""
    return all(fine[f] <= coarse[f] for f in coarse.colors)
