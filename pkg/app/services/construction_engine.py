"""
Constructive partition strategies.

  * shared complete flags (any n): cell (i, j) holds the points of P_i^j off P_i^{j-1};
  * the planar case analysis: edge labels around the boundary of P0+P1+P2,
    the first window carrying all three labels, and one partition rule per window shape;
  * a bounded exhaustive search over vertex partitions, pruned face by face.

Every emitted partition is re-validated with both compatibility oracles and
must have combinatorial degree +1 or -1.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cmp_to_key
from itertools import product
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from app.config import settings
from app.errors import (
    ExceptionalFamily,
    InternalError,
    InvalidInput,
    NoPartitionFound,
    PreconditionViolated,
    ResourceLimit,
)
from app.services.coloring_engine import Flavor, face_coloring, permanent
from app.services.degree_engine import cdeg, pl_degree
from app.services.exact import primitive
from app.services.partition_engine import (
    PartitionMatrix,
    TieBreak,
    compatibility_bruteforce,
    validate,
)
from app.services.polytope_core import (
    FaceRef,
    Flag,
    LatticePolytope,
    Point,
    PolytopeFamily,
    all_faces,
    carrier_vertices,
    complete_flags,
    face_of,
    face_points,
    minkowski,
)

logger = logging.getLogger(__name__)


class Dim2Case(str, Enum):
    """Window shape of the planar case analysis"""
    LOCALLY_UNMIXED = "LocallyUnmixed"
    PARTIALLY_UNMIXED_2A = "PartiallyUnmixed2a"
    PARTIALLY_UNMIXED_2B = "PartiallyUnmixed2b"
    GENERICALLY_MIXED = "GenericallyMixed"
    EXCEPTIONAL = "Exceptional"


class SearchMode(str, Enum):
    FIRST = "first"
    ALL = "all"


@dataclass(frozen=True)
class SharedFlag:
    """Per-member chains P_i^0 < ... < P_i^{n-1} summing to a complete flag of the total polytope."""

    member_faces: Tuple[Tuple[FaceRef, ...], ...]
    total_flag: Flag


@dataclass(frozen=True)
class BoundaryEdge:
    position: int
    start: Point
    end: Point
    normal: Point
    label: frozenset


@dataclass(frozen=True)
class Dim2Report:
    edges: Tuple[BoundaryEdge, ...]
    window: Tuple[int, ...]
    case: Dim2Case
    attempt: Optional[str] = None

    @property
    def labels(self) -> Tuple[frozenset, ...]:
        return tuple(e.label for e in self.edges)

    def describe(self) -> str:
        labels = " ".join("{" + ",".join(str(i) for i in sorted(e.label)) + "}" for e in self.edges)
        return f"labels {labels}; window {list(self.window)}; case {self.case.value}"


@dataclass(frozen=True)
class Construction:
    partition: PartitionMatrix
    strategy: str
    case: Optional[str] = None
    report: Optional[Dim2Report] = None


Rules = Sequence[Tuple[Set[Point], int]]


def _rule_row(P: LatticePolytope, rules: Rules, default: int) -> Tuple[Dict[Point, int], TieBreak]:
    """Vertex classes plus a tie-break honouring the first matching rule when the minimal face allows it."""
    desired = {u: next((c for pts, c in rules if u in pts), default) for u in P.lattice_points}

    def tie_break(u: Point, candidates: Sequence[Tuple[Point, int]]) -> int:
        if desired[u] in {c for _, c in candidates}:
            return desired[u]
        return candidates[0][1]

    return {v: desired[v] for v in P.vertices}, tie_break


def _rule_partition(family: PolytopeFamily, rows: Sequence[Tuple[Rules, int]]) -> PartitionMatrix:
    built = [_rule_row(P, rules, default) for P, (rules, default) in zip(family.members, rows)]
    return PartitionMatrix.from_vertex_partitions(
        family, [vp for vp, _ in built], [tb for _, tb in built]
    )


def certifies(M: PartitionMatrix, seed: Optional[int] = None, jobs: Optional[int] = None) -> bool:
    """Valid, compatible by both oracles, and of combinatorial degree +-1."""
    if not validate(M, jobs) or not compatibility_bruteforce(M, jobs=jobs):
        return False
    try:
        return abs(cdeg(M, seed, jobs)) == 1
    except PreconditionViolated as e:
        logger.debug(f"candidate rejected: {e.message}")
        return False


def find_shared_flag(family: PolytopeFamily) -> Optional[SharedFlag]:
    """Lex-first complete flag of the total polytope whose summand faces have dimensions 0..n-1."""
    P = family.total
    for flag in complete_flags(P):
        chains = []
        for Q in family.members:
            chain = tuple(face_of(Q, face.witness) for face in flag.faces)
            if any(f.dim != j for j, f in enumerate(chain)):
                break
            chains.append(chain)
        else:
            logger.info(f"shared flag found: {flag.key}")
            return SharedFlag(tuple(chains), flag)
    return None


def locally_unmixed_partition(family: PolytopeFamily, sf: SharedFlag) -> PartitionMatrix:
    """Cell (i, j) = lattice points of P_i^j not on P_i^{j-1}, with P_i^n = P_i."""
    n = family.n
    rows = []
    for Q, chain in zip(family.members, sf.member_faces):
        rules = [(set(face_points(Q, face.witness)), j) for j, face in enumerate(chain)]
        rows.append((rules, n))
    M = _rule_partition(family, rows)
    report = validate(M)
    if not report:
        raise InternalError(
            f"shared-flag partition failed validation: {report.diagnostics[0]}", witness=report
        )
    return M


def _cross(a: Sequence[int], b: Sequence[int]) -> int:
    return a[0] * b[1] - a[1] * b[0]


def boundary_edges(family: PolytopeFamily) -> List[BoundaryEdge]:
    """Edges of the planar total polytope, counterclockwise from its tuple-minimal vertex (leftmost, then lowest)."""
    P = family.total
    if P.ambient_dim != 2 or P.dim != 2:
        raise PreconditionViolated("boundary walk needs a two-dimensional sum in the plane")
    start = min(P.vertices)
    rest = [v for v in P.vertices if v != start]

    def ccw(a: Point, b: Point) -> int:
        da = (a[0] - start[0], a[1] - start[1])
        db = (b[0] - start[0], b[1] - start[1])
        return -_cross(da, db)

    ring = [start] + sorted(rest, key=cmp_to_key(ccw))
    edges = []
    for t, a in enumerate(ring):
        b = ring[(t + 1) % len(ring)]
        normal = primitive((a[1] - b[1], b[0] - a[0]))
        label = frozenset(i for i, Q in enumerate(family.members) if face_of(Q, normal).dim == 1)
        edges.append(BoundaryEdge(t, a, b, normal, label))
    return edges


def first_window(edges: Sequence[BoundaryEdge], count: int = 3) -> Tuple[int, ...]:
    """Walk until every label has been seen, then keep the shortest tail that still sees them all."""
    everything = set(range(count))
    seen: Set[int] = set()
    for end, edge in enumerate(edges):
        seen |= edge.label
        if seen >= everything:
            break
    else:
        raise InternalError("boundary labels never cover every member")
    covered: Set[int] = set()
    for begin in range(end, -1, -1):
        covered |= edges[begin].label
        if covered >= everything:
            return tuple(range(begin, end + 1))
    raise InternalError("window search fell off the boundary")


def _normal_set(P: LatticePolytope) -> Set[Point]:
    return {f.normal for f in P.facets}


def is_exceptional(family: PolytopeFamily) -> bool:
    """Two non-parallel segments plus a polygon with the normal fan of their sum."""
    if family.n != 2:
        return False
    segments = [i for i, Q in enumerate(family.members) if Q.dim == 1]
    if len(segments) != 2:
        return False
    (third,) = [i for i in range(3) if i not in segments]
    if family[third].dim != 2:
        return False
    box = minkowski(family[segments[0]], family[segments[1]])
    if box.dim != 2:
        return False
    return _normal_set(box) == _normal_set(family[third])


def _exceptional_error(family: PolytopeFamily) -> ExceptionalFamily:
    return ExceptionalFamily(
        "exceptional family: two members are non-parallel segments and the third has the normal "
        "fan of their sum; every compatible vertex partition of such a family yields a residue "
        "matrix with determinant zero, so no partition matrix certificate exists"
    )


def _flag_edge_rows(
    family: PolytopeFamily,
    edges: Sequence[BoundaryEdge],
    flag_pos: int,
    other_pos: int,
    extend_shared: bool = False,
    split_outer: bool = False,
) -> List[Tuple[Rules, int]]:
    """
    Members with an edge on the flag edge e get: corner vertex -> 0, rest of e -> 1, rest -> 2.
    The others keep their single point on e in class 0, everything else in class 2.

    Args:
        flag_pos: position of e
        other_pos: position of the adjacent window edge f; the corner is the end of e away from f
        extend_shared: members with edges on both e and f also put their f points in class 1
        split_outer: the member with an edge on f only puts its f points in class 1, except
            the end of f away from e, and leaves class 0 empty
    """
    m = len(edges)
    e, f = edges[flag_pos], edges[other_pos]
    forward = other_pos == (flag_pos + 1) % m
    adjacent = edges[(flag_pos - 1) % m] if forward else edges[(flag_pos + 1) % m]
    beyond = edges[(other_pos + 1) % m] if forward else edges[(other_pos - 1) % m]
    corner = tuple(a + b for a, b in zip(e.normal, adjacent.normal))
    far = tuple(a + b for a, b in zip(f.normal, beyond.normal))
    rows = []
    for i, Q in enumerate(family.members):
        on_e = set(face_points(Q, e.normal))
        on_f = set(face_points(Q, f.normal))
        if i in e.label:
            rules = [(set(face_points(Q, corner)), 0), (on_e, 1)]
            if extend_shared and i in f.label:
                rules.append((on_f, 1))
        elif split_outer and i in f.label:
            rules = [(on_f - set(face_points(Q, far)), 1)]
        else:
            rules = [(on_e, 0)]
        rows.append((rules, 2))
    return rows


def _mixed_rows(
    family: PolytopeFamily, edges: Sequence[BoundaryEdge], window: Sequence[int]
) -> List[Tuple[Rules, int]]:
    """
    Window first edge, a run of middle edges of one member j, last edge:
    j keeps its first-edge points in class 0 and its points on the later window edges in class 1;
    the member unique to the last edge puts its first-edge point in class 0;
    the member unique to the first edge puts its last-edge point in class 1.
    """
    first, last = edges[window[0]], edges[window[-1]]
    middle = [edges[p] for p in window[1:-1]]
    middle_members = frozenset().union(*(e.label for e in middle))
    (i,) = first.label - middle_members - last.label
    (k,) = last.label - middle_members - first.label
    (j,) = {0, 1, 2} - {i, k}
    rows: List[Tuple[Rules, int]] = [None] * 3
    Pj = family[j]
    later = set()
    for e in middle + [last]:
        later |= set(face_points(Pj, e.normal))
    rows[j] = ([(set(face_points(Pj, first.normal)), 0), (later, 1)], 2)
    rows[k] = ([(set(face_points(family[k], first.normal)), 0)], 2)
    rows[i] = ([(set(face_points(family[i], last.normal)), 1)], 2)
    return rows


def _shared_flag_on_edge(family: PolytopeFamily, edges: Sequence[BoundaryEdge], pos: int) -> SharedFlag:
    e = edges[pos]
    previous = edges[(pos - 1) % len(edges)]
    corner = tuple(a + b for a, b in zip(e.normal, previous.normal))
    P = family.total
    flag = Flag((face_of(P, corner), face_of(P, e.normal)))
    chains = tuple((face_of(Q, corner), face_of(Q, e.normal)) for Q in family.members)
    return SharedFlag(chains, flag)


def classify(edges: Sequence[BoundaryEdge], window: Sequence[int]) -> Dim2Case:
    if any(len(e.label) == 3 for e in edges):
        return Dim2Case.LOCALLY_UNMIXED
    if len(window) == 2:
        a, b = (edges[p].label for p in window)
        return Dim2Case.PARTIALLY_UNMIXED_2A if not a & b else Dim2Case.PARTIALLY_UNMIXED_2B
    return Dim2Case.GENERICALLY_MIXED


def _candidates(
    family: PolytopeFamily, edges: Sequence[BoundaryEdge], window: Sequence[int], case: Dim2Case
) -> Iterator[Tuple[str, PartitionMatrix]]:
    if case == Dim2Case.LOCALLY_UNMIXED:
        pos = next(e.position for e in edges if len(e.label) == 3)
        yield "flag", locally_unmixed_partition(family, _shared_flag_on_edge(family, edges, pos))
        return
    if case == Dim2Case.GENERICALLY_MIXED:
        yield "forward", _rule_partition(family, _mixed_rows(family, edges, window))
        yield "mirrored", _rule_partition(family, _mixed_rows(family, edges, list(reversed(window))))
        return

    a, b = window
    if case == Dim2Case.PARTIALLY_UNMIXED_2A:
        flag_pos, other_pos = (a, b) if len(edges[a].label) == 2 else (b, a)
        yield "original", _rule_partition(family, _flag_edge_rows(family, edges, flag_pos, other_pos))
        return

    yield "original", _rule_partition(
        family, _flag_edge_rows(family, edges, a, b, extend_shared=True)
    )
    yield "swapped", _rule_partition(
        family, _flag_edge_rows(family, edges, b, a, extend_shared=True)
    )
    # forward fails only when the member unique to b is a segment parallel to an edge of the
    # shared member, backward symmetrically; both failing is the exceptional configuration
    for name, (flag_pos, other_pos) in (("outer-forward", (a, b)), ("outer-backward", (b, a))):
        yield name, _rule_partition(
            family, _flag_edge_rows(family, edges, flag_pos, other_pos, split_outer=True)
        )


def dim2_partition(
    family: PolytopeFamily, seed: Optional[int] = None, jobs: Optional[int] = None
) -> Tuple[PartitionMatrix, Dim2Report]:
    """
    Planar case analysis over the boundary of P0+P1+P2.

    Returns:
        the first candidate partition that validates with combinatorial
        degree +-1, and the report of the walk

    Raises:
        ExceptionalFamily: for the exceptional configuration
        InternalError: when no candidate (nor the bounded search) certifies
    """
    if family.n != 2:
        raise PreconditionViolated(f"planar case analysis needs n = 2, got n = {family.n}")
    if is_exceptional(family):
        raise _exceptional_error(family)
    edges = boundary_edges(family)
    window = first_window(edges)
    case = classify(edges, window)
    report = Dim2Report(tuple(edges), window, case)
    logger.info(f"dim2 walk: {report.describe()}")

    for name, M in _candidates(family, edges, window, case):
        if certifies(M, seed, jobs):
            logger.info(f"dim2 {case.value}: {name} partition certifies")
            return M, Dim2Report(tuple(edges), window, case, name)
        logger.info(f"dim2 {case.value}: {name} partition rejected")

    logger.warning(f"dim2 {case.value}: rule partitions exhausted, falling back to bounded search")
    try:
        found = exhaustive_search(family, seed=seed, jobs=jobs)
    except ResourceLimit:
        found = None
    if found is None:
        raise InternalError(f"no certifying partition for a non-exceptional family ({report.describe()})", witness=report)
    return found, Dim2Report(tuple(edges), window, case, "search")


class _SearchState:
    """Per-face counts of assigned vertices by (member, class); a face is blocked once its permanent is nonzero."""

    def __init__(self, family: PolytopeFamily):
        self.family = family
        self.size = family.n + 1
        self.faces = all_faces(family.total)
        self.counts = [[[0] * self.size for _ in range(self.size)] for _ in self.faces]
        self.slots: List[Tuple[int, Point]] = [
            (i, v) for i, Q in enumerate(family.members) for v in Q.vertices
        ]
        self.touches: Dict[Tuple[int, Point], List[int]] = {}
        for i, Q in enumerate(family.members):
            for f, face in enumerate(self.faces):
                for v in face_points(Q, face.witness):
                    if v in Q.vertices:
                        self.touches.setdefault((i, v), []).append(f)

    def place(self, slot: Tuple[int, Point], j: int, delta: int) -> None:
        i, _ = slot
        for f in self.touches.get(slot, []):
            self.counts[f][i][j] += delta

    def blocked(self, slot: Tuple[int, Point]) -> bool:
        for f in self.touches.get(slot, []):
            ones = tuple(tuple(int(c > 0) for c in row) for row in self.counts[f])
            if permanent(ones) != 0:
                return True
        return False


def _compatible_vertex_partitions(family: PolytopeFamily) -> Iterator[List[Dict[Point, int]]]:
    """Every vertex partition whose coloring matrices all have permanent zero, in lex order."""
    state = _SearchState(family)
    slots = state.slots
    assignment: List[int] = []

    def descend(depth: int) -> Iterator[List[Dict[Point, int]]]:
        if depth == len(slots):
            rows: List[Dict[Point, int]] = [dict() for _ in family.members]
            for (i, v), j in zip(slots, assignment):
                rows[i][v] = j
            yield rows
            return
        slot = slots[depth]
        for j in range(state.size):
            state.place(slot, j, 1)
            if not state.blocked(slot):
                assignment.append(j)
                yield from descend(depth + 1)
                assignment.pop()
            state.place(slot, j, -1)

    yield from descend(0)


def _tie_break_extensions(family: PolytopeFamily, rows: Sequence[Mapping[Point, int]]) -> Iterator[PartitionMatrix]:
    """All induced extensions: each non-vertex point takes any class present on its minimal face."""
    free: List[Tuple[int, Point, List[int]]] = []
    for i, Q in enumerate(family.members):
        vertices = set(Q.vertices)
        for u in Q.lattice_points:
            if u not in vertices:
                classes = sorted({rows[i][v] for v in carrier_vertices(Q, u)})
                free.append((i, u, classes))
    for choice in product(*(classes for _, _, classes in free)):
        picked = {(i, u): j for (i, u, _), j in zip(free, choice)}
        tie_breaks = [
            (lambda i: lambda u, candidates: picked[(i, u)])(i) for i in range(len(family))
        ]
        yield PartitionMatrix.from_vertex_partitions(family, rows, tie_breaks)


def exhaustive_search(
    family: PolytopeFamily,
    bound: Optional[int] = None,
    mode: SearchMode = SearchMode.FIRST,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
):
    """
    Depth-first search over vertex partitions, pruned as soon as some face's
    coloring matrix acquires a nonzero permanent.

    Returns:
        FIRST: the lex-first compatible partition (lex tie-break) with
            combinatorial degree +-1, or None; coloring matrices read only
            vertex classes, so one extension per vertex partition is tried
        ALL: every compatible induced partition with its residue determinant
    """
    from app.services.residue_engine import determinant, residue_matrix

    bound = bound or settings.RESKIT_SEARCH_VERTEX_BOUND
    total = sum(len(Q.vertices) for Q in family.members)
    if total > bound:
        raise ResourceLimit(f"exhaustive search over {total} vertices exceeds the bound {bound}")

    if mode == SearchMode.ALL:
        found = []
        for rows in _compatible_vertex_partitions(family):
            for M in _tie_break_extensions(family, rows):
                found.append((M, determinant(residue_matrix(M))))
        logger.info(f"exhaustive search: {len(found)} compatible partition matrices")
        return found

    visited = 0
    for rows in _compatible_vertex_partitions(family):
        visited += 1
        M = PartitionMatrix.from_vertex_partitions(family, rows)
        try:
            degree = pl_degree(face_coloring(M, Flavor.MAX, jobs), seed=seed)
        except PreconditionViolated:
            continue
        if abs(degree) == 1 and validate(M, jobs):
            logger.info(f"exhaustive search: certificate after {visited} compatible vertex partitions")
            return M
    logger.info(f"exhaustive search: none of {visited} compatible vertex partitions has degree +-1")
    return None


STRATEGIES = ("auto", "locally-unmixed", "dim2", "search")


def build_partition(
    family: PolytopeFamily, strategy: str = "auto", seed: Optional[int] = None, jobs: Optional[int] = None
) -> Construction:
    """
    Obtain a certifying partition matrix.

    auto tries a shared flag, then (n = 2) the planar case analysis, then the bounded search.
    """
    if strategy not in STRATEGIES:
        raise InvalidInput(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    n = family.n

    if strategy in ("auto", "locally-unmixed"):
        if n == 2 and is_exceptional(family):
            raise _exceptional_error(family)
        sf = find_shared_flag(family)
        if sf is not None:
            case = Dim2Case.LOCALLY_UNMIXED.value if n == 2 else None
            return Construction(locally_unmixed_partition(family, sf), "locally-unmixed", case)
        if strategy == "locally-unmixed":
            raise NoPartitionFound("the family shares no complete flag")

    if strategy == "dim2" or (strategy == "auto" and n == 2):
        try:
            M, report = dim2_partition(family, seed, jobs)
            return Construction(M, "dim2", report.case.value, report)
        except InternalError as e:
            if strategy == "dim2":
                raise
            logger.warning(f"dim2 construction failed ({e.message}), trying the bounded search")

    M = exhaustive_search(family, seed=seed, jobs=jobs)
    if M is None:
        raise NoPartitionFound("no compatible partition matrix with combinatorial degree +-1 exists")
    return Construction(M, "search")
