"""
Lattice polytope geometry in exact arithmetic.

Hulls, facet inequalities, the face poset, complete flags and their signs,
Minkowski sums, lattice points, interiority and essentiality of families.

Points are tuples of ints. Everywhere a deterministic order is needed, points
are compared with `point_key`: lexicographic with the LAST coordinate most
significant, which is the order monomials are written in (1, x, x^2, y, xy, ...).
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations, product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from app.errors import InternalError, InvalidInput, PreconditionViolated
from app.services.exact import determinant, dot, nullspace, primitive, rank, sign

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]

COEFFICIENT_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def point_key(u: Sequence) -> tuple:
    return tuple(reversed(tuple(u)))


def sort_points(points: Iterable[Point]) -> List[Point]:
    return sorted(points, key=point_key)


def affine_dim(points: Sequence[Sequence]) -> int:
    if not points:
        return -1
    base = points[0]
    return rank([[a - b for a, b in zip(p, base)] for p in points[1:]])


def barycenter(points: Sequence[Sequence]) -> Tuple[Fraction, ...]:
    count = len(points)
    return tuple(Fraction(sum(coords), count) for coords in zip(*points))


@dataclass(frozen=True)
class Facet:
    """Inequality <normal, u> + offset >= 0 with a primitive integer normal."""

    normal: Point
    offset: int

    def value(self, u: Sequence) -> int:
        return dot(self.normal, u) + self.offset


class Interior(Enum):
    """Marker returned by minimal_face for points interior to the polytope."""

    INTERIOR = "interior"


INTERIOR = Interior.INTERIOR


@dataclass(frozen=True)
class FaceRef:
    """A face of a polytope, identified by the indices of its vertices."""

    polytope: "LatticePolytope" = field(compare=False, repr=False)
    vertex_set: Tuple[int, ...]
    witness: Tuple = field(compare=False)
    dim: int = field(compare=False)

    @property
    def vertices(self) -> Tuple[Point, ...]:
        return tuple(self.polytope.vertices[i] for i in self.vertex_set)

    @property
    def key(self) -> tuple:
        return tuple(point_key(v) for v in self.vertices)

    @property
    def barycenter(self) -> Tuple[Fraction, ...]:
        return barycenter(self.vertices)

    def is_subface_of(self, other: "FaceRef") -> bool:
        return set(self.vertex_set) <= set(other.vertex_set)


@dataclass(frozen=True)
class Flag:
    """Chain of faces of strictly increasing dimension, smallest first."""

    faces: Tuple[FaceRef, ...]

    @property
    def key(self) -> tuple:
        return tuple(f.key for f in self.faces)

    def __len__(self) -> int:
        return len(self.faces)


class LatticePolytope:
    """Convex hull of finitely many lattice points; build it with `hull`."""

    def __init__(
        self,
        vertices: Sequence[Point],
        ambient_dim: int,
        facets: Sequence[Facet],
        equations: Sequence[Facet],
        dim: int,
    ):
        self.vertices: Tuple[Point, ...] = tuple(sort_points(vertices))
        self.ambient_dim = ambient_dim
        self.facets: Tuple[Facet, ...] = tuple(sorted(facets, key=lambda f: f.normal, reverse=True))
        self.equations: Tuple[Facet, ...] = tuple(equations)
        self.dim = dim

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatticePolytope):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.vertices))

    def __repr__(self) -> str:
        return f"LatticePolytope(dim={self.dim}, vertices={list(self.vertices)})"

    def contains(self, u: Sequence) -> bool:
        return all(e.value(u) == 0 for e in self.equations) and all(
            f.value(u) >= 0 for f in self.facets
        )

    @cached_property
    def barycenter(self) -> Tuple[Fraction, ...]:
        return barycenter(self.vertices)

    @cached_property
    def lattice_points(self) -> Tuple[Point, ...]:
        lows = [min(c) for c in zip(*self.vertices)]
        highs = [max(c) for c in zip(*self.vertices)]
        box = product(*(range(lo, hi + 1) for lo, hi in zip(lows, highs)))
        return tuple(sort_points(u for u in box if self.contains(u)))

    @cached_property
    def faces(self) -> Tuple[FaceRef, ...]:
        if self.dim == 0:
            return ()
        facet_sets = [
            frozenset(i for i, v in enumerate(self.vertices) if f.value(v) == 0)
            for f in self.facets
        ]
        found = set(facet_sets)
        frontier = list(found)
        while frontier:
            fresh = []
            for s in frontier:
                for t in facet_sets:
                    inter = s & t
                    if inter and inter not in found:
                        found.add(inter)
                        fresh.append(inter)
            frontier = fresh
        refs = []
        for s in found:
            containing = [f.normal for f, fs in zip(self.facets, facet_sets) if s <= fs]
            witness = tuple(sum(col) for col in zip(*containing))
            idx = tuple(sorted(s))
            dim = affine_dim([self.vertices[i] for i in idx])
            refs.append(FaceRef(self, idx, witness, dim))
        refs.sort(key=lambda f: (f.dim, f.key))
        return tuple(refs)

    @cached_property
    def face_index(self) -> Dict[Tuple[int, ...], FaceRef]:
        return {f.vertex_set: f for f in self.faces}

    @cached_property
    def whole(self) -> FaceRef:
        """The polytope itself as a (non-proper) face."""
        return FaceRef(self, tuple(range(len(self.vertices))), (0,) * self.ambient_dim, self.dim)

    def facet_face(self, facet: Facet) -> FaceRef:
        idx = tuple(i for i, v in enumerate(self.vertices) if facet.value(v) == 0)
        return self.face_index[idx]


def hull(
    points: Iterable[Sequence[int]], n: int, directions: Optional[Sequence[Point]] = None
) -> LatticePolytope:
    """
    Convex hull of a lattice point set in R^n.

    Facets are found by proposing a hyperplane through every affinely
    independent dim-subset of the points and keeping the supporting ones.
    When every edge direction of the hull is known to lie in `directions`,
    the proposals come from (dim-1)-subsets of those directions instead.
    Lower dimensional hulls keep their affine span as equations.
    """
    pts = set()
    for p in points:
        if len(p) != n:
            raise InvalidInput(f"point {tuple(p)} does not have length {n}")
        pts.add(tuple(int(c) for c in p))
    if not pts:
        raise InvalidInput("hull of an empty point set")

    ordered = sort_points(pts)
    base = ordered[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in ordered[1:]]
    dim = rank(diffs)

    equations = []
    for w in nullspace(diffs, n):
        normal = primitive(w)
        equations.append(Facet(normal, -dot(normal, base)))

    if dim == 0:
        return LatticePolytope((base,), n, (), equations, 0)

    eq_normals = [list(e.normal) for e in equations]
    facets: Dict[Point, Facet] = {}
    if directions is not None:
        for rows in combinations([list(d) for d in directions], dim - 1):
            basis = nullspace(list(rows) + eq_normals, n)
            if len(basis) != 1:
                continue
            w = primitive(basis[0])
            values = [dot(w, p) for p in ordered]
            for normal, level in ((w, min(values)), (tuple(-c for c in w), -max(values))):
                if normal in facets:
                    continue
                tight = [p for p in ordered if dot(normal, p) == level]
                if affine_dim(tight) == dim - 1:
                    facets[normal] = Facet(normal, -level)
    else:
        for combo in combinations(ordered, dim):
            q0 = combo[0]
            constraints = [[a - b for a, b in zip(q, q0)] for q in combo[1:]] + eq_normals
            basis = nullspace(constraints, n)
            if len(basis) != 1:
                continue
            w = primitive(basis[0])
            level = dot(w, q0)
            values = [dot(w, p) for p in ordered]
            if min(values) == level:
                facet = Facet(w, -level)
            elif max(values) == level:
                facet = Facet(tuple(-c for c in w), level)
            else:
                continue
            facets[facet.normal] = facet

    vertices = []
    for p in ordered:
        tight = [list(f.normal) for f in facets.values() if f.value(p) == 0]
        if rank(tight + eq_normals) == n:
            vertices.append(p)
    return LatticePolytope(vertices, n, list(facets.values()), equations, dim)


def lattice_points(P: LatticePolytope) -> List[Point]:
    return list(P.lattice_points)


def edge_directions(P: LatticePolytope) -> List[Point]:
    """Primitive edge directions of P, each up to sign."""
    if P.dim == 0:
        return []
    edges = [P.whole] if P.dim == 1 else [f for f in P.faces if f.dim == 1]
    found = set()
    for edge in edges:
        a, b = edge.vertices[0], edge.vertices[-1]
        d = primitive([y - x for x, y in zip(a, b)])
        if next(c for c in d if c != 0) < 0:
            d = tuple(-c for c in d)
        found.add(d)
    return sorted(found)


def minkowski(P: LatticePolytope, Q: LatticePolytope) -> LatticePolytope:
    """Edges of P + Q are parallel to edges of P or of Q."""
    if P.ambient_dim != Q.ambient_dim:
        raise InvalidInput("Minkowski sum of polytopes in different ambient dimensions")
    sums = {tuple(a + b for a, b in zip(p, q)) for p in P.vertices for q in Q.vertices}
    directions = sorted(set(edge_directions(P)) | set(edge_directions(Q)))
    return hull(sums, P.ambient_dim, directions)


def minkowski_sum(polytopes: Sequence[LatticePolytope]) -> LatticePolytope:
    return reduce(minkowski, polytopes)


def face_of(P: LatticePolytope, v: Sequence) -> FaceRef:
    """Face of P on which <., v> attains its minimum."""
    if len(v) != P.ambient_dim or all(c == 0 for c in v):
        raise InvalidInput(f"direction {tuple(v)} is zero or has the wrong length")
    values = [dot(v, u) for u in P.vertices]
    low = min(values)
    idx = tuple(i for i, x in enumerate(values) if x == low)
    return FaceRef(P, idx, tuple(v), affine_dim([P.vertices[i] for i in idx]))


def face_points(P: LatticePolytope, v: Sequence) -> List[Point]:
    """Lattice points of P on the face minimizing <., v>."""
    low = min(dot(v, u) for u in P.vertices)
    return [u for u in P.lattice_points if dot(v, u) == low]


def all_faces(P: LatticePolytope) -> List[FaceRef]:
    if P.dim < 1:
        raise PreconditionViolated("a point has no proper faces")
    return list(P.faces)


def minimal_face(P: LatticePolytope, u: Sequence[int]) -> FaceRef | Interior:
    """Face containing u in its relative interior, or INTERIOR."""
    if not P.contains(u):
        raise InvalidInput(f"{tuple(u)} is not a point of {P!r}")
    tight = [f for f in P.facets if f.value(u) == 0]
    if not tight:
        if P.dim == P.ambient_dim:
            return INTERIOR
        return P.whole
    idx = tuple(
        i for i, v in enumerate(P.vertices) if all(f.value(v) == 0 for f in tight)
    )
    return P.face_index[idx]


def carrier_vertices(P: LatticePolytope, u: Sequence[int]) -> Tuple[Point, ...]:
    """Vertices of the minimal face of P containing u (all vertices if interior)."""
    face = minimal_face(P, u)
    if face is INTERIOR:
        return P.vertices
    return face.vertices


def interior_contains(P: LatticePolytope, u: Sequence) -> bool:
    if P.dim < P.ambient_dim:
        return False
    return all(f.value(u) > 0 for f in P.facets)


def complete_flags(P: LatticePolytope) -> List[Flag]:
    """All chains vertex < edge < ... < facet of a full-dimensional polytope."""
    if P.dim != P.ambient_dim:
        raise PreconditionViolated(f"complete flags need a full-dimensional polytope, got dim {P.dim}")
    by_dim: Dict[int, List[FaceRef]] = {}
    for face in P.faces:
        by_dim.setdefault(face.dim, []).append(face)

    flags: List[Flag] = []

    def descend(chain: List[FaceRef]) -> None:
        top = chain[-1]
        if top.dim == 0:
            flags.append(Flag(tuple(reversed(chain))))
            return
        for face in by_dim.get(top.dim - 1, []):
            if face.is_subface_of(top):
                descend(chain + [face])

    for facet in by_dim.get(P.dim - 1, []):
        descend([facet])
    flags.sort(key=lambda f: f.key)
    return flags


def flag_sign(flag: Flag) -> int:
    """Sign of the frame from the flag's vertex to the barycenters of its faces and of P."""
    P = flag.faces[0].polytope
    origin = flag.faces[0].vertices[0]
    targets = [f.barycenter for f in flag.faces[1:]] + [P.barycenter]
    frame = [[t - o for t, o in zip(target, origin)] for target in targets]
    s = sign(determinant(frame))
    if s == 0:
        raise InternalError(f"degenerate frame for flag {flag.key}")
    return s


@dataclass(frozen=True)
class EssentialityReport:
    essential: bool
    witness: Optional[Tuple[int, ...]] = None
    dims: Mapping[Tuple[int, ...], int] = field(default_factory=dict, compare=False)


class PolytopeFamily:
    """
    The n+1 polytopes P_0..P_n in R^n, with coefficient names for their
    lattice points and, optionally, an explicit support per member (lattice
    points missing from the support carry coefficient zero).
    """

    def __init__(
        self,
        members: Sequence[LatticePolytope],
        names: Optional[Sequence[Mapping[Point, str]]] = None,
        supports: Optional[Sequence[Optional[Iterable[Point]]]] = None,
    ):
        if len(members) < 2:
            raise InvalidInput("a family needs at least two polytopes")
        n = len(members) - 1
        for i, P in enumerate(members):
            if P.ambient_dim != n:
                raise InvalidInput(
                    f"polytope {i} lives in dimension {P.ambient_dim}, expected {n} for {n + 1} polytopes"
                )
        self.ambient_dim = n
        self.members: Tuple[LatticePolytope, ...] = tuple(members)
        self.supports: Tuple[Optional[frozenset], ...] = tuple(
            frozenset(s) if s is not None else None
            for s in (supports or [None] * len(members))
        )
        self._names: List[Dict[Point, str]] = []
        for i, P in enumerate(self.members):
            given = dict((names[i] if names else {}) or {})
            for u in given:
                if not P.contains(u):
                    raise InvalidInput(f"coefficient name {given[u]!r} refers to {u}, outside polytope {i}")
            table = {u: given.get(u, default_name(i, k)) for k, u in enumerate(P.lattice_points)}
            self._names.append(table)

    @property
    def n(self) -> int:
        return self.ambient_dim

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i: int) -> LatticePolytope:
        return self.members[i]

    @cached_property
    def total(self) -> LatticePolytope:
        return minkowski_sum(self.members)

    def points(self, i: int) -> Tuple[Point, ...]:
        return self.members[i].lattice_points

    def coefficient_name(self, i: int, u: Point) -> str:
        return self._names[i][u]

    def has_coefficient(self, i: int, u: Point) -> bool:
        support = self.supports[i]
        return support is None or u in support

    def summand_faces(self, face: FaceRef) -> List[FaceRef]:
        """Minkowski decomposition of a face of the total polytope."""
        return [face_of(P, face.witness) for P in self.members]


def default_name(i: int, k: int) -> str:
    letter = COEFFICIENT_LETTERS[i] if i < len(COEFFICIENT_LETTERS) else f"p{i}_"
    return f"{letter}{k}"


def is_essential(family: PolytopeFamily) -> EssentialityReport:
    """Every proper subfamily of size k must sum to dimension at least k."""
    count = len(family)
    directions = []
    for P in family.members:
        base = P.vertices[0]
        directions.append([[a - b for a, b in zip(v, base)] for v in P.vertices[1:]])
    dims: Dict[Tuple[int, ...], int] = {}
    for size in range(1, count):
        for subset in combinations(range(count), size):
            rows = [row for i in subset for row in directions[i]]
            dims[subset] = rank(rows)
            if dims[subset] < size:
                logger.info(f"Family is not essential: subset {subset} sums to dimension {dims[subset]}")
                return EssentialityReport(False, subset, dims)
    return EssentialityReport(True, None, dims)


def facet_summand_interior(
    P: LatticePolytope, Q: LatticePolytope, facet: FaceRef, u: Point, u2: Point
) -> bool:
    """
    For u in the relative interior of a facet of P and u2 in Q off the face
    of Q selected by that facet's normal, report whether u + u2 is interior
    to P + Q.
    """
    if facet.dim != P.dim - 1 or minimal_face(P, u) != facet:
        raise PreconditionViolated(f"{u} is not in the relative interior of the given facet")
    if not Q.contains(u2) or u2 in face_points(Q, facet.witness):
        raise PreconditionViolated(f"{u2} must lie in Q off the matched face")
    return interior_contains(minkowski(P, Q), tuple(a + b for a, b in zip(u, u2)))
