"""
Combinatorial degree of face colorings.

A simplicial coloring of the faces of P induces a piecewise linear map from
the boundary of P to the boundary of the standard simplex
Delta = {y >= 0, sum y = 1} in R^{n+1}. The map lives on the second barycentric
subdivision of the boundary: its vertices are the barycenters b(G) of flags G
(averages of face barycenters), and b(G) goes to the anchor point q_U of the
face Delta_U = {y_j = 0 for j in U}, U the union of the colors along G. The
degree is counted exactly at a random rational point of the facet y_0 = 0.

Orientation conventions:
  * a boundary simplex x_0..x_{n-1} of P is signed by det(x_1-x_0, ..., x_{n-1}-x_0, c_P - x_0),
    c_P the barycenter of P;
  * a boundary simplex w_0..w_{n-1} of Delta is signed by
    det(w_1-w_0, ..., w_{n-1}-w_0, c_Delta - w_0, (1, ..., 1)), normalized so that the chamber
    q_{1..n}, q_{2..n}, ..., q_{n} (vertex e_0 first) is positive.
With these, the locally unmixed partition of three unit triangles has degree +1.
"""
import logging
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import FrozenSet, List, Optional, Sequence, Tuple

from app.config import settings
from app.errors import DegeneracyError, InternalError, PreconditionViolated
from app.services.coloring_engine import (
    FaceColoring,
    Flavor,
    face_coloring,
    flag_colors,
    is_simplicial,
)
from app.services.exact import determinant, sign, solve
from app.services.polytope_core import (
    Flag,
    LatticePolytope,
    complete_flags,
    flag_sign,
)

logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, ...]


class AnchorScheme(str, Enum):
    """Where each face Delta_J of the target simplex is anchored"""
    BARYCENTER = "barycenter"
    SKEWED = "skewed"


@dataclass(frozen=True)
class OrientedSimplex:
    flag: Flag
    vertices: Tuple[Vector, ...]
    orientation: int


@lru_cache(maxsize=None)
def anchor(J: FrozenSet[int], n: int, scheme: AnchorScheme = AnchorScheme.BARYCENTER) -> Vector:
    """Interior point of Delta_J; the skewed scheme weights the free coordinates 1, 2, 3, ..."""
    free = [k for k in range(n + 1) if k not in J]
    if scheme == AnchorScheme.BARYCENTER:
        weights = [1] * len(free)
    else:
        weights = [r + 1 for r in range(len(free))]
    total = sum(weights)
    y = [Fraction(0)] * (n + 1)
    for k, w in zip(free, weights):
        y[k] = Fraction(w, total)
    return tuple(y)


def _diff(a: Sequence, b: Sequence) -> List:
    return [x - y for x, y in zip(a, b)]


def bsd_complex(P: LatticePolytope) -> List[OrientedSimplex]:
    """One simplex per complete flag, signed against the outward facet normal."""
    simplices = []
    for flag in complete_flags(P):
        points = tuple(f.barycenter for f in flag.faces)
        outward = [-c for c in flag.faces[-1].witness]
        frame = [_diff(x, points[0]) for x in points[1:]] + [outward]
        orientation = sign(determinant(frame))
        if orientation == 0:
            raise InternalError(f"degenerate barycentric simplex for flag {flag.key}")
        simplices.append(OrientedSimplex(flag, points, orientation))
    return simplices


def _source_sign(points: Sequence[Vector], center: Vector) -> int:
    frame = [_diff(x, points[0]) for x in points[1:]] + [_diff(center, points[0])]
    return sign(determinant(frame))


def _target_raw(points: Sequence[Vector], n: int) -> int:
    center = (Fraction(1, n + 1),) * (n + 1)
    frame = (
        [_diff(w, points[0]) for w in points[1:]]
        + [_diff(center, points[0])]
        + [[1] * (n + 1)]
    )
    return sign(determinant(frame))


@lru_cache(maxsize=None)
def _chamber_sign(n: int) -> int:
    chamber = [anchor(frozenset(range(k + 1, n + 1)), n) for k in range(n)]
    return _target_raw(chamber, n)


@dataclass(frozen=True)
class _Piece:
    colors: Tuple[FrozenSet[int], ...]
    orientation: int


def _pieces(fc: FaceColoring) -> List[_Piece]:
    """Top simplices of the second subdivision: a complete flag plus an order of its faces."""
    P = fc.polytope
    n = fc.n
    pieces = []
    for flag in complete_flags(P):
        centers = [f.barycenter for f in flag.faces]
        for order in permutations(range(n)):
            points, colors = [], []
            running: FrozenSet[int] = frozenset()
            for k in range(n):
                chosen = [centers[m] for m in order[: k + 1]]
                points.append(tuple(sum(c) / (k + 1) for c in zip(*chosen)))
                running = running | fc[flag.faces[order[k]]]
                colors.append(running)
            orientation = _source_sign(points, P.barycenter)
            if orientation == 0:
                raise InternalError(f"degenerate subdivision simplex in flag {flag.key}")
            pieces.append(_Piece(tuple(colors), orientation))
    return pieces


def _sample_point(rng: random.Random, n: int, spread: int) -> Vector:
    weights = [rng.randint(1, spread) for _ in range(n)]
    total = sum(weights)
    return (Fraction(0),) + tuple(Fraction(w, total) for w in weights)


def _barycentric(points: Sequence[Vector], p: Vector) -> Optional[List[Fraction]]:
    """Affine coordinates of p in the span of independent points, None otherwise."""
    rows = [[w[j] for w in points] for j in range(1, len(p))] + [[1] * len(points)]
    return solve(rows, list(p[1:]) + [1])


def _on_skeleton(images: Sequence[Vector], p: Vector, n: int) -> bool:
    for size in range(1, n):
        for subset in combinations(images, size):
            coords = _barycentric(subset, p)
            if coords is not None and all(c >= 0 for c in coords):
                return True
    return False


def pl_degree(
    fc: FaceColoring,
    P: Optional[LatticePolytope] = None,
    anchors: AnchorScheme = AnchorScheme.BARYCENTER,
    seed: Optional[int] = None,
    max_retries: Optional[int] = None,
) -> int:
    """
    Topological degree of the piecewise linear map of a simplicial coloring.

    Args:
        fc: face coloring of the boundary of P
        P: the polytope (defaults to fc.polytope)
        anchors: anchor scheme for the target faces
        seed: seed of the generic point sequence

    Returns:
        the signed number of preimages of a generic point of the facet y_0 = 0
    """
    if P is not None and P != fc.polytope:
        raise PreconditionViolated("coloring belongs to a different polytope")
    report = is_simplicial(fc)
    if not report:
        raise PreconditionViolated(
            f"coloring is not simplicial along flag {report.witness.key}", witness=report.witness
        )
    n = fc.n
    seed = settings.RESKIT_SEED if seed is None else seed
    max_retries = max_retries or settings.RESKIT_DEGREE_RETRIES
    chamber = _chamber_sign(n)

    relevant = [
        (piece.orientation, [anchor(U, n, anchors) for U in piece.colors])
        for piece in _pieces(fc)
        if 0 in piece.colors[0]
    ]
    images = sorted({w for _, ws in relevant for w in ws})

    for attempt in range(max_retries):
        rng = random.Random(seed * 1_000_003 + attempt)
        p = _sample_point(rng, n, settings.RESKIT_POINT_DENOMINATOR)
        if _on_skeleton(images, p, n):
            logger.warning(f"generic point {p} hit a lower-dimensional image, resampling")
            continue
        degree = 0
        degenerate = False
        for orientation, ws in relevant:
            coords = _barycentric(ws, p)
            if coords is None or any(c < 0 for c in coords):
                continue
            if any(c == 0 for c in coords):
                degenerate = True
                break
            degree += orientation * chamber * _target_raw(ws, n)
        if degenerate:
            logger.warning(f"generic point {p} hit an image boundary, resampling")
            continue
        logger.debug(f"pl_degree = {degree} at point {p}")
        return degree
    raise DegeneracyError(f"no generic point found in {max_retries} attempts")


def permutation_sign(eps: Sequence[int]) -> int:
    inversions = sum(1 for a, b in combinations(range(len(eps)), 2) if eps[a] > eps[b])
    return -1 if inversions % 2 else 1


def signed_flag_count(P: LatticePolytope, fc: FaceColoring, eps: Sequence[int]) -> int:
    """
    sign(eps) times the signed number of complete flags whose (k-1)-face is
    colored exactly {eps(k), ..., eps(n)} for every k.
    """
    faces = list(fc.colors)
    for small in faces:
        for big in faces:
            if small != big and small.is_subface_of(big) and not fc[big] <= fc[small]:
                raise PreconditionViolated(
                    f"coloring is not monotone: {small.key} inside {big.key}", witness=(small, big)
                )
    if not is_simplicial(fc):
        raise PreconditionViolated("coloring is not simplicial")
    n = fc.n
    total = 0
    for flag in complete_flags(P):
        if all(fc[flag.faces[k - 1]] == frozenset(eps[k:]) for k in range(1, n + 1)):
            total += flag_sign(flag)
    return permutation_sign(eps) * total


def unique_colored_flag_check(fc: FaceColoring, eps: Sequence[int]) -> int:
    """Count chains G_1 < ... < G_n of flags with union of colors over G_k = {eps(n-k+1), ..., eps(n)}."""
    n = fc.n
    targets = [frozenset(eps[n - k + 1:]) for k in range(1, n + 1)]
    count = 0
    for flag in complete_flags(fc.polytope):
        for order in permutations(flag.faces):
            if all(flag_colors(fc, order[:k]) == targets[k - 1] for k in range(1, n + 1)):
                count += 1
    return count


@dataclass(frozen=True)
class DegreeReport:
    degree: int
    min_degree: int
    second_point_degree: int
    max_coloring: FaceColoring
    min_coloring: FaceColoring


def degree_report(M, seed: Optional[int] = None, jobs: Optional[int] = None) -> DegreeReport:
    seed = settings.RESKIT_SEED if seed is None else seed
    fc_max = face_coloring(M, Flavor.MAX, jobs)
    fc_min = face_coloring(M, Flavor.MIN, jobs)
    degree = pl_degree(fc_max, seed=seed)
    second = pl_degree(fc_max, seed=seed + 1)
    low = pl_degree(fc_min, seed=seed)
    if not degree == second == low:
        raise InternalError(
            f"degree disagreement: max={degree}, max at second point={second}, min={low}"
        )
    logger.info(f"combinatorial degree {degree}")
    return DegreeReport(degree, low, second, fc_max, fc_min)


def cdeg(M, seed: Optional[int] = None, jobs: Optional[int] = None) -> int:
    """Combinatorial degree of the maximal canonical coloring of a compatible partition."""
    return degree_report(M, seed, jobs).degree
