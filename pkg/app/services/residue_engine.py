"""
Residue matrices and the certified residue element.

Laurent polynomials here have symbolic coefficients: every coefficient is an
integer combination of products of coefficient symbols c_u, one symbol per
lattice point u of a polytope P_i. The residue matrix of a partition matrix M
has entry (i, j) = sum of c_u t^u over u in cell (i, j); its determinant h is
the residue element, and the combinatorial degree of M is its certified
toric residue.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import sympy

from app.errors import DegeneracyError, InternalError, InvalidInput, NonEssential, VerificationFailed
from app.services.coloring_engine import Flavor, face_coloring, is_simplicial
from app.services.degree_engine import DegreeReport, degree_report, unique_colored_flag_check
from app.services.partition_engine import (
    PartitionMatrix,
    compatibility_bruteforce,
    compatibility_by_faces,
    partition_problems,
)
from app.services.polytope_core import (
    Facet,
    LatticePolytope,
    Point,
    PolytopeFamily,
    interior_contains,
    is_essential,
    point_key,
    sort_points,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Symbol:
    """Coefficient of the lattice point `point` in the polynomial of polytope `index`."""

    index: int
    key: tuple
    point: Point = field(compare=False)
    name: str = field(compare=False)

    def __str__(self) -> str:
        return self.name


Monomial = Tuple[Symbol, ...]


def variable_names(n: int) -> List[str]:
    if n == 1:
        return ["t"]
    if n <= 4:
        return list("xyzw"[:n])
    return [f"t{k}" for k in range(1, n + 1)]


def _variable_part(exp: Sequence[int], variables: Sequence[str]) -> List[str]:
    parts = []
    for name, e in zip(variables, exp):
        if e == 1:
            parts.append(name)
        elif e != 0:
            parts.append(f"{name}^{e}")
    return parts


def _term_body(scalar: int, factors: List[str]) -> str:
    magnitude = abs(scalar)
    if not factors:
        return str(magnitude)
    if magnitude != 1:
        return "*".join([str(magnitude)] + factors)
    return "*".join(factors)


def _join_signed(bodies: List[Tuple[int, str]]) -> str:
    if not bodies:
        return "0"
    first_sign, first = bodies[0]
    text = ("-" if first_sign < 0 else "") + first
    for s, body in bodies[1:]:
        text += (" - " if s < 0 else " + ") + body
    return text


def coefficient_text(coeffs: Mapping[Monomial, int]) -> str:
    """Integer combination of coefficient monomials, e.g. 'a0*b1 - a1*b0'."""
    return _join_signed([(c, _term_body(c, [s.name for s in m])) for m, c in sorted(coeffs.items())])


class LaurentPoly:
    """Exponent -> {coefficient monomial -> integer}; zero entries are never stored."""

    def __init__(self, n: int, terms: Optional[Mapping[Point, Mapping[Monomial, int]]] = None):
        self.n = n
        self.terms: Dict[Point, Dict[Monomial, int]] = {}
        for exp, coeffs in (terms or {}).items():
            kept = {m: c for m, c in coeffs.items() if c != 0}
            if kept:
                self.terms[tuple(exp)] = kept

    @classmethod
    def zero(cls, n: int) -> "LaurentPoly":
        return cls(n)

    @classmethod
    def one(cls, n: int) -> "LaurentPoly":
        return cls(n, {(0,) * n: {(): 1}})

    @classmethod
    def monomial(cls, exp: Point, symbols: Sequence[Symbol] = (), scalar: int = 1) -> "LaurentPoly":
        return cls(len(exp), {tuple(exp): {tuple(sorted(symbols)): scalar}})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.canonical_terms()))

    def _combine(self, other: "LaurentPoly", factor: int) -> "LaurentPoly":
        merged: Dict[Point, Dict[Monomial, int]] = {e: dict(c) for e, c in self.terms.items()}
        for exp, coeffs in other.terms.items():
            bucket = merged.setdefault(exp, {})
            for m, c in coeffs.items():
                bucket[m] = bucket.get(m, 0) + factor * c
        return LaurentPoly(self.n, merged)

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self._combine(other, 1)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self._combine(other, -1)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly.zero(self.n) - self

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        product: Dict[Point, Dict[Monomial, int]] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                bucket = product.setdefault(exp, {})
                for m1, s1 in c1.items():
                    for m2, s2 in c2.items():
                        m = tuple(sorted(m1 + m2))
                        bucket[m] = bucket.get(m, 0) + s1 * s2
        return LaurentPoly(self.n, product)

    def support(self) -> List[Point]:
        return sort_points(self.terms)

    def canonical_terms(self) -> List[Tuple[Point, Monomial, int]]:
        """(exponent, coefficient monomial, scalar) in output order."""
        return [
            (exp, m, self.terms[exp][m])
            for exp in self.support()
            for m in sorted(self.terms[exp])
        ]

    def specialize(self, values: Mapping[str, int]) -> Dict[Point, int]:
        """Substitute integers for the coefficient symbols (by name)."""
        result: Dict[Point, int] = {}
        for exp, m, scalar in self.canonical_terms():
            value = scalar
            for s in m:
                value *= values[s.name]
            result[exp] = result.get(exp, 0) + value
        return {e: v for e, v in result.items() if v != 0}

    def to_text(self, variables: Optional[Sequence[str]] = None, grouped: bool = False) -> str:
        variables = variables or variable_names(self.n)
        if not grouped:
            return _join_signed([
                (scalar, _term_body(scalar, [s.name for s in m] + _variable_part(exp, variables)))
                for exp, m, scalar in self.canonical_terms()
            ])
        bodies = []
        for exp in self.support():
            coeffs = sorted(self.terms[exp].items())
            var_part = _variable_part(exp, variables)
            if len(coeffs) == 1:
                m, scalar = coeffs[0]
                bodies.append((scalar, _term_body(scalar, [s.name for s in m] + var_part)))
                continue
            inner = coefficient_text(self.terms[exp])
            bodies.append((1, "*".join([f"({inner})"] + var_part)))
        return _join_signed(bodies)

    def __repr__(self) -> str:
        return f"LaurentPoly({self.to_text()})"


@dataclass(frozen=True)
class ResidueMatrix:
    entries: Tuple[Tuple[LaurentPoly, ...], ...]
    partition: PartitionMatrix

    def to_text(self) -> List[List[str]]:
        return [[entry.to_text() for entry in row] for row in self.entries]


def coefficient_symbol(family: PolytopeFamily, i: int, u: Point) -> Symbol:
    return Symbol(i, point_key(u), u, family.coefficient_name(i, u))


def residue_matrix(
    M: PartitionMatrix, names: Optional[Sequence[Mapping[Point, str]]] = None
) -> ResidueMatrix:
    """
    Entry (i, j) is the sum of c_u t^u over the cell (i, j).

    Args:
        names: optional per-polytope overrides of the coefficient names
    """
    family = M.family
    n = family.n
    rows = []
    for i, P in enumerate(family.members):
        override = dict(names[i]) if names else {}
        for u, name in override.items():
            if not P.contains(u):
                raise InvalidInput(f"coefficient {name!r} names {u}, outside polytope {i}")
        row = []
        for cell in M.cells[i]:
            entry = LaurentPoly.zero(n)
            for u in sort_points(cell):
                if not family.has_coefficient(i, u):
                    continue
                symbol = coefficient_symbol(family, i, u)
                if u in override:
                    symbol = Symbol(i, symbol.key, u, override[u])
                entry = entry + LaurentPoly.monomial(u, (symbol,))
            row.append(entry)
        rows.append(tuple(row))
    return ResidueMatrix(tuple(rows), M)


def _sympy_entry(
    entry: LaurentPoly,
    variables: Sequence[sympy.Symbol],
    generators: Mapping[Symbol, sympy.Symbol],
    shift: Point,
) -> sympy.Expr:
    expr = sympy.Integer(0)
    for exp, m, scalar in entry.canonical_terms():
        term = sympy.Integer(scalar)
        for s in m:
            term *= generators[s]
        for v, e, low in zip(variables, exp, shift):
            term *= v ** (e - low)
        expr += term
    return expr


def determinant(R: ResidueMatrix) -> LaurentPoly:
    """
    Berkowitz determinant of the residue matrix, computed by sympy.

    Row i is divided by t^s_i, s_i the coordinatewise minimum over P_i, so
    sympy only sees polynomials; the product of the t^s_i is restored on the way back.
    """
    family = R.partition.family
    n = family.n
    variables = [sympy.Symbol(f"v{k}") for k in range(n)]
    symbols = sorted({s for row in R.entries for entry in row for _, m, _ in entry.canonical_terms() for s in m})
    generators = {s: sympy.Symbol(f"s{k}") for k, s in enumerate(symbols)}
    shifts = [tuple(min(c) for c in zip(*P.vertices)) for P in family.members]
    total_shift = tuple(sum(c) for c in zip(*shifts))

    matrix = sympy.Matrix([
        [_sympy_entry(entry, variables, generators, shift) for entry in row]
        for row, shift in zip(R.entries, shifts)
    ])
    det = sympy.expand(matrix.det(method="berkowitz"))
    if det == 0:
        return LaurentPoly.zero(n)

    terms: Dict[Point, Dict[Monomial, int]] = {}
    for powers, coeff in sympy.Poly(det, *variables, *generators.values()).terms():
        exp = tuple(e + low for e, low in zip(powers[:n], total_shift))
        m = tuple(sorted(s for s, p in zip(symbols, powers[n:]) for _ in range(p)))
        bucket = terms.setdefault(exp, {})
        bucket[m] = bucket.get(m, 0) + int(coeff)
    return LaurentPoly(n, terms)


@dataclass(frozen=True)
class SupportReport:
    interior: bool
    support: Tuple[Point, ...]
    witness: Optional[Point] = None

    def __bool__(self) -> bool:
        return self.interior


def check_interior_support(h: LaurentPoly, P: LatticePolytope) -> SupportReport:
    support = tuple(h.support())
    for exp in support:
        if not interior_contains(P, exp):
            return SupportReport(False, support, exp)
    return SupportReport(True, support)


@dataclass(frozen=True)
class HomogenizedElement:
    """Facet-indexed exponents <u, v_rho> + a_rho of every monomial, plus the quotient by all x_rho."""

    facets: Tuple[Facet, ...]
    terms: Dict[Tuple[int, ...], Dict[Monomial, int]]
    quotient: Optional[Dict[Tuple[int, ...], Dict[Monomial, int]]]


def homogenize(h: LaurentPoly, P: LatticePolytope) -> HomogenizedElement:
    """
    Returns:
        the homogenized exponents over the facets of P, and (when every
        exponent is positive) the same element divided by the product of
        all facet variables
    """
    terms: Dict[Tuple[int, ...], Dict[Monomial, int]] = {}
    for exp in h.support():
        if not P.contains(exp):
            raise InvalidInput(f"monomial exponent {exp} lies outside the polytope")
        key = tuple(f.value(exp) for f in P.facets)
        terms[key] = dict(h.terms[exp])
    quotient = None
    if all(min(key) >= 1 for key in terms):
        quotient = {tuple(x - 1 for x in key): coeffs for key, coeffs in terms.items()}
    return HomogenizedElement(P.facets, terms, quotient)


@dataclass(frozen=True)
class CheckResult:
    name: str
    clause: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationLedger:
    checks: List[CheckResult]
    element: Optional[LaurentPoly] = None
    degree: Optional[DegreeReport] = None
    support: Optional[SupportReport] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[CheckResult]:
        return next((c for c in self.checks if not c.passed), None)


def verify(M: PartitionMatrix, seed: Optional[int] = None, jobs: Optional[int] = None) -> VerificationLedger:
    """Run every check a residue certificate relies on and record the outcome of each."""
    checks: List[CheckResult] = []
    ledger = VerificationLedger(checks)

    problems = partition_problems(M)
    checks.append(CheckResult(
        "partition",
        "rows partition the lattice points; each point shares a cell with a vertex of its minimal face",
        not problems,
        problems[0] if problems else "",
    ))
    if problems:
        return ledger

    by_faces = compatibility_by_faces(M, jobs)
    checks.append(CheckResult(
        "compatibility_by_faces",
        "every coloring matrix of a proper face has permanent zero",
        by_faces.compatible,
        "" if by_faces else by_faces.describe(),
    ))
    brute = compatibility_bruteforce(M, jobs=jobs)
    checks.append(CheckResult(
        "compatibility_bruteforce",
        "every transversal sum over a permutation lies in the interior of the sum polytope",
        brute.compatible,
        "" if brute else brute.describe(),
    ))
    if by_faces.compatible != brute.compatible:
        raise InternalError("compatibility oracles disagree", witness=(by_faces, brute))
    if not by_faces:
        return ledger

    colorings = {flavor: face_coloring(M, flavor, jobs) for flavor in (Flavor.MAX, Flavor.MIN)}
    for flavor, coloring in colorings.items():
        simplicial = is_simplicial(coloring)
        checks.append(CheckResult(
            f"simplicial_{flavor.value}",
            f"no flag accumulates all colors under the {flavor.value} canonical coloring",
            simplicial.simplicial,
            "" if simplicial else f"flag {simplicial.witness.key} carries every color",
        ))
    if not all(c.passed for c in checks):
        return ledger

    try:
        report = degree_report(M, seed, jobs)
    except DegeneracyError:
        raise
    except InternalError as e:
        checks.append(CheckResult(
            "degree_agreement",
            "max and min canonical colorings have the same degree, at two generic points",
            False,
            e.message,
        ))
        return ledger
    ledger.degree = report
    checks.append(CheckResult(
        "degree_agreement",
        "max and min canonical colorings have the same degree, at two generic points",
        True,
        f"cdeg = {report.degree}",
    ))

    h = determinant(residue_matrix(M))
    ledger.element = h
    support = check_interior_support(h, M.family.total)
    ledger.support = support
    checks.append(CheckResult(
        "interior_support",
        "every monomial of the determinant is interior to the sum polytope",
        support.interior,
        "" if support else f"exponent {list(support.witness)} is on the boundary",
    ))
    return ledger


@dataclass
class ResidueCertificate:
    element: LaurentPoly
    degree: int
    partition: PartitionMatrix
    matrix: ResidueMatrix
    checks: List[CheckResult]
    strategy: str
    degree_report: DegreeReport
    case: Optional[str] = None
    unique_chains: Optional[int] = None
    homogenized: Optional[HomogenizedElement] = None

    @property
    def vanishing(self) -> bool:
        return self.degree == 0


def essential_or_raise(family: PolytopeFamily) -> None:
    report = is_essential(family)
    if not report.essential:
        subset = list(report.witness)
        raise NonEssential(
            f"family is not essential: polytopes {subset} sum to dimension "
            f"{report.dims[report.witness]} < {len(subset)}; the residue of every element "
            "vanishes identically exactly when the family is not essential",
            witness=report.witness,
        )


def residue_element(
    family: PolytopeFamily,
    strategy: str = "auto",
    partition: Optional[PartitionMatrix] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
    homogenized: bool = False,
) -> ResidueCertificate:
    """
    Build, verify and package a residue element for an essential family.

    Args:
        strategy: construction strategy when no partition is supplied
        partition: a user supplied partition matrix (verified, never repaired)
        homogenized: also attach the facet-indexed exponents

    Returns:
        ResidueCertificate; a zero degree is a vanishing certificate
    """
    from app.services.construction_engine import build_partition

    essential_or_raise(family)
    case = None
    if partition is None:
        construction = build_partition(family, strategy, seed=seed, jobs=jobs)
        M, used, case = construction.partition, construction.strategy, construction.case
    else:
        M, used = partition, "supplied"

    ledger = verify(M, seed, jobs)
    if not ledger.passed:
        failure = ledger.first_failure()
        message = f"check {failure.name} failed: {failure.detail}"
        if partition is not None:
            raise VerificationFailed(message, witness=ledger)
        raise InternalError(f"constructed partition ({used}) failed verification: {message}", witness=ledger)

    matrix = residue_matrix(M)
    degree = ledger.degree.degree
    chains = unique_colored_flag_check(ledger.degree.max_coloring, tuple(range(family.n + 1)))
    if degree == 0:
        logger.warning("vanishing certificate: cdeg = 0, the element is not useful")
    else:
        logger.info(f"certified residue element with cdeg = {degree} via {used}")
    return ResidueCertificate(
        element=ledger.element,
        degree=degree,
        partition=M,
        matrix=matrix,
        checks=ledger.checks,
        strategy=used,
        degree_report=ledger.degree,
        case=case,
        unique_chains=chains,
        homogenized=homogenize(ledger.element, family.total) if homogenized else None,
    )
