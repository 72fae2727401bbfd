"""
Problem file parsing, canonical JSON documents and the command implementations
shared by the CLI and the HTTP routes.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ValidationError

from app.errors import InvalidInput, VerificationFailed
from app.models.problem import (
    CdegResponse,
    CertificateFile,
    CheckEntry,
    DegreeEntry,
    EssentialReport,
    FaceColoringEntry,
    HomogenizedBlock,
    HomogenizedTerm,
    PartitionFile,
    ProblemFile,
    VerifyReport,
)
from app.services.construction_engine import Construction, build_partition
from app.services.degree_engine import degree_report, unique_colored_flag_check
from app.services.partition_engine import PartitionMatrix, validate
from app.services.polytope_core import PolytopeFamily, hull, is_essential
from app.services.residue_engine import (
    CheckResult,
    HomogenizedElement,
    ResidueCertificate,
    coefficient_text,
    essential_or_raise,
    residue_element,
    verify,
)

logger = logging.getLogger(__name__)


def dump(document: BaseModel) -> str:
    """Canonical text of a document: stable key order, two-space indent, trailing newline."""
    return json.dumps(document.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"


def _parse(model, data: Union[str, bytes, Dict[str, Any]], what: str):
    try:
        if isinstance(data, (str, bytes)):
            return model.model_validate_json(data)
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "<root>"
        raise InvalidInput(f"malformed {what}: {where}: {first['msg']}", witness=e.errors())


def _read(path: Union[str, Path]) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e.strerror}")


def load_problem(data: Union[str, bytes, Dict[str, Any]]) -> ProblemFile:
    return _parse(ProblemFile, data, "problem file")


def read_problem(path: Union[str, Path]) -> ProblemFile:
    return load_problem(_read(path))


def load_partition_cells(data: Union[str, bytes, Dict[str, Any]]) -> List:
    """Cells from a partition file, or from the partition block of a certificate."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise InvalidInput(f"malformed partition file: {e.msg} at line {e.lineno}")
    if isinstance(data, dict) and "determinant" in data:
        return _parse(CertificateFile, data, "certificate file").partition.cells
    return _parse(PartitionFile, data, "partition file").cells


def read_partition_cells(path: Union[str, Path]) -> List:
    return load_partition_cells(_read(path))


def family_from_problem(problem: ProblemFile) -> PolytopeFamily:
    """
    Points form: the hull of the points, every lattice point carries a coefficient.
    Terms form: the Newton polytope of the terms; lattice points without a term carry zero.
    """
    n = problem.ambient_dim
    members, names, supports = [], [], []
    for i, spec in enumerate(problem.polytopes):
        if spec.points is not None:
            members.append(hull(spec.points, n))
            names.append({})
            supports.append(None)
            continue
        exps = [tuple(t.exp) for t in spec.terms]
        if len(set(exps)) != len(exps):
            raise InvalidInput(f"polytope {i} repeats an exponent")
        members.append(hull(exps, n))
        names.append({tuple(t.exp): t.coeff for t in spec.terms if t.coeff})
        supports.append(exps)
    return PolytopeFamily(members, names, supports)


def partition_from_cells(family: PolytopeFamily, cells: List) -> PartitionMatrix:
    for row in cells:
        for cell in row:
            for u in cell:
                if len(u) != family.n:
                    raise InvalidInput(f"partition point {u} does not have length {family.n}")
    return PartitionMatrix(family, cells)


def partition_document(M: PartitionMatrix, strategy: str, case: Optional[str] = None) -> PartitionFile:
    return PartitionFile(ambient_dim=M.family.n, strategy=strategy, case=case, cells=M.as_lists())


def _check_entries(checks: List[CheckResult]) -> List[CheckEntry]:
    return [CheckEntry(name=c.name, clause=c.clause, passed=c.passed, detail=c.detail) for c in checks]


def _homogenized_block(element: HomogenizedElement) -> HomogenizedBlock:
    def terms(table) -> List[HomogenizedTerm]:
        return [
            HomogenizedTerm(exponents=list(key), coefficient=coefficient_text(coeffs))
            for key, coeffs in table.items()
        ]

    return HomogenizedBlock(
        facet_normals=[list(f.normal) for f in element.facets],
        facet_offsets=[f.offset for f in element.facets],
        terms=terms(element.terms),
        quotient=terms(element.quotient) if element.quotient is not None else None,
    )


def certificate_document(cert: ResidueCertificate) -> CertificateFile:
    report = cert.degree_report
    colorings = [
        FaceColoringEntry(
            vertices=[list(v) for v in face.vertices],
            dim=face.dim,
            max_coloring=sorted(report.max_coloring[face]),
            min_coloring=sorted(report.min_coloring[face]),
        )
        for face in report.max_coloring.polytope.faces
    ]
    return CertificateFile(
        ambient_dim=cert.partition.family.n,
        strategy=cert.strategy,
        case=cert.case,
        status="vanishing" if cert.vanishing else "certified",
        partition=partition_document(cert.partition, cert.strategy, cert.case),
        residue_matrix=cert.matrix.to_text(),
        colorings=colorings,
        degree=DegreeEntry(
            cdeg=cert.degree,
            min_flavor=report.min_degree,
            second_point=report.second_point_degree,
            unique_chains=cert.unique_chains,
        ),
        determinant=cert.element.to_text(),
        determinant_grouped=cert.element.to_text(grouped=True),
        support=[list(u) for u in cert.element.support()],
        homogenized=_homogenized_block(cert.homogenized) if cert.homogenized else None,
        checks=_check_entries(cert.checks),
    )


def essential_report(family: PolytopeFamily) -> EssentialReport:
    report = is_essential(family)
    if report.essential:
        return EssentialReport(essential=True, message="family is essential")
    return EssentialReport(
        essential=False,
        witness=list(report.witness),
        dimension=report.dims[report.witness],
        message=(
            f"polytopes {list(report.witness)} sum to dimension {report.dims[report.witness]}; "
            "the toric residue vanishes identically exactly when the family is not essential"
        ),
    )


def run_partition(
    problem: ProblemFile, strategy: str = "auto", seed: Optional[int] = None, jobs: Optional[int] = None
) -> PartitionFile:
    family = family_from_problem(problem)
    essential_or_raise(family)
    construction: Construction = build_partition(family, strategy, seed=seed, jobs=jobs)
    return partition_document(construction.partition, construction.strategy, construction.case)


def run_cdeg(
    problem: ProblemFile,
    strategy: str = "auto",
    cells: Optional[List] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
) -> CdegResponse:
    family = family_from_problem(problem)
    essential_or_raise(family)
    cells = cells if cells is not None else problem.partition
    if cells is not None:
        M, used, case = partition_from_cells(family, cells), "supplied", None
        report = validate(M, jobs)
        if not report:
            raise VerificationFailed(f"supplied partition is not valid: {report.diagnostics[0]}", witness=report)
    else:
        construction = build_partition(family, strategy, seed=seed, jobs=jobs)
        M, used, case = construction.partition, construction.strategy, construction.case
    report = degree_report(M, seed, jobs)
    chains = unique_colored_flag_check(report.max_coloring, tuple(range(family.n + 1)))
    return CdegResponse(
        cdeg=report.degree, min_flavor=report.min_degree, unique_chains=chains, strategy=used, case=case
    )


def run_residue(
    problem: ProblemFile,
    strategy: str = "auto",
    cells: Optional[List] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
    homogenized: bool = False,
) -> Tuple[ResidueCertificate, CertificateFile]:
    family = family_from_problem(problem)
    cells = cells if cells is not None else problem.partition
    supplied = partition_from_cells(family, cells) if cells is not None else None
    cert = residue_element(
        family, strategy, partition=supplied, seed=seed, jobs=jobs, homogenized=homogenized
    )
    return cert, certificate_document(cert)


def run_verify(
    problem: ProblemFile, cells: List, seed: Optional[int] = None, jobs: Optional[int] = None
) -> VerifyReport:
    family = family_from_problem(problem)
    ledger = verify(partition_from_cells(family, cells), seed, jobs)
    for check in ledger.checks:
        logger.info(f"check {check.name}: {'pass' if check.passed else 'FAIL'} {check.detail}")
    return VerifyReport(passed=ledger.passed, checks=_check_entries(ledger.checks))
