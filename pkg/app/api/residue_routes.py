"""
HTTP mirror of the command line: every route returns the document the CLI would write.
Routes are plain functions so the engines run in the threadpool, off the event loop.
"""
from fastapi import APIRouter, HTTPException

from app.errors import (
    ExceptionalFamily,
    InvalidInput,
    NoPartitionFound,
    NonEssential,
    ReskitError,
    ResourceLimit,
    VerificationFailed,
)
from app.models.problem import (
    CdegResponse,
    CertificateFile,
    EssentialReport,
    PartitionFile,
    ProblemFile,
    ResidueRequest,
    VerifyReport,
    VerifyRequest,
)
from app.services import problem_service

router = APIRouter()


def _status(error: ReskitError) -> int:
    if isinstance(error, InvalidInput):
        return 400
    if isinstance(error, (ExceptionalFamily, NoPartitionFound, ResourceLimit)):
        return 409
    if isinstance(error, (NonEssential, VerificationFailed)):
        return 422
    return 500


def _http_error(error: ReskitError) -> HTTPException:
    return HTTPException(
        status_code=_status(error),
        detail={"error": type(error).__name__, "message": error.message, "exit_code": error.exit_code},
    )


@router.post("/essential", response_model=EssentialReport)
def essential(problem: ProblemFile):
    """Essentiality of the family, with the violating subset when it fails"""
    try:
        return problem_service.essential_report(problem_service.family_from_problem(problem))
    except ReskitError as e:
        raise _http_error(e)


@router.post("/partition", response_model=PartitionFile)
def partition(request: ResidueRequest):
    try:
        return problem_service.run_partition(request.problem, request.strategy, seed=request.seed)
    except ReskitError as e:
        raise _http_error(e)


@router.post("/cdeg", response_model=CdegResponse)
def combinatorial_degree(request: ResidueRequest):
    try:
        return problem_service.run_cdeg(request.problem, request.strategy, seed=request.seed)
    except ReskitError as e:
        raise _http_error(e)


@router.post("/residue", response_model=CertificateFile)
def residue(request: ResidueRequest):
    """Certified residue element; a zero degree comes back with status 'vanishing'"""
    try:
        _, document = problem_service.run_residue(
            request.problem, request.strategy, seed=request.seed, homogenized=request.homogenize
        )
        return document
    except ReskitError as e:
        raise _http_error(e)


@router.post("/verify", response_model=VerifyReport)
def verify(request: VerifyRequest):
    try:
        return problem_service.run_verify(request.problem, request.partition, seed=request.seed)
    except ReskitError as e:
        raise _http_error(e)
