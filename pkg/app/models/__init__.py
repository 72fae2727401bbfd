from .problem import (
    TermSpec,
    PolytopeSpec,
    ProblemFile,
    PartitionFile,
    CheckEntry,
    CertificateFile,
    EssentialReport,
    VerifyReport,
    ResidueRequest,
    VerifyRequest,
    CdegResponse,
)

__all__ = [
    "TermSpec",
    "PolytopeSpec",
    "ProblemFile",
    "PartitionFile",
    "CheckEntry",
    "CertificateFile",
    "EssentialReport",
    "VerifyReport",
    "ResidueRequest",
    "VerifyRequest",
    "CdegResponse",
]
