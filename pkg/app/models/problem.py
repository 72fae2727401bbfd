"""
Pydantic models for problem, partition and certificate documents
"""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

Coordinates = List[int]
Cells = List[List[List[Coordinates]]]


class TermSpec(BaseModel):
    """One monomial of an input polynomial; coeff names its coefficient symbol"""
    model_config = ConfigDict(extra="forbid")

    exp: Coordinates
    coeff: Optional[str] = None


class PolytopeSpec(BaseModel):
    """A member polytope, given by points (hull vertices) or by polynomial terms"""
    model_config = ConfigDict(extra="forbid")

    points: Optional[List[Coordinates]] = None
    terms: Optional[List[TermSpec]] = None

    @model_validator(mode="after")
    def exactly_one_form(self) -> "PolytopeSpec":
        if (self.points is None) == (self.terms is None):
            raise ValueError("give exactly one of 'points' or 'terms'")
        if not (self.points or self.terms):
            raise ValueError("a polytope needs at least one point")
        return self


class ProblemFile(BaseModel):
    """n+1 polytopes in dimension n, optionally with a partition grid to use"""
    model_config = ConfigDict(extra="forbid")

    ambient_dim: int = Field(ge=1)
    polytopes: List[PolytopeSpec]
    partition: Optional[Cells] = None

    @model_validator(mode="after")
    def polytope_count(self) -> "ProblemFile":
        if len(self.polytopes) != self.ambient_dim + 1:
            raise ValueError(
                f"expected {self.ambient_dim + 1} polytopes for ambient_dim {self.ambient_dim}, "
                f"got {len(self.polytopes)}"
            )
        return self


class PartitionFile(BaseModel):
    """Partition grid: cells[i][j] lists the lattice points of P_i in class j"""
    model_config = ConfigDict(extra="forbid")

    ambient_dim: int
    strategy: str
    case: Optional[str] = None
    cells: Cells


class FaceColoringEntry(BaseModel):
    vertices: List[Coordinates]
    dim: int
    max_coloring: List[int]
    min_coloring: List[int]


class CheckEntry(BaseModel):
    """One line of the verification ledger"""
    name: str
    clause: str
    passed: bool
    detail: str = ""


class HomogenizedTerm(BaseModel):
    exponents: List[int]
    coefficient: str


class HomogenizedBlock(BaseModel):
    facet_normals: List[Coordinates]
    facet_offsets: List[int]
    terms: List[HomogenizedTerm]
    quotient: Optional[List[HomogenizedTerm]] = None


class DegreeEntry(BaseModel):
    cdeg: int
    min_flavor: int
    second_point: int
    unique_chains: Optional[int] = None


class CertificateFile(BaseModel):
    """Everything a residue certificate claims, in canonical order"""
    model_config = ConfigDict(extra="forbid")

    ambient_dim: int
    strategy: str
    case: Optional[str] = None
    status: str
    partition: PartitionFile
    residue_matrix: List[List[str]]
    colorings: List[FaceColoringEntry]
    degree: DegreeEntry
    determinant: str
    determinant_grouped: str
    support: List[Coordinates]
    homogenized: Optional[HomogenizedBlock] = None
    checks: List[CheckEntry] = Field(default_factory=list)


class EssentialReport(BaseModel):
    essential: bool
    witness: Optional[List[int]] = None
    dimension: Optional[int] = None
    message: str = ""


class VerifyReport(BaseModel):
    passed: bool
    checks: List[CheckEntry]


# Request/Response models for API
class ResidueRequest(BaseModel):
    problem: ProblemFile
    strategy: str = "auto"
    seed: Optional[int] = None
    homogenize: bool = False


class VerifyRequest(BaseModel):
    problem: ProblemFile
    partition: Cells
    seed: Optional[int] = None


class CdegResponse(BaseModel):
    cdeg: int
    min_flavor: int
    unique_chains: int
    strategy: str
    case: Optional[str] = None
