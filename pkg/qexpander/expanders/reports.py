"""Report models returned by the certificate checks and written by the command line."""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class CheegerReport(BaseModel):
    degree: int = Field(description="Regular degree d")
    lambda2: float = Field(description="Second-largest adjacency eigenvalue")
    expansion: float = Field(description="Exact expansion constant h(G) by subset enumeration")
    lower_bound: float = Field(description="(d - lambda2) / 2")
    upper_bound: float = Field(description="sqrt(2d(d - lambda2))")
    mohar_bound: float = Field(description="sqrt(d^2 - lambda2^2)")
    passed: bool = Field(description="Both Cheeger inequalities and the refined upper bound hold")


class MargulisReport(BaseModel):
    cosets: int = Field(description="Number of vertices of the coset graph")
    eps: float = Field(description="Kazhdan constant used")
    bound: float = Field(description="eps^2 / 4")
    weighted_expansion: Optional[float] = Field(None, description="Expansion of the multigraph operator")
    simple_expansion: Optional[float] = Field(None, description="Expansion of the simple projection")
    passed: bool


class ChannelValidation(BaseModel):
    dim: int = Field(description="Dimension of the underlying Hilbert space")
    kraus_count: int
    cp: bool = Field(description="Choi matrix positive semidefinite")
    tp: bool = Field(description="Sum of K^dagger K equals the identity")
    unital: bool = Field(description="Sum of K K^dagger equals the identity")
    undirected: bool = Field(description="Transfer matrix Hermitian for the Hilbert-Schmidt inner product")
    connected: bool = Field(description="Fixed point space is one-dimensional")
    fixed_space_dim: int


class GapCertificate(BaseModel):
    lambda2: Optional[float] = Field(None, description="Second-largest transfer eigenvalue, absent in dimension 1")
    eps: float = Field(description="Kazhdan constant supplied")
    dim_he: int = Field(description="Dimension of the generating block space")
    lambda_min: float = Field(description="Smallest eigenvalue of the state density")
    lambda2_bound: float = Field(description="1 - lambda_min * eps^2 / 2")
    lower_certificate: Optional[float] = Field(None, description="(1 - lambda2) / 2")
    expansion_bound: float = Field(description="lambda_min * eps^2 / 4")
    passed: bool


class SchreierCertificate(BaseModel):
    d: float = Field(description="Regular degree of the unrestricted graph")
    lam: float = Field(description="Smallest block weight dim H_s / d")
    eps: float
    lambda2: Optional[float] = Field(None, description="Second eigenvalue of the restricted normalized operator")
    bound: float = Field(description="1 - lam * eps^2 / 2")
    degenerate: bool = Field(description="Restriction is one-dimensional, nothing to certify")
    passed: bool


class RunReport(BaseModel):
    command: List[str] = Field(description="Command line as invoked")
    seed: int
    tolerances: Dict[str, float]
    results: Dict[str, Any] = Field(default_factory=dict)
    checks: Dict[str, bool] = Field(default_factory=dict)
    passed: bool = True
    wall_time: float = Field(0.0, description="Seconds spent in the analysis")

    def add_check(self, name: str, value: bool) -> None:
        self.checks[name] = bool(value)
        self.passed = self.passed and bool(value)
