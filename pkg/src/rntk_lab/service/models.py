"""Request/response schemas for the experiment service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str


class KernelValueRequest(BaseModel):
    u0: float = Field(description="inner product of the two unit inputs, in [-1, 1]")
    L: int = Field(ge=1)
    gamma: float = Field(default=0.0, ge=0.0, le=1.0)
    C: float = Field(default=1.0, gt=0.0)


class KernelValueResponse(BaseModel):
    value: float
    alpha: float
    beta: float


class SweepRequest(BaseModel):
    alphas: list[float] = Field(default=[1.0, 2.0, 4.0, 8.0], min_length=1)
    L_grid: list[int] = Field(default=list(range(100, 3001, 100)), min_length=1)
    replications: int = Field(default=100, ge=2)
    dim: int = Field(default=3, ge=2)
    seed: int = 0
    plot: bool = True


class SweepCell(BaseModel):
    alpha: float
    L: int
    mean_value: float
    std_error: float
    replications: int


class SweepResponse(BaseModel):
    csv: str
    svg: str | None = None
    rows: list[SweepCell]


class GenDataRequest(BaseModel):
    n: int = Field(default=200, ge=2)
    dim: int = Field(default=3, ge=2)
    beta: list[float] | None = None
    noise: float = Field(default=0.1, ge=0.0)
    seed: int = 0


class GenDataResponse(BaseModel):
    csv: str
    n_train: int
    n_test: int


class RegressRequest(BaseModel):
    data_csv: str
    L: int = Field(ge=1)
    gamma: float = Field(default=0.0, ge=0.0, le=1.0)
    C: float = Field(default=1.0, gt=0.0)
    lr: float = Field(default=1e-4, gt=0.0)
    epochs: int = Field(default=550, ge=0)
    record_stride: int = Field(default=1, ge=1)
    seed: int = 0
    compare: bool = False
    plot: bool = True


class RegressResponse(BaseModel):
    csv: str
    svg: str | None = None


class EigenRequest(BaseModel):
    dim: int = Field(default=3, ge=3)
    K: int = Field(default=12, ge=1)
    L: int = Field(default=1, ge=1)
    gamma: float = Field(default=0.0, ge=0.0, le=1.0)
    C: float = Field(default=1.0, gt=0.0)


class EigenEntry(BaseModel):
    k: int
    multiplicity: float
    eigenvalue: float
    source: str
    rel_discrepancy: float | None = None


class EigenResponse(BaseModel):
    csv: str
    rows: list[EigenEntry]


class FiniteWidthRequest(BaseModel):
    m_grid: list[int] = Field(default=[256, 1024, 4096], min_length=1)
    L: int = Field(default=2, ge=1)
    gamma: float = Field(default=0.0, ge=0.0, le=1.0)
    C: float = Field(default=1.0, gt=0.0)
    n: int = Field(default=16, ge=2)
    lr: float = Field(default=0.5, gt=0.0)
    epochs: int = Field(default=10, ge=1)
    seeds: int = Field(default=10, ge=1)
    seed: int = 0


class FiniteWidthResponse(BaseModel):
    csv: str
