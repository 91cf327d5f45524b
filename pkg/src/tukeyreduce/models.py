"""Request/response models for the HTTP service."""

from __future__ import annotations

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from .loss import LossSpec


class LossParams(BaseModel):
    kind: Literal["tukey", "clipped"] = "tukey"
    tau: float = 1.0
    p: float = 2.0
    scale: float = 1.0

    def to_spec(self) -> LossSpec:
        return LossSpec(kind=self.kind, tau=self.tau, p=self.p, scale=self.scale)


class Instance(BaseModel):
    a: list[list[float]]
    b: list[float]

    def arrays(self):
        return np.asarray(self.a, dtype=float), np.asarray(self.b, dtype=float)


class GenerateRequest(BaseModel):
    n: int = Field(gt=0)
    d: int = Field(gt=0)
    seed: int = 0
    outlier_fraction: float = 0.0
    outlier_magnitude: float = 1e4


class GenerateResponse(BaseModel):
    instance: Instance


class SolveRequest(BaseModel):
    instance: Instance
    weights: Optional[list[float]] = None
    loss: LossParams
    method: Literal["irls", "grid"] = "irls"
    restarts: int = 10
    max_iter: int = 100
    tol: float = 1e-9
    seed: int = 0


class SolveResponse(BaseModel):
    x: list[float]
    objective: float
    iterations: int
    restarts: int
    converged: bool
    trace: list[float]


class SampleRequest(BaseModel):
    instance: Instance
    loss: LossParams
    target_rows: Optional[int] = None
    eps: float = 0.5
    delta: float = 0.05
    seed: int = 0
    max_depth: int = 64


class SampleResponse(BaseModel):
    n: int
    indices: list[int]
    values: list[float]
    achieved_rows: int
    depth: int


class SketchRequest(BaseModel):
    instance: Instance
    m: int = 64
    b: Optional[int] = None
    c: int = 8
    gamma: float = 2.0
    eps: float = 0.1
    rows_cap: Optional[int] = None
    seed: int = 0


class SketchSpecOut(BaseModel):
    m: int
    b: int
    c: int
    gamma: float
    eps: float


class SketchResponse(BaseModel):
    sa: list[list[float]]
    sb: list[float]
    weights: list[float]
    rows: int
    levels: int
    spec: SketchSpecOut


class ReduceSatRequest(BaseModel):
    dimacs: str
    tau: float = 1.0
    p: float = 2.0
    kind: Literal["tukey", "clipped"] = "clipped"
    scale: float = 1.0


class ReduceSatResponse(BaseModel):
    instance: Instance
    manifest: dict


class BenchRequest(BaseModel):
    n: int = Field(gt=0)
    d: int = Field(gt=0)
    loss: LossParams
    sizes: list[int]
    methods: list[str] = ["rowsample", "msketch", "msketch-clipped"]
    reps: int = 10
    seed: int = 0
    outlier_fraction: float = 0.0
    outlier_magnitude: float = 1e4
    restarts: int = 10
    max_iter: int = 50
    tol: float = 1e-8
    sample_eps: float = 0.5
    sample_delta: float = 0.05
    threads: Optional[int] = None


class BenchRow(BaseModel):
    method: str
    size: int
    rep: int
    ratio: Optional[float] = None  # None encodes a skipped cell (NaN)
    wall_time_ms: float
    achieved_rows: Optional[int] = None
    stalled: Optional[bool] = None
    note: Optional[str] = None


class BenchSummaryRow(BaseModel):
    method: str
    size: int
    best_ratio: Optional[float] = None


class BenchResponse(BaseModel):
    rows: list[BenchRow]
    summary: list[BenchSummaryRow]
    metadata: dict


def float_or_none(value: float) -> Optional[float]:
    return None if value is None or math.isnan(value) else float(value)
